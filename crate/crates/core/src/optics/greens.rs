use num_complex::Complex64;
use std::f64::consts::PI;

use super::geometry::{CavityGeometry, Q0Parity};
use crate::{Error, Result, Vec2};

/// Mehler kernel Σ_µ Ξ_µ(r) Ξ_µ(r′) e^{−n_µ φ} in closed form (waist units).
pub fn mehler_kernel(r: Vec2, rp: Vec2, phi: Complex64) -> Result<Complex64> {
    if phi.re < 0.0 || !phi.re.is_finite() || !phi.im.is_finite() {
        return Err(Error::InvalidParameter(format!("phi = {phi} must have Re(phi) >= 0")));
    }
    let denom = 1.0 - (-2.0 * phi).exp();
    if denom.norm() < 1e-15 {
        return Err(Error::SingularArgument(format!("sinh(phi) = 0 at phi = {phi}")));
    }
    let th = (phi / 2.0).tanh();
    let d2 = (r[0] - rp[0]).powi(2) + (r[1] - rp[1]).powi(2);
    let p2 = (r[0] + rp[0]).powi(2) + (r[1] + rp[1]).powi(2);
    let expo = -d2 / (2.0 * th) - p2 * th / 2.0;
    Ok(expo.exp() / (PI * denom))
}

/// η-family Green's function: the N-term phase-weighted Mehler combination.
pub fn family_greens(r: Vec2, rp: Vec2, geom: &CavityGeometry) -> Result<Complex64> {
    if geom.phi <= 0.0 {
        return Err(Error::SingularArgument(
            "family_greens at phi = 0 contains a delta function; use the closed-form nonlocal part".into(),
        ));
    }
    let n = geom.n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..geom.n {
        let theta = 2.0 * PI * s as f64 / n;
        let weight = Complex64::from_polar(1.0, -(geom.eta as f64) * theta);
        acc += weight * mehler_kernel(r, rp, Complex64::new(geom.phi, -theta))?;
    }
    Ok(acc / n)
}

/// η = 0, M/N = 4/7 nonlocal Green's function in the normalization where the
/// value at the origin is 3/π. Positions in µm.
pub fn greens_47_nonlocal(ri: Vec2, rj: Vec2, geom: &CavityGeometry) -> f64 {
    let w2 = geom.w0_um * geom.w0_um;
    let sum_sq = ri[0] * ri[0] + ri[1] * ri[1] + rj[0] * rj[0] + rj[1] * rj[1];
    let dot = ri[0] * rj[0] + ri[1] * rj[1];
    let eta = geom.eta as f64;
    (1..=3)
        .map(|nu| {
            let a = 2.0 * nu as f64 * PI / 7.0;
            let (s, c) = a.sin_cos();
            ((1.0 + eta) * a + (c * sum_sq - 2.0 * dot) / (s * w2)).sin() / (PI * s)
        })
        .sum()
}

/// One defocused component of the φ = 0 family Green's function,
/// `weight · sin(phase + (c(r² + r′²) − 2 r·r′)/(s w0²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalTerm {
    pub weight: f64,
    pub phase: f64,
    pub c: f64,
    pub s: f64,
}

impl NonlocalTerm {
    /// Quadratic coefficient and cross coefficient in physical units:
    /// the argument is `phase + beta (r² + r′²) − gamma r·r′`.
    pub fn beta_gamma(&self, w0: f64) -> (f64, f64) {
        let w2 = w0 * w0;
        (self.c / (self.s * w2), 2.0 / (self.s * w2))
    }

    pub fn eval(&self, ri: Vec2, rj: Vec2, w0: f64) -> f64 {
        let (beta, gamma) = self.beta_gamma(w0);
        let sum_sq = ri[0] * ri[0] + ri[1] * ri[1] + rj[0] * rj[0] + rj[1] * rj[1];
        let dot = ri[0] * rj[0] + ri[1] * rj[1];
        self.weight * (self.phase + beta * sum_sq - gamma * dot).sin()
    }
}

/// Nonlocal components of the φ = 0 family Green's function for odd N.
///
/// The full kernel is `(w0²/2N) δ(r − r′) + Σ terms`; for N = 7 the sum equals
/// `greens_47_nonlocal / 7`.
pub fn greens_nonlocal_terms(geom: &CavityGeometry) -> Result<Vec<NonlocalTerm>> {
    if geom.n % 2 == 0 {
        return Err(Error::UnsupportedGeometry(format!(
            "closed-form Green's function needs odd N, got N = {}",
            geom.n
        )));
    }
    let n = geom.n as f64;
    Ok((1..=(geom.n - 1) / 2)
        .map(|nu| {
            let a = 2.0 * PI * nu as f64 / n;
            let (s, c) = a.sin_cos();
            NonlocalTerm { weight: 1.0 / (n * PI * s), phase: (1.0 + geom.eta as f64) * a, c, s }
        })
        .collect())
}

/// Weight of δ(r − r′) (physical units) in the φ = 0 family Green's function.
pub fn local_weight(geom: &CavityGeometry) -> f64 {
    geom.w0_um * geom.w0_um / (2.0 * geom.n as f64)
}

/// Midplane 2×2 quadrature matrix; only the quadrature selected by Q0 survives
/// for even M.
pub fn midplane_interaction_matrix(r: Vec2, rp: Vec2, geom: &CavityGeometry) -> Result<[[f64; 2]; 2]> {
    if !geom.is_even_m() {
        return Err(Error::UnsupportedGeometry(format!(
            "odd M = {} couples both longitudinal quadratures",
            geom.m
        )));
    }
    let g = family_greens(r, rp, geom)?.re;
    Ok(match geom.q0_parity {
        Q0Parity::Odd => [[g, 0.0], [0.0, 0.0]],
        Q0Parity::Even => [[0.0, 0.0], [0.0, g]],
    })
}
