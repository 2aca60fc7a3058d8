use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::optics::hermite::gauss_hermite;
use crate::{Error, Result, Vec2};

/// Transverse atomic density of one ensemble,
/// ρ(r) = a00 g00 + a01 g01 + a10 g10 around the trap center, where g00 is
/// the normalized Gaussian with widths (σx, σy), g10 = √2 (x/σx) g00 and
/// g01 = √2 (y/σy) g00 (coordinates relative to the center).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityProfile {
    /// µm
    pub sigma_x: f64,
    /// µm
    pub sigma_y: f64,
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
}

impl Default for DensityProfile {
    fn default() -> Self {
        Self::gaussian(5.2, 5.4)
    }
}

/// Nodes and weights that integrate ∫ ρ(r) f(r) d²r ≈ Σ_ab w_ab f(x_a, y_b).
#[derive(Debug, Clone)]
pub(crate) struct DensityQuadrature {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major weights `w[a * y.len() + b]`.
    pub w: Vec<f64>,
}

impl DensityProfile {
    pub fn gaussian(sigma_x: f64, sigma_y: f64) -> Self {
        Self { sigma_x, sigma_y, a00: 1.0, a01: 0.0, a10: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "density widths must be positive, got ({}, {})",
                self.sigma_x, self.sigma_y
            )));
        }
        let norm = self.a00 * self.a00 + self.a01 * self.a01 + self.a10 * self.a10;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("a00² + a01² + a10² = {norm}, expected 1")));
        }
        Ok(())
    }

    /// Fraction of the ensemble in the split (HG01/HG10) components.
    pub fn split_fraction(&self) -> f64 {
        self.a01 * self.a01 + self.a10 * self.a10
    }

    /// ρ at offset `d` from the trap center.
    pub fn eval(&self, d: Vec2) -> f64 {
        let u = d[0] / self.sigma_x;
        let v = d[1] / self.sigma_y;
        let g = (-0.5 * (u * u + v * v)).exp() / (2.0 * PI * self.sigma_x * self.sigma_y);
        g * (self.a00 + 2f64.sqrt() * (self.a10 * u + self.a01 * v))
    }

    /// Tensor Gauss–Hermite rule with `nodes` points per axis, exact for the
    /// density times any polynomial of degree < 2·nodes − 1 per axis.
    pub(crate) fn quadrature(&self, center: Vec2, nodes: usize) -> DensityQuadrature {
        let (t, w) = gauss_hermite(nodes);
        let x: Vec<f64> = t.iter().map(|t| center[0] + 2f64.sqrt() * self.sigma_x * t).collect();
        let y: Vec<f64> = t.iter().map(|t| center[1] + 2f64.sqrt() * self.sigma_y * t).collect();
        let mut wts = Vec::with_capacity(nodes * nodes);
        for a in 0..nodes {
            for b in 0..nodes {
                // (x − x_i)/σx = √2 t, so the HG10 factor √2 u becomes 2t.
                let poly = self.a00 + 2.0 * (self.a10 * t[a] + self.a01 * t[b]);
                wts.push(w[a] * w[b] / PI * poly);
            }
        }
        DensityQuadrature { x, y, w: wts }
    }
}

/// ∫ ρ_i ρ_j d²r in closed form.
///
/// The product of the two Gaussians is a Gaussian of mean µ and variance s²
/// times an overlap constant; the polynomial prefactors are then integrated
/// exactly with a short Gauss–Hermite rule.
pub fn density_overlap(ci: Vec2, di: &DensityProfile, cj: Vec2, dj: &DensityProfile) -> f64 {
    let (t, w) = gauss_hermite(4);
    let axis = |xi: f64, si: f64, xj: f64, sj: f64| {
        let v = si * si + sj * sj;
        let mu = (xi * sj * sj + xj * si * si) / v;
        let s = si * sj / v.sqrt();
        let c = (-(xi - xj).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        (mu, s, c)
    };
    let (mx, sx, cx) = axis(ci[0], di.sigma_x, cj[0], dj.sigma_x);
    let (my, sy, cy) = axis(ci[1], di.sigma_y, cj[1], dj.sigma_y);
    let poly = |d: &DensityProfile, c: Vec2, x: f64, y: f64| {
        d.a00 + 2f64.sqrt() * (d.a10 * (x - c[0]) / d.sigma_x + d.a01 * (y - c[1]) / d.sigma_y)
    };
    let mut acc = 0.0;
    for a in 0..t.len() {
        for b in 0..t.len() {
            let x = mx + 2f64.sqrt() * sx * t[a];
            let y = my + 2f64.sqrt() * sy * t[b];
            acc += w[a] * w[b] / PI * poly(di, ci, x, y) * poly(dj, cj, x, y);
        }
    }
    cx * cy * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: impl Fn(f64, f64) -> f64, c: Vec2, half: f64, h: f64) -> f64 {
        let n = (2.0 * half / h) as i64;
        let mut s = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                s += f(c[0] - half + i as f64 * h, c[1] - half + j as f64 * h);
            }
        }
        s * h * h
    }

    #[test]
    fn densities_are_normalized_and_split_parts_integrate_to_zero() {
        let d = DensityProfile { sigma_x: 4.0, sigma_y: 6.0, a00: 0.8, a01: 0.6, a10: 0.0 };
        d.validate().unwrap();
        let total = brute(|x, y| d.eval([x - 1.0, y + 2.0]), [1.0, -2.0], 50.0, 0.1);
        assert!((total - 0.8).abs() < 1e-10);
        let q = d.quadrature([1.0, -2.0], 12);
        assert!((q.w.iter().sum::<f64>() - 0.8).abs() < 1e-13);
    }

    #[test]
    fn quadrature_reproduces_first_moment_of_split_component() {
        let d = DensityProfile { sigma_x: 3.0, sigma_y: 5.0, a00: 0.0, a01: 0.0, a10: 1.0 };
        let q = d.quadrature([0.0, 0.0], 8);
        let mut m = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                m += q.w[a * 8 + b] * q.x[a];
            }
        }
        let exact = brute(|x, y| d.eval([x, y]) * x, [0.0, 0.0], 40.0, 0.05);
        assert!((m - exact).abs() < 1e-9, "{m} vs {exact}");
    }

    #[test]
    fn overlap_matches_brute_force() {
        let di = DensityProfile { sigma_x: 5.0, sigma_y: 6.0, a00: 0.9, a01: 0.3, a10: (1.0f64 - 0.81 - 0.09).sqrt() };
        let dj = DensityProfile::gaussian(4.0, 5.5);
        let (ci, cj) = ([0.0, 0.0], [3.0, -2.0]);
        let closed = density_overlap(ci, &di, cj, &dj);
        let num = brute(|x, y| di.eval([x - ci[0], y - ci[1]]) * dj.eval([x - cj[0], y - cj[1]]), [1.5, -1.0], 45.0, 0.1);
        assert!((closed - num).abs() < 1e-10 * closed.abs().max(1e-3), "{closed} vs {num}");
        let self_overlap = density_overlap(ci, &dj, ci, &dj);
        assert!((self_overlap - 1.0 / (4.0 * PI * 4.0 * 5.5)).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(DensityProfile::gaussian(0.0, 1.0).validate().is_err());
        assert!(DensityProfile { a00: 0.5, ..DensityProfile::default() }.validate().is_err());
    }
}
