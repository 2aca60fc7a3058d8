//! Hermite functions, Gauss–Hermite rules and the Hermite–Gauss mode sum.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Orthonormal Hermite functions ψ_0..=ψ_nmax at `t`, with ∫ψ_k² dt = 1.
pub fn hermite_functions(t: f64, nmax: usize) -> Vec<f64> {
    let mut h = vec![0.0; nmax + 1];
    h[0] = PI.powf(-0.25) * (-0.5 * t * t).exp();
    if nmax > 0 {
        h[1] = 2f64.sqrt() * t * h[0];
    }
    for k in 1..nmax {
        let kf = k as f64;
        h[k + 1] = (2.0 / (kf + 1.0)).sqrt() * t * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
    }
    h
}

/// Nodes and weights of the n-point Gauss–Hermite rule for ∫ e^{−t²} f(t) dt.
///
/// Golub–Welsch: eigen-decomposition of the symmetric Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Hermite rule needs at least one node");
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize so that odd moments vanish to rounding.
    for k in 0..n / 2 {
        let (a, b) = (pairs[k], pairs[n - 1 - k]);
        let x = 0.5 * (b.0 - a.0);
        let w = 0.5 * (a.1 + b.1);
        pairs[k] = (-x, w);
        pairs[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Transverse HG mode Ξ_lm(ρ) = ψ_l(√2 x) ψ_m(√2 y) in waist units.
///
/// With this scaling Σ_µ Ξ_µ(r) Ξ_µ(r′) = ½ δ(r − r′).
pub fn hg_mode(l: usize, m: usize, r: [f64; 2]) -> f64 {
    let hx = hermite_functions(2f64.sqrt() * r[0], l);
    let hy = hermite_functions(2f64.sqrt() * r[1], m);
    hx[l] * hy[m]
}

/// Truncated mode sum Σ_{n_µ ≤ nmax} Ξ_µ(r) Ξ_µ(r′) e^{−n_µ φ}, optionally
/// restricted to the family n_µ ≡ η (mod N) given as `family = Some((N, η))`.
pub fn hg_mode_sum(r: [f64; 2], rp: [f64; 2], phi: f64, nmax: usize, family: Option<(u32, u32)>) -> f64 {
    let s2 = 2f64.sqrt();
    let hx = hermite_functions(s2 * r[0], nmax);
    let hy = hermite_functions(s2 * r[1], nmax);
    let gx = hermite_functions(s2 * rp[0], nmax);
    let gy = hermite_functions(s2 * rp[1], nmax);
    let mut total = 0.0;
    for l in 0..=nmax {
        let ax = hx[l] * gx[l];
        for m in 0..=nmax - l {
            let order = l + m;
            if let Some((n, eta)) = family {
                if order % n as usize != eta as usize {
                    continue;
                }
            }
            total += ax * hy[m] * gy[m] * (-(order as f64) * phi).exp();
        }
    }
    total
}
