//! Projected gradient descent of E(s) = −Σ_{i≠j} J_ij s_i s_j on [−1, 1]ⁿ.
//!
//! E is multilinear, so the only stable fixed points of the projected flow are
//! box vertices where every spin is aligned with its local field, i.e. the
//! single-flip-stable states of the binary Ising energy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the projected gradient.
    pub gradient_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, gradient_tol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    /// Fixed point in the box (not normalized).
    pub s: Vec<f64>,
    pub iterations: usize,
    /// Norm of the projected gradient at the fixed point.
    pub projected_gradient: f64,
}

/// ∂E/∂s_i with the diagonal excluded.
pub fn energy_gradient(j: &DMatrix<f64>, s: &[f64]) -> Vec<f64> {
    let n = s.len();
    (0..n)
        .map(|i| -2.0 * (0..n).filter(|&k| k != i).map(|k| j[(i, k)] * s[k]).sum::<f64>())
        .collect()
}

/// Gradient components that can still move the state inside the box.
pub fn projected_gradient_norm(j: &DMatrix<f64>, s: &[f64]) -> f64 {
    energy_gradient(j, s)
        .iter()
        .zip(s)
        .map(|(&g, &x)| if (x >= 1.0 && g < 0.0) || (x <= -1.0 && g > 0.0) { 0.0 } else { g * g })
        .sum::<f64>()
        .sqrt()
}

pub fn descend(j: &DMatrix<f64>, start: &[f64], opts: &DescentOptions) -> Result<DescentOutcome> {
    let n = j.nrows();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: start.len() });
    }
    // Step below 1/L with L = 2·max row sum of |J_ij|, i ≠ j.
    let lip = (0..n)
        .map(|i| (0..n).filter(|&k| k != i).map(|k| j[(i, k)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * 2.0;
    let mut s: Vec<f64> = start.iter().map(|x| x.clamp(-1.0, 1.0)).collect();
    if lip == 0.0 {
        return Ok(DescentOutcome { s, iterations: 0, projected_gradient: 0.0 });
    }
    let step = 1.0 / lip;
    for it in 0..opts.max_iterations {
        let g = energy_gradient(j, &s);
        let next: Vec<f64> = s.iter().zip(&g).map(|(x, gi)| (x - step * gi).clamp(-1.0, 1.0)).collect();
        let pg = projected_gradient_norm(j, &next);
        let moved = next != s;
        s = next;
        if !moved || pg <= opts.gradient_tol {
            return Ok(DescentOutcome { s, iterations: it + 1, projected_gradient: pg });
        }
    }
    Err(Error::NonConvergence { what: "projected gradient descent".into(), iterations: opts.max_iterations })
}
