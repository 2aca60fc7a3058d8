//! Mean-field Bloch dynamics of the transverse-field Ising model with
//! cavity-induced damping.
//!
//! Each site carries a unit vector m_i (the classical limit of S_i/S). Time is
//! measured in units of 1/ω_z and the pump enters through p(t) = Ω²(t)/Ω_c²:
//!
//!   B_i = (−(p/λ_max) Σ_j J_ij m_j^x, 0, 1)
//!   dm_i/dt = B_i × m_i + γ m_i × (m_i × B_i),   γ = (κ/|Δ_C|) p · damping_scale
//!
//! so that the paramagnet m_i = (0, 0, −1) loses stability exactly at p = 1.
//! The damping term relaxes each m_i toward −B_i, the instantaneous minimum of
//! the mean-field energy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::integrator::{dopri5, StepControl};
use super::schedule::RampSchedule;
use crate::coupling::PhysicalParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemiclassicalOptions {
    /// Standard deviation of the initial transverse tilt ξ_i.
    pub epsilon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Largest tolerated deviation of |m_i| from 1 within one step.
    pub norm_tol: f64,
    /// Multiplier on the cavity damping rate.
    pub damping_scale: f64,
    pub max_steps: usize,
}

impl Default for SemiclassicalOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, rtol: 1e-8, atol: 1e-12, norm_tol: 1e-9, damping_scale: 1.0, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Final unit vectors, `m[3 i + k]`.
    pub m: Vec<f64>,
    pub steps: usize,
}

impl Trajectory {
    pub fn mx(&self) -> Vec<f64> {
        self.m.chunks(3).map(|v| v[0]).collect()
    }
}

/// Integrates the Bloch equations through the ramp and quench from the
/// paramagnet tilted by `xi`.
pub fn integrate_semiclassical(
    j: &DMatrix<f64>,
    lambda_max: f64,
    phys: &PhysicalParams,
    schedule: &RampSchedule,
    xi: &[f64],
    opts: &SemiclassicalOptions,
) -> Result<Trajectory> {
    let n = j.nrows();
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: xi.len() });
    }
    if !(lambda_max > 0.0) {
        return Err(Error::NonPositiveEigenvalue(lambda_max));
    }
    schedule.validate()?;
    let mut m = Vec::with_capacity(3 * n);
    for &x in xi {
        let norm = (x * x + 1.0).sqrt();
        m.extend_from_slice(&[x / norm, 0.0, -1.0 / norm]);
    }
    let omega_z = phys.omega_z;
    let damping = phys.kappa / phys.delta_c.abs() * opts.damping_scale;
    let jrows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| j[(i, k)]).collect()).collect();

    let rhs_at = |p: f64| {
        let jrows = &jrows;
        move |_t: f64, y: &[f64], dy: &mut [f64]| {
            let h = p / lambda_max;
            let g = damping * p;
            for i in 0..n {
                let field: f64 = jrows[i].iter().enumerate().map(|(k, jik)| jik * y[3 * k]).sum();
                let b = [-h * field, 0.0, 1.0];
                let mi = [y[3 * i], y[3 * i + 1], y[3 * i + 2]];
                let bxm = cross(b, mi);
                let mxb = cross(mi, b);
                let mmb = cross(mi, mxb);
                for k in 0..3 {
                    dy[3 * i + k] = bxm[k] + g * mmb[k];
                }
            }
        }
    };
    let post = |y: &mut [f64]| -> bool {
        let mut ok = true;
        for v in y.chunks_mut(3) {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (norm - 1.0).abs() > opts.norm_tol {
                ok = false;
            }
            v.iter_mut().for_each(|c| *c /= norm);
        }
        ok
    };
    let ctl = StepControl { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps };

    // The ramp is smooth; integrate it with the pump evaluated at each stage.
    let t_ramp = schedule.t_ramp_s() * omega_z;
    let ramp = |t: f64, y: &[f64], dy: &mut [f64]| {
        let p = schedule.omega_sq_ratio(t / omega_z);
        rhs_at(p)(t, y, dy)
    };
    let (h, s1) = dopri5(&ramp, &post, &mut m, 0.0, t_ramp, 1e-2, ctl)?;
    let quench = rhs_at(schedule.quench_target);
    let t_end = t_ramp + schedule.t_quench_s() * omega_z;
    let (_, s2) = dopri5(&quench, &post, &mut m, t_ramp, t_end, h, ctl)?;
    Ok(Trajectory { m, steps: s1 + s2 })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(j: DMatrix<f64>, xi: &[f64], sched: RampSchedule) -> Trajectory {
        let lmax = nalgebra::SymmetricEigen::new(j.clone()).eigenvalues.max();
        integrate_semiclassical(&j, lmax, &PhysicalParams::default(), &sched, xi, &SemiclassicalOptions::default()).unwrap()
    }

    #[test]
    fn below_threshold_the_paramagnet_persists() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        let sched = RampSchedule { ramp_target: 1.0, quench_target: 1.0, t_ramp_ms: 0.5, ..Default::default() };
        let t = run(j, &[1e-3, -2e-3], sched);
        assert!(t.mx().iter().all(|x| x.abs() < 0.05), "{:?}", t.mx());
    }

    #[test]
    fn above_threshold_a_single_spin_orders() {
        let j = DMatrix::from_element(1, 1, 1.0);
        let t = run(j, &[1e-3], RampSchedule::with_ramp_ms(2.0));
        let mx = t.mx()[0];
        // Mean-field ground state at p = 5: m_x = ±sqrt(1 − 1/p²).
        assert!(mx > 0.9, "m_x = {mx}");
    }

    #[test]
    fn unit_norm_is_preserved() {
        let j = DMatrix::from_row_slice(3, 3, &[0.5, -0.3, 0.1, -0.3, 0.4, 0.2, 0.1, 0.2, 0.6]);
        let t = run(j, &[1e-3, 2e-3, -1e-3], RampSchedule::with_ramp_ms(1.0));
        for v in t.m.chunks(3) {
            assert!((v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn negating_the_seed_negates_the_trajectory_exactly() {
        let j = DMatrix::from_row_slice(3, 3, &[0.5, -0.3, 0.1, -0.3, 0.4, 0.2, 0.1, 0.2, 0.6]);
        let xi = [1.3e-3, -0.4e-3, 0.7e-3];
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        let a = run(j.clone(), &xi, RampSchedule::with_ramp_ms(1.0));
        let b = run(j, &neg, RampSchedule::with_ramp_ms(1.0));
        for (u, v) in a.m.chunks(3).zip(b.m.chunks(3)) {
            assert_eq!(u[0], -v[0]);
            assert_eq!(u[1], -v[1]);
            assert_eq!(u[2], v[2]);
        }
    }
}
