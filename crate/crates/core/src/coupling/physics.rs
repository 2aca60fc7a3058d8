use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::jmatrix::CouplingMatrix;
use crate::{Error, Result};

const HBAR: f64 = 1.054_571_817e-34;
const RB87_MASS: f64 = 1.443_160_648e-25;

/// Drive and cavity parameters. Angular frequencies in rad/s (2π included),
/// energies expressed as E/ħ in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub n_atoms: f64,
    pub g0: f64,
    pub kappa: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    /// Recoil energy E_r/ħ.
    pub e_r: f64,
    /// Spin splitting ω_z = 2E_r/ħ.
    pub omega_z: f64,
    /// Pump wavelength (m).
    pub lambda_pump: f64,
}

impl Default for PhysicalParams {
    /// ⁸⁷Rb at 780 nm in the 4/7 cavity, g0 = 2π·1.35 MHz.
    fn default() -> Self {
        let lambda = 780e-9;
        let k = 2.0 * PI / lambda;
        let e_r = HBAR * k * k / (2.0 * RB87_MASS);
        Self {
            n_atoms: 6e4,
            g0: 2.0 * PI * 1.35e6,
            kappa: 2.0 * PI * 140e3,
            delta_a: -2.0 * PI * 97.2e9,
            delta_c: -2.0 * PI * 20e6,
            e_r,
            omega_z: 2.0 * e_r,
            lambda_pump: lambda,
        }
    }
}

impl PhysicalParams {
    /// Default parameters with the main-text coupling g0 = 2π·1.47 MHz.
    pub fn main_text() -> Self {
        Self { g0: 2.0 * PI * 1.47e6, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if !(self.delta_a < 0.0) || !(self.delta_c < 0.0) {
            return bad("Delta_A and Delta_C must be negative (red detuning)");
        }
        if !(self.kappa > 0.0) {
            return bad("kappa must be positive");
        }
        if !(self.n_atoms > 0.0) || !(self.g0 > 0.0) || !(self.e_r > 0.0) || !(self.omega_z > 0.0) {
            return bad("atom number, g0, E_r and omega_z must be positive");
        }
        Ok(())
    }

    /// Collective spin length S = N_A/2.
    pub fn spin_length(&self) -> f64 {
        self.n_atoms / 2.0
    }

    /// Dissipation rate per spin near threshold, N_A κ ω_z/|Δ_C| (rad/s).
    pub fn per_spin_rate(&self) -> f64 {
        self.n_atoms * self.kappa * self.omega_z / self.delta_c.abs()
    }
}

/// Critical pump Rabi frequency squared (rad²/s²),
/// Ω_c² = 2E_r Δ_A² (Δ_C² + κ²) / (N_A λ_max g0² |Δ_C|).
pub fn critical_pump(jm: &CouplingMatrix, phys: &PhysicalParams) -> Result<f64> {
    phys.validate()?;
    let lmax = jm.lambda_max();
    if !(lmax > 0.0) {
        return Err(Error::NonPositiveEigenvalue(lmax));
    }
    Ok(2.0 * phys.e_r * phys.delta_a.powi(2) * (phys.delta_c.powi(2) + phys.kappa.powi(2))
        / (phys.n_atoms * lmax * phys.g0.powi(2) * phys.delta_c.abs()))
}

#[derive(Debug, Clone)]
pub struct CollapseRates {
    /// (coefficient, eigenvector) per eigenmode of J, in descending eigenvalue order.
    pub modes: Vec<(f64, DVector<f64>)>,
    /// N_A κ ω_z / |Δ_C| (rad/s).
    pub per_spin_rate: f64,
}

/// Collapse-operator coefficients √(λ_i κ) g0 Ω / (2|Δ_C| Δ_A) paired with
/// the eigenvectors of J. Eigenvalues within −1e−8·max|λ| are clamped to zero.
pub fn collapse_rates(jm: &CouplingMatrix, phys: &PhysicalParams, omega: f64) -> Result<CollapseRates> {
    phys.validate()?;
    let tol = 1e-8 * jm.eigvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut modes = Vec::with_capacity(jm.n());
    for (k, &lam) in jm.eigvals.iter().enumerate() {
        if lam < -tol {
            return Err(Error::NegativeEigenvalue { index: k, value: lam });
        }
        let c = (lam.max(0.0) * phys.kappa).sqrt() * phys.g0 * omega / (2.0 * phys.delta_c.abs() * phys.delta_a);
        modes.push((c, jm.eigvecs.column(k).into_owned()));
    }
    Ok(CollapseRates { modes, per_spin_rate: phys.per_spin_rate() })
}
