use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Q0Parity {
    Even,
    Odd,
}

/// Degenerate M/N resonator and the mode family it is driven on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    pub m: u32,
    pub n: u32,
    pub q0_parity: Q0Parity,
    pub eta: u32,
    /// Fundamental-mode waist (µm).
    pub w0_um: f64,
    /// Mirror separation (cm).
    pub length_cm: f64,
    /// Mirror radius of curvature (cm).
    pub mirror_radius_cm: f64,
    /// Exponential mode cutoff; 0 is perfect degeneracy.
    pub phi: f64,
}

impl CavityGeometry {
    pub fn new(
        m: u32,
        n: u32,
        q0_parity: Q0Parity,
        eta: u32,
        w0_um: f64,
        mirror_radius_cm: f64,
        phi: f64,
    ) -> Result<Self> {
        let length_cm = degenerate_length(m, n, mirror_radius_cm);
        let geom = Self { m, n, q0_parity, eta, w0_um, length_cm, mirror_radius_cm, phi };
        geom.validate()?;
        Ok(geom)
    }

    /// The 4/7 resonator with R = 1 cm, w0 = 34.8 µm, driven on η = 0, odd Q0.
    pub fn four_seven() -> Self {
        Self::new(4, 7, Q0Parity::Odd, 0, 34.8, 1.0, 0.0).expect("valid preset")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("M and N must be positive".into()));
        }
        if gcd(self.m, self.n) != 1 {
            return Err(Error::InvalidParameter(format!(
                "M/N = {}/{} is not irreducible",
                self.m, self.n
            )));
        }
        if self.eta >= self.n {
            return Err(Error::InvalidParameter(format!(
                "eta = {} must lie in [0, {})",
                self.eta, self.n
            )));
        }
        if !(self.phi >= 0.0) {
            return Err(Error::InvalidParameter(format!("phi = {} must be >= 0", self.phi)));
        }
        if !(self.w0_um > 0.0) {
            return Err(Error::InvalidParameter(format!("w0 = {} must be > 0", self.w0_um)));
        }
        if !(self.length_cm > 0.0) || !(self.mirror_radius_cm > 0.0) {
            return Err(Error::InvalidParameter("cavity length and mirror radius must be > 0".into()));
        }
        Ok(())
    }

    /// Half-trip FRFT angle Mπ/N.
    pub fn half_trip_angle(&self) -> f64 {
        self.m as f64 * PI / self.n as f64
    }

    pub fn is_even_m(&self) -> bool {
        self.m % 2 == 0
    }

    pub fn length_m(&self) -> f64 {
        self.length_cm * 1e-2
    }

    pub fn free_spectral_range_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.length_m())
    }
}

/// L = 2R sin²(Mπ/2N).
pub fn degenerate_length(m: u32, n: u32, radius: f64) -> f64 {
    let s = (m as f64 * PI / (2.0 * n as f64)).sin();
    2.0 * radius * s * s
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Transverse Hermite-Gauss indices µ = (l, m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub l: u32,
    pub m: u32,
}

impl ModeIndex {
    pub fn order(&self) -> u32 {
        self.l + self.m
    }

    /// Selector S_µ^η: whether the mode belongs to the driven family.
    pub fn in_family(&self, geom: &CavityGeometry) -> bool {
        self.order() % geom.n == geom.eta
    }
}

/// Resonance frequency (Hz) of the perfectly degenerate (Q0, η) family.
pub fn family_frequency(q0: i64, eta: u32, length_m: f64, m: u32, n: u32) -> Result<f64> {
    if !(length_m > 0.0) {
        return Err(Error::InvalidParameter(format!("length {length_m} must be > 0")));
    }
    let fsr = SPEED_OF_LIGHT / (2.0 * length_m);
    Ok(fsr * (q0 as f64 + m as f64 / n as f64 * (1.0 + eta as f64)))
}
