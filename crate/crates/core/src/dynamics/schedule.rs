use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponential pump ramp followed by a quench, as multiples of Ω_c².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSchedule {
    /// Ramp duration (ms).
    pub t_ramp_ms: f64,
    /// Quench duration (µs).
    pub t_quench_us: f64,
    pub ramp_target: f64,
    pub quench_target: f64,
    /// Ramp time constant τ as a fraction of the ramp duration.
    pub tau_fraction: f64,
}

impl Default for RampSchedule {
    fn default() -> Self {
        Self { t_ramp_ms: 10.0, t_quench_us: 300.0, ramp_target: 4.0, quench_target: 5.0, tau_fraction: 1.0 / 3.0 }
    }
}

impl RampSchedule {
    pub fn with_ramp_ms(t_ramp_ms: f64) -> Self {
        Self { t_ramp_ms, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_ramp_ms > 0.0) || !(self.t_quench_us >= 0.0) || !(self.tau_fraction > 0.0) {
            return Err(Error::InvalidParameter(
                "ramp duration and tau must be positive, quench duration nonnegative".into(),
            ));
        }
        if !(self.ramp_target >= 1.0) || !(self.quench_target >= 1.0) {
            return Err(Error::InvalidParameter("pump targets must be at least the critical power".into()));
        }
        Ok(())
    }

    pub fn t_ramp_s(&self) -> f64 {
        self.t_ramp_ms * 1e-3
    }

    pub fn t_quench_s(&self) -> f64 {
        self.t_quench_us * 1e-6
    }

    pub fn total_s(&self) -> f64 {
        self.t_ramp_s() + self.t_quench_s()
    }

    /// Ω²(t)/Ω_c² at time `t` (s); right-continuous at the quench.
    pub fn omega_sq_ratio(&self, t: f64) -> f64 {
        let tr = self.t_ramp_s();
        if t <= 0.0 {
            return 0.0;
        }
        if t > tr {
            return self.quench_target;
        }
        let x = t / tr;
        let k = 1.0 / self.tau_fraction;
        // (e^{kx} − 1)/(e^k − 1), linear in the τ → ∞ limit.
        let shape = if k < 1e-8 { x } else { (k * x).exp_m1() / k.exp_m1() };
        self.ramp_target * shape
    }
}
