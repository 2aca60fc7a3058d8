//! Experiment configuration. Dimensioned scalars are strings carrying their
//! unit, e.g. `"34.8 um"`, `"10 ms"`, `"-20 MHz"`. Frequencies given in Hz,
//! kHz, MHz or GHz are ordinary frequencies and are multiplied by 2π; values
//! in `rad/s` are taken as angular frequencies.

use anyhow::{anyhow, bail, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use glasscav::analysis::Linkage;
use glasscav::coupling::{
    j1_fixture, sample_positions, DensityProfile, PhysicalParams, PositionConstraints, PositionGroup,
    QuadratureConfig, SpinSite,
};
use glasscav::dynamics::{Engine, RampSchedule};
use glasscav::optics::{CavityGeometry, Q0Parity};

use crate::Invalid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Dim {
    Length,
    Time,
    Frequency,
}

/// Parses `"<value> <unit>"` into SI (m, s, rad/s).
pub(crate) fn quantity(text: &str, dim: Dim, field: &str) -> Result<f64> {
    let t = text.trim();
    let split = t
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .filter(|&k| k > 0)
        .ok_or_else(|| anyhow!(Invalid(format!("{field}: expected \"<value> <unit>\", got {t:?}"))))?;
    let (v, unit) = (t[..split].trim(), t[split..].trim());
    let value: f64 = v.parse().map_err(|_| anyhow!(Invalid(format!("{field}: {v:?} is not a number"))))?;
    let scale = match (dim, unit) {
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "um" | "µm" | "μm") => 1e-6,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Time, "s") => 1.0,
        (Dim::Time, "ms") => 1e-3,
        (Dim::Time, "us" | "µs" | "μs") => 1e-6,
        (Dim::Frequency, "rad/s") => 1.0,
        (Dim::Frequency, "Hz") => 2.0 * PI,
        (Dim::Frequency, "kHz") => 2.0 * PI * 1e3,
        (Dim::Frequency, "MHz") => 2.0 * PI * 1e6,
        (Dim::Frequency, "GHz") => 2.0 * PI * 1e9,
        _ => bail!(Invalid(format!("{field}: unit {unit:?} is not a {dim:?} unit"))),
    };
    Ok(value * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub m: u32,
    pub n: u32,
    pub q0_parity: Q0Parity,
    pub eta: u32,
    pub w0: String,
    pub mirror_radius: String,
    pub phi: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { m: 4, n: 7, q0_parity: Q0Parity::Odd, eta: 0, w0: "34.8 um".into(), mirror_radius: "1 cm".into(), phi: 0.0 }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<CavityGeometry> {
        let w0 = quantity(&self.w0, Dim::Length, "geometry.w0")?;
        let r = quantity(&self.mirror_radius, Dim::Length, "geometry.mirror_radius")?;
        Ok(CavityGeometry::new(self.m, self.n, self.q0_parity, self.eta, w0 * 1e6, r * 1e2, self.phi)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub n_atoms: f64,
    pub g0: String,
    pub kappa: String,
    pub delta_a: String,
    pub delta_c: String,
    /// Recoil energy as a frequency E_r/h; omitted means ⁸⁷Rb at the pump wavelength.
    pub recoil: Option<String>,
    pub pump_wavelength: String,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            n_atoms: 6e4,
            g0: "1.35 MHz".into(),
            kappa: "140 kHz".into(),
            delta_a: "-97.2 GHz".into(),
            delta_c: "-20 MHz".into(),
            recoil: None,
            pump_wavelength: "780 nm".into(),
        }
    }
}

impl PhysicsConfig {
    pub fn build(&self) -> Result<PhysicalParams> {
        let base = PhysicalParams::default();
        let lambda = quantity(&self.pump_wavelength, Dim::Length, "physics.pump_wavelength")?;
        let e_r = match &self.recoil {
            Some(r) => quantity(r, Dim::Frequency, "physics.recoil")?,
            None => base.e_r * (base.lambda_pump / lambda).powi(2),
        };
        let p = PhysicalParams {
            n_atoms: self.n_atoms,
            g0: quantity(&self.g0, Dim::Frequency, "physics.g0")?,
            kappa: quantity(&self.kappa, Dim::Frequency, "physics.kappa")?,
            delta_a: quantity(&self.delta_a, Dim::Frequency, "physics.delta_a")?,
            delta_c: quantity(&self.delta_c, Dim::Frequency, "physics.delta_c")?,
            e_r,
            omega_z: 2.0 * e_r,
            lambda_pump: lambda,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub t_ramp: String,
    pub t_quench: String,
    pub ramp_target: f64,
    pub quench_target: f64,
    pub tau_fraction: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let d = RampSchedule::default();
        Self {
            t_ramp: format!("{} ms", d.t_ramp_ms),
            t_quench: format!("{} us", d.t_quench_us),
            ramp_target: d.ramp_target,
            quench_target: d.quench_target,
            tau_fraction: d.tau_fraction,
        }
    }
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<RampSchedule> {
        let s = RampSchedule {
            t_ramp_ms: quantity(&self.t_ramp, Dim::Time, "schedule.t_ramp")? * 1e3,
            t_quench_us: quantity(&self.t_quench, Dim::Time, "schedule.t_quench")? * 1e6,
            ramp_target: self.ramp_target,
            quench_target: self.quench_target,
            tau_fraction: self.tau_fraction,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Where the spins sit. Explicit positions are in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SitesConfig {
    /// The published J1 layout.
    Fixture(String),
    /// A trap-array group with randomized positions.
    Group {
        group: PositionGroup,
        seed: u64,
        #[serde(default)]
        constraints: Option<PositionConstraints>,
        #[serde(default)]
        density: Option<DensityProfile>,
    },
    Explicit(Vec<SpinSite>),
}

impl Default for SitesConfig {
    fn default() -> Self {
        SitesConfig::Fixture("j1".into())
    }
}

impl SitesConfig {
    pub fn build(&self) -> Result<Vec<SpinSite>> {
        match self {
            SitesConfig::Fixture(name) if name == "j1" => Ok(j1_fixture()),
            SitesConfig::Fixture(name) => bail!(Invalid(format!("sites.fixture: unknown fixture {name:?}"))),
            SitesConfig::Group { group, seed, constraints, density } => Ok(sample_positions(
                &group.params(),
                &constraints.unwrap_or_default(),
                density.unwrap_or_default(),
                *seed,
            )?),
            SitesConfig::Explicit(sites) => {
                if sites.is_empty() {
                    bail!(Invalid("sites.explicit: no sites".into()));
                }
                for s in sites {
                    s.density.validate()?;
                }
                Ok(sites.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    /// Gaussian-density overlap integrals against the family Green's function.
    Assembled {
        #[serde(default)]
        quadrature: QuadratureConfig,
        #[serde(default = "yes")]
        include_local: bool,
    },
    /// Point sources, nonlocal part only (N = 7 cavities).
    PointSource,
}

fn yes() -> bool {
    true
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig::Assembled { quadrature: QuadratureConfig::default(), include_local: true }
    }
}

/// Defaults for the `analyze` commands; command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub bins: usize,
    pub symmetrize: bool,
    /// Replace amplitudes by signs before computing overlaps.
    pub binarize: bool,
    pub n_boot: usize,
    pub boot_seed: u64,
    pub linkage: Linkage,
    /// Cluster on 1 − q instead of 1 − |q|.
    pub signed_distance: bool,
    /// Points at which q(x) is sampled.
    pub parisi_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bins: 50,
            symmetrize: true,
            binarize: false,
            n_boot: 1000,
            boot_seed: 0,
            linkage: Linkage::Average,
            signed_distance: false,
            parisi_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub sites: SitesConfig,
    pub coupling: CouplingConfig,
    pub schedule: ScheduleConfig,
    pub engine: Engine,
    /// Replicas per run; omitted means the size-dependent default.
    pub n_reps: Option<usize>,
    pub seed: u64,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    /// Parses a JSON config, reporting the path of the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| anyhow!(Invalid(format!("config field `{}`: {}", e.path(), e.inner()))))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow!(Invalid(format!("{}: {e}", path.display()))))?;
        Self::parse(&text).map_err(|e| anyhow!(Invalid(format!("{}: {e}", path.display()))))
    }
}
