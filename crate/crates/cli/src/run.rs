//! Generation commands: coupling matrices, replicas and random-matrix sweeps.

use anyhow::{anyhow, bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

use glasscav::coupling::{assemble_j, critical_pump, point_source_j};
use glasscav::dynamics::{default_replica_count, generate_ensemble, DescentOptions, Engine, SemiclassicalOptions};
use glasscav::io::{read_coupling, write_coupling, write_ensemble, write_sweep};
use glasscav::optics::CavityGeometry;
use glasscav::randmat::{sweep_w, SweepOptions};

use crate::config::{quantity, CouplingConfig, Dim, ExperimentConfig, SitesConfig};
use crate::{write_json, Invalid, Run};

#[derive(Args, Debug)]
pub struct JmatrixArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct JSummary {
    n: usize,
    fingerprint: String,
    lambda_max: f64,
    /// Critical pump Rabi frequency Ω_c (rad/s); absent when λ_max ≤ 0.
    critical_pump_rad_s: Option<f64>,
    critical_pump_mhz: Option<f64>,
    unconverged_entries: usize,
}

pub fn jmatrix(a: &JmatrixArgs, run: &mut Run) -> Result<()> {
    let cfg = run.config(&a.config)?;
    let geom = cfg.geometry.build()?;
    let phys = cfg.physics.build()?;
    let sites = cfg.sites.build()?;
    if let SitesConfig::Group { seed, .. } = &cfg.sites {
        run.seed(*seed);
    }
    let jm = match &cfg.coupling {
        CouplingConfig::Assembled { quadrature, include_local } => assemble_j(&sites, &geom, quadrature, *include_local)?,
        CouplingConfig::PointSource => point_source_j(&sites, &geom)?,
    };
    if !jm.unconverged.is_empty() {
        eprintln!("warning: {} J entries failed the quadrature refinement check", jm.unconverged.len());
    }
    write_coupling(&run.output_with_sidecar("j.csv"), &jm)?;
    let omega_c = critical_pump(&jm, &phys).ok().map(f64::sqrt);
    let summary = JSummary {
        n: jm.n(),
        fingerprint: jm.fingerprint(),
        lambda_max: jm.lambda_max(),
        critical_pump_rad_s: omega_c,
        critical_pump_mhz: omega_c.map(|w| w / (2.0 * std::f64::consts::PI) / 1e6),
        unconverged_entries: jm.unconverged.len(),
    };
    write_json(run, "summary.json", &summary)?;
    write_json(run, "config.json", &cfg)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EngineKind {
    Semiclassical,
    Descent,
}

#[derive(Args, Debug)]
pub struct ReplicasArgs {
    /// Coupling matrix CSV (sidecar read when present).
    #[arg(long)]
    pub j: PathBuf,
    /// Physics, schedule, engine, replica count and seed; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ramp duration with unit, e.g. `5ms`.
    #[arg(long)]
    pub t_ramp: Option<String>,
    /// Replicas (default: 200, 150 or 100 depending on the system size).
    #[arg(long)]
    pub n_reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineKind>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn replicas(a: &ReplicasArgs, run: &mut Run) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => run.config(p)?,
        None => ExperimentConfig::default(),
    };
    run.input(&a.j)?;
    let jm = read_coupling(&a.j)?;
    let phys = cfg.physics.build()?;
    let mut schedule = cfg.schedule.build()?;
    if let Some(t) = &a.t_ramp {
        schedule.t_ramp_ms = quantity(t, Dim::Time, "--t-ramp")? * 1e3;
        schedule.validate()?;
    }
    let engine = match (a.engine, cfg.engine) {
        (None, e) => e,
        (Some(EngineKind::Semiclassical), e @ Engine::Semiclassical(_)) => e,
        (Some(EngineKind::Descent), e @ Engine::Descent(_)) => e,
        (Some(EngineKind::Semiclassical), _) => Engine::Semiclassical(SemiclassicalOptions::default()),
        (Some(EngineKind::Descent), _) => Engine::Descent(DescentOptions::default()),
    };
    let n_reps = a.n_reps.or(cfg.n_reps).unwrap_or_else(|| default_replica_count(jm.n()));
    if n_reps < 2 {
        bail!(Invalid(format!("--n-reps must be at least 2, got {n_reps}")));
    }
    let seed = a.seed.unwrap_or(cfg.seed);
    run.seed(seed);
    let ens = generate_ensemble(&jm, &phys, &schedule, &engine, n_reps, seed)?;
    let generator = serde_json::json!({
        "engine": engine,
        "schedule": schedule,
        "physics": phys,
        "base_seed": seed,
    });
    write_ensemble(&run.output_with_sidecar("ensemble.csv"), &ens, generator)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct RandmatArgs {
    /// System sizes.
    #[arg(long = "n", num_args = 1.., default_values_t = [16])]
    pub n: Vec<usize>,
    /// Disorder widths in units of the waist (default 0.25, 0.5, ..., 3).
    #[arg(long = "w", num_args = 1..)]
    pub w: Vec<f64>,
    /// Disorder draws per (n, w) cell.
    #[arg(long, default_value_t = 50)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap resamples of the draws for standard errors.
    #[arg(long, default_value_t = 200)]
    pub n_boot: usize,
    /// Geometry source (default: the 4/7 cavity).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn randmat(a: &RandmatArgs, run: &mut Run) -> Result<()> {
    let geom = match &a.config {
        Some(p) => run.config(p)?.geometry.build()?,
        None => CavityGeometry::four_seven(),
    };
    let mut opts = SweepOptions { n_values: a.n.clone(), draws: a.draws, seed: a.seed, n_boot: a.n_boot, ..Default::default() };
    if !a.w.is_empty() {
        opts.w_over_w0 = a.w.clone();
    }
    if opts.n_values.is_empty() {
        return Err(anyhow!(Invalid("--n needs at least one system size".into())));
    }
    run.seed(a.seed);
    let result = sweep_w(&opts, &geom)?;
    write_sweep(&run.output("sweep.csv"), &result)?;
    write_json(run, "sweep.json", &result)
}
