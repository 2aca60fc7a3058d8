//! `image` subcommands: synthetic emitted-field images, symmetry averaging
//! and spin reconstruction.

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use glasscav::coupling::{CouplingMatrix, SpinSite};
use glasscav::imaging::{fit_spins, local_spin_map, synthesize_field, FitOptions, ImagingGrid, NoiseSpec};
use glasscav::io::{read_coupling, read_ensemble, read_json};
use glasscav::optics::{calibrate_center_waist, symmetry_average, CalibrationOptions, ComplexFieldImage};

use crate::{write_json, Invalid, Run};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Coupling matrix CSV; its sidecar supplies the sites and geometry.
    #[arg(long)]
    j: PathBuf,
    /// Ensemble to take the spins from.
    #[arg(long, required_unless_present = "spins", conflicts_with = "spins")]
    ensemble: Option<PathBuf>,
    /// Replica index within the ensemble.
    #[arg(long, default_value_t = 0)]
    replica: usize,
    /// Explicit spin amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    spins: Option<Vec<f64>>,
    /// Add complex Gaussian noise at this signal-to-noise ratio (dB).
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Grid size in pixels.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Field prefactor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SymavgArgs {
    #[arg(long)]
    image: PathBuf,
    /// Coupling matrix whose sidecar supplies the geometry (default: the 4/7 cavity).
    #[arg(long)]
    j: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    image: PathBuf,
    /// Coupling matrix CSV; its sidecar supplies the initial sites and geometry.
    #[arg(long)]
    j: PathBuf,
    /// Trust the image's recorded center and waist.
    #[arg(long)]
    no_calibrate: bool,
    /// Fit the raw image instead of its symmetry average.
    #[arg(long)]
    no_symavg: bool,
    /// Ground truth written by `image synth`; adds a comparison report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Known field prefactor (default: the truth's, else spins are unit-normalized).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ImageCommand {
    /// Synthesize the emitted field of a spin configuration.
    Synth(SynthArgs),
    /// Project an image onto the cavity's symmetry family.
    Symavg(SymavgArgs),
    /// Calibrate, symmetry-average and fit spins to an image.
    Fit(FitArgs),
}

impl ImageCommand {
    pub fn out(&self) -> &Path {
        match self {
            Self::Synth(a) => &a.out,
            Self::Symavg(a) => &a.out,
            Self::Fit(a) => &a.out,
        }
    }
}

/// Ground truth of a synthesized image.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truth {
    pub spins: Vec<f64>,
    pub scale: f64,
    pub sites: Vec<SpinSite>,
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

#[derive(Serialize)]
struct Report {
    n: usize,
    /// Fraction of sites whose recovered sign matches the truth.
    sign_agreement: f64,
    /// RMS spin error relative to the RMS true spin.
    amplitude_rms_rel: f64,
    residual: f64,
}

fn coupling_with_sites(run: &mut Run, path: &Path) -> Result<CouplingMatrix> {
    run.input(path)?;
    let jm = read_coupling(path)?;
    if jm.sites.is_empty() {
        bail!(Invalid(format!("{}: no sidecar with site positions", path.display())));
    }
    Ok(jm)
}

fn load_image(run: &mut Run, path: &Path) -> Result<ComplexFieldImage> {
    run.input(path)?;
    Ok(ComplexFieldImage::read_binary(path)?)
}

pub fn execute(cmd: &ImageCommand, run: &mut Run) -> Result<()> {
    match cmd {
        ImageCommand::Synth(a) => synth(a, run),
        ImageCommand::Symavg(a) => {
            let img = load_image(run, &a.image)?;
            let geom = match &a.j {
                Some(p) => {
                    run.input(p)?;
                    read_coupling(p)?.geom
                }
                None => glasscav::optics::CavityGeometry::four_seven(),
            };
            let avg = symmetry_average(&img, &geom)?;
            avg.write_binary(&run.output("field.bin"))?;
            let summary = serde_json::json!({
                "power_in": img.power(),
                "power_out": avg.power(),
                "relative_change": avg.relative_l2(&img),
            });
            write_json(run, "summary.json", &summary)
        }
        ImageCommand::Fit(a) => fit(a, run),
    }
}

fn synth(a: &SynthArgs, run: &mut Run) -> Result<()> {
    let jm = coupling_with_sites(run, &a.j)?;
    let spins = match (&a.ensemble, &a.spins) {
        (_, Some(s)) => s.clone(),
        (Some(p), None) => {
            run.input(p)?;
            let e = read_ensemble(p)?;
            match e.configs.get(a.replica) {
                Some(c) => c.s.clone(),
                None => bail!(Invalid(format!("--replica {} out of range ({} replicas)", a.replica, e.n_reps()))),
            }
        }
        (None, None) => unreachable!("clap requires a spin source"),
    };
    if spins.len() != jm.n() {
        bail!(Invalid(format!("{} spins for {} sites", spins.len(), jm.n())));
    }
    let grid = ImagingGrid::balanced(a.size);
    let noise = a.snr_db.map(|snr_db| NoiseSpec { snr_db, seed: a.noise_seed });
    if noise.is_some() {
        run.seed(a.noise_seed);
    }
    let img = synthesize_field(&spins, &jm.sites, &jm.geom, &grid, a.scale, noise)?;
    img.write_binary(&run.output("field.bin"))?;
    let truth = Truth { spins, scale: a.scale, sites: jm.sites.clone(), snr_db: a.snr_db, noise_seed: a.noise_seed };
    write_json(run, "truth.json", &truth)
}

fn fit(a: &FitArgs, run: &mut Run) -> Result<()> {
    let jm = coupling_with_sites(run, &a.j)?;
    let mut img = load_image(run, &a.image)?;
    if !(img.power() > 0.0) {
        return Err(glasscav::Error::DegenerateImage(format!("{}: image has no power", a.image.display())).into());
    }
    let truth: Option<Truth> = match &a.truth {
        Some(p) => {
            run.input(p)?;
            Some(read_json(p)?)
        }
        None => None,
    };
    if !a.no_calibrate {
        let cal = calibrate_center_waist(&img, &jm.geom, &CalibrationOptions::default())?;
        img.center = (cal.x_c, cal.y_c);
        img.w0_px = cal.w0_px;
        img.pixel_pitch = jm.geom.w0_um / cal.w0_px;
        write_json(run, "calibration.json", &cal)?;
    }
    if !a.no_symavg {
        img = symmetry_average(&img, &jm.geom)?;
    }
    let opts = FitOptions { amplitude_scale: a.scale.or(truth.as_ref().map(|t| t.scale)), ..FitOptions::default() };
    let result = fit_spins(&img, &jm.sites, &jm.geom, &opts)?;
    write_json(run, "fit.json", &result)?;
    let spins = run.output("spins.csv");
    let mut w = csv::Writer::from_path(&spins)?;
    w.write_record(["site", "s", "x_um", "y_um"])?;
    for (k, (s, site)) in result.s.iter().zip(&result.sites).enumerate() {
        w.write_record([k.to_string(), s.to_string(), site.position[0].to_string(), site.position[1].to_string()])?;
    }
    w.flush()?;
    local_spin_map(&img, &result, &jm.geom)?.write_binary(&run.output("local_map.bin"))?;
    if let Some(t) = truth {
        if t.spins.len() != result.s.len() {
            bail!(Invalid(format!("truth has {} spins, fit has {}", t.spins.len(), result.s.len())));
        }
        let n = t.spins.len();
        let truth_s: Vec<f64> = if opts.amplitude_scale.is_some() {
            t.spins.clone()
        } else {
            let norm = t.spins.iter().map(|x| x * x).sum::<f64>().sqrt();
            t.spins.iter().map(|x| x / norm).collect()
        };
        let agree = result.s.iter().zip(&truth_s).filter(|(f, t)| f.signum() == t.signum()).count();
        let err = result.s.iter().zip(&truth_s).map(|(f, t)| (f - t).powi(2)).sum::<f64>();
        let norm = truth_s.iter().map(|t| t * t).sum::<f64>();
        let report = Report {
            n,
            sign_agreement: agree as f64 / n as f64,
            amplitude_rms_rel: (err / norm).sqrt(),
            residual: result.residual,
        };
        write_json(run, "report.json", &report)?;
    }
    Ok(())
}
