//! `analyze` subcommands: plot-ready replica statistics.

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

use glasscav::analysis::{
    cluster_replicas, k_correlator, magnetization_stats, overlap_distribution, overlap_distribution_bootstrap,
    overlap_matrix, parisi_distribution, parisi_function, shannon_entropy_jackknife, Histogram, Linkage,
    OverlapMatrix, ParisiFunction,
};
use glasscav::dynamics::{binarize_ensemble, random_sign_ensemble, ReplicaEnsemble};
use glasscav::io::{read_ensemble, read_histogram, write_ensemble, write_histogram, write_matrix_csv, write_overlap_csv};

use crate::config::{AnalysisConfig, ExperimentConfig};
use crate::{write_json, Invalid, Run};

/// Overrides for the analysis section of a config.
#[derive(Args, Debug)]
pub struct Toggles {
    /// Config whose `analysis` section supplies the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Histogram bins on [-1, 1].
    #[arg(long)]
    bins: Option<usize>,
    /// Keep P(q) and P(-q) separate.
    #[arg(long)]
    no_symmetrize: bool,
    /// Use sign(s) instead of amplitudes.
    #[arg(long)]
    binarize: bool,
    /// Bootstrap resamples for standard errors (0 disables them).
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    boot_seed: Option<u64>,
}

impl Toggles {
    fn resolve(&self, run: &mut Run) -> Result<AnalysisConfig> {
        let mut c = match &self.config {
            Some(p) => run.config(p)?.analysis,
            None => ExperimentConfig::default().analysis,
        };
        if let Some(b) = self.bins {
            c.bins = b;
        }
        c.symmetrize &= !self.no_symmetrize;
        c.binarize |= self.binarize;
        if let Some(n) = self.n_boot {
            c.n_boot = n;
        }
        if let Some(s) = self.boot_seed {
            c.boot_seed = s;
        }
        if c.bins == 0 {
            bail!(Invalid("histogram needs at least one bin".into()));
        }
        run.seed(c.boot_seed);
        Ok(c)
    }
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Overlap matrix and overlap distribution P(q) of one ensemble.
    Overlap {
        #[arg(long)]
        ensemble: PathBuf,
        #[command(flatten)]
        toggles: Toggles,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disorder-averaged P(q) over realizations, q(x) and its fit, with and
    /// without binarization.
    Parisi {
        #[arg(long, num_args = 2.., required = true)]
        ensembles: Vec<PathBuf>,
        /// Points at which q(x) is sampled.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        toggles: Toggles,
        #[arg(long)]
        out: PathBuf,
    },
    /// q(x) and its fit from an overlap histogram CSV.
    Qx {
        #[arg(long)]
        histogram: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ultrametricity correlator K over replica triples.
    Kcorr {
        #[arg(long, required_unless_present = "paramagnet", conflicts_with = "paramagnet")]
        ensemble: Option<PathBuf>,
        /// Use i.i.d. random sign configurations as the ensemble.
        #[arg(long)]
        paramagnet: bool,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        n_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        toggles: Toggles,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hierarchical clustering of replicas on overlap distances.
    Cluster {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, value_parser = parse_linkage)]
        linkage: Option<Linkage>,
        /// Distances 1 - q instead of 1 - |q|.
        #[arg(long)]
        signed: bool,
        #[command(flatten)]
        toggles: Toggles,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shannon entropy of sign patterns (plug-in and jackknife), one row per ensemble.
    Entropy {
        #[arg(long, num_args = 1.., required = true)]
        ensembles: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Magnetization distribution.
    Magnetization {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_linkage(s: &str) -> std::result::Result<Linkage, String> {
    match s {
        "single" => Ok(Linkage::Single),
        "complete" => Ok(Linkage::Complete),
        "average" => Ok(Linkage::Average),
        _ => Err(format!("unknown linkage {s:?} (single, complete, average)")),
    }
}

impl AnalyzeCommand {
    pub fn out(&self) -> &Path {
        match self {
            Self::Overlap { out, .. }
            | Self::Parisi { out, .. }
            | Self::Qx { out, .. }
            | Self::Kcorr { out, .. }
            | Self::Cluster { out, .. }
            | Self::Entropy { out, .. }
            | Self::Magnetization { out, .. } => out,
        }
    }
}

fn load(run: &mut Run, path: &Path, binarize: bool) -> Result<ReplicaEnsemble> {
    run.input(path)?;
    let e = read_ensemble(path)?;
    Ok(if binarize { binarize_ensemble(&e) } else { e })
}

fn distribution(q: &OverlapMatrix, c: &AnalysisConfig) -> Result<Histogram> {
    Ok(if c.n_boot > 0 {
        overlap_distribution_bootstrap(q, c.bins, c.symmetrize, c.n_boot, c.boot_seed)?
    } else {
        overlap_distribution(q, c.bins, c.symmetrize)?
    })
}

#[derive(Serialize)]
struct OverlapSummary {
    n_reps: usize,
    n_spins: usize,
    binarized: bool,
    symmetrized: bool,
    /// Fraction of pair overlaps with |q| above 0.8.
    abs_mass_above_0_8: f64,
    mean_abs_q: f64,
}

fn write_qx(run: &mut Run, suffix: &str, f: &ParisiFunction) -> Result<()> {
    let rows = f.x.iter().zip(&f.q).map(|(&x, &q)| vec![x, q, f.fit.as_ref().map_or(f64::NAN, |fit| fit.eval(x))]);
    let path = run.output(&format!("qx{suffix}.csv"));
    write_table(&path, &["x", "q", "q_fit"], rows)?;
    write_json(run, &format!("parisi_fit{suffix}.json"), f)
}

/// Numeric CSV with a header row.
fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn execute(cmd: &AnalyzeCommand, run: &mut Run) -> Result<()> {
    match cmd {
        AnalyzeCommand::Overlap { ensemble, toggles, .. } => {
            let c = toggles.resolve(run)?;
            let e = load(run, ensemble, c.binarize)?;
            let q = overlap_matrix(&e)?;
            let h = distribution(&q, &c)?;
            write_overlap_csv(&run.output("overlap.csv"), &q)?;
            write_histogram(&run.output("histogram.csv"), &h)?;
            let pairs = q.pairs();
            let summary = OverlapSummary {
                n_reps: e.n_reps(),
                n_spins: e.n_spins(),
                binarized: c.binarize,
                symmetrized: c.symmetrize,
                abs_mass_above_0_8: pairs.iter().filter(|v| v.abs() > 0.8).count() as f64 / pairs.len() as f64,
                mean_abs_q: pairs.iter().map(|v| v.abs()).sum::<f64>() / pairs.len() as f64,
            };
            write_json(run, "summary.json", &summary)
        }
        AnalyzeCommand::Parisi { ensembles, samples, toggles, .. } => {
            let c = toggles.resolve(run)?;
            let samples = samples.unwrap_or(c.parisi_samples);
            let raw = ensembles.iter().map(|p| load(run, p, false)).collect::<Result<Vec<_>>>()?;
            for (binarized, suffix) in [(false, ""), (true, "_binarized")] {
                let hists = raw
                    .iter()
                    .map(|e| {
                        let e = if binarized { binarize_ensemble(e) } else { e.clone() };
                        Ok(overlap_distribution(&overlap_matrix(&e)?, c.bins, c.symmetrize)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let avg = parisi_distribution(&hists, c.n_boot, c.boot_seed)?;
                write_histogram(&run.output(&format!("parisi{suffix}.csv")), &avg)?;
                write_qx(run, suffix, &parisi_function(&avg, samples)?)?;
            }
            Ok(())
        }
        AnalyzeCommand::Qx { histogram, samples, .. } => {
            run.input(histogram)?;
            let h = read_histogram(histogram)?;
            write_qx(run, "", &parisi_function(&h, *samples)?)
        }
        AnalyzeCommand::Kcorr { ensemble, paramagnet, n, n_reps, seed, toggles, .. } => {
            let c = toggles.resolve(run)?;
            let e = if *paramagnet {
                run.seed(*seed);
                let e = random_sign_ensemble(*n, *n_reps, *seed)?;
                write_ensemble(&run.output_with_sidecar("ensemble.csv"), &e, serde_json::json!({ "paramagnet": { "seed": seed } }))?;
                e
            } else {
                load(run, ensemble.as_ref().expect("clap requires one source"), c.binarize)?
            };
            let k = k_correlator(&overlap_matrix(&e)?)?;
            write_histogram(&run.output("kcorr.csv"), &k.histogram)?;
            write_json(
                run,
                "summary.json",
                &serde_json::json!({ "n_reps": e.n_reps(), "mean": k.mean, "fwhm": k.fwhm, "triples": k.triples }),
            )
        }
        AnalyzeCommand::Cluster { ensemble, linkage, signed, toggles, .. } => {
            let c = toggles.resolve(run)?;
            let e = load(run, ensemble, c.binarize)?;
            let q = overlap_matrix(&e)?;
            let linkage = linkage.unwrap_or(c.linkage);
            let abs = !(*signed || c.signed_distance);
            let d = cluster_replicas(&q, linkage, abs)?;
            write_json(run, "dendrogram.json", &d)?;
            write_table(&run.output("order.csv"), &["replica"], d.order.iter().map(|&k| vec![k as f64]))?;
            let ordered = d.order.iter().map(|&a| d.order.iter().map(|&b| q.q[(a, b)]).collect());
            write_matrix_csv(&run.output("overlap_ordered.csv"), ordered)?;
            Ok(())
        }
        AnalyzeCommand::Entropy { ensembles, .. } => {
            let path = run.output("entropy.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["ensemble", "t_ramp_ms", "n_reps", "classes", "plug_in", "jackknife"])?;
            for p in ensembles {
                let e = load(run, p, false)?;
                let h = shannon_entropy_jackknife(&e)?;
                let t = e.configs[0].t_ramp_ms;
                w.write_record([
                    p.display().to_string(),
                    if t.is_finite() { t.to_string() } else { String::new() },
                    e.n_reps().to_string(),
                    h.classes.to_string(),
                    h.plug_in.to_string(),
                    h.jackknife.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        AnalyzeCommand::Magnetization { ensemble, .. } => {
            let e = load(run, ensemble, false)?;
            let m = magnetization_stats(&e);
            write_histogram(&run.output("histogram.csv"), &m.histogram)?;
            write_json(run, "summary.json", &m)
        }
    }
}
