//! `glasscav`: command-line driver for the multimode-cavity spin-glass
//! pipeline.
//!
//! Every command writes its outputs and a `manifest.json` into `--out`; the
//! `reproduce` command replays a manifest and checks the output digests.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 runtime or
//! numerical failure.

mod analyze;
mod config;
mod image;
mod manifest;
mod run;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::ExperimentConfig;
use manifest::{sha256_file, unix_now, RunManifest};

/// Invalid input detected by the driver (exit code 1).
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub const THREADS_ENV: &str = "GLASSCAV_THREADS";

#[derive(Parser, Debug)]
#[command(name = "glasscav", version, about = "Multimode-cavity spin-glass simulation pipeline")]
pub struct Cli {
    /// Worker threads (default: all cores). GLASSCAV_THREADS overrides this flag.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble the coupling matrix J of a configured experiment.
    Jmatrix(run::JmatrixArgs),
    /// Generate replicas by ramping the pump across threshold.
    Replicas(run::ReplicasArgs),
    /// Replica statistics.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
    /// Emitted-field images: synthesis, symmetry averaging and spin fits.
    #[command(subcommand)]
    Image(image::ImageCommand),
    /// Random-matrix diagnostics of point-source J ensembles.
    Randmat(run::RandmatArgs),
    /// Replay a run from its manifest and compare output digests.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for the replayed outputs.
    #[arg(long)]
    out: PathBuf,
}

/// Bookkeeping for one command: the output directory and the files read and
/// written, which end up in the manifest.
pub struct Run {
    out: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    config_hash: Option<String>,
    base_seed: Option<u64>,
}

impl Run {
    fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { out: out.to_path_buf(), inputs: BTreeMap::new(), outputs: Vec::new(), config_hash: None, base_seed: None })
    }

    /// Records an input file (and its JSON sidecar, if any).
    pub fn input(&mut self, path: &Path) -> Result<()> {
        if !path.is_file() {
            bail!(Invalid(format!("{}: no such file", path.display())));
        }
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        let side = glasscav::io::sidecar_path(path);
        if side != path && side.is_file() {
            self.inputs.insert(side.display().to_string(), sha256_file(&side)?);
        }
        Ok(())
    }

    pub fn config(&mut self, path: &Path) -> Result<ExperimentConfig> {
        self.input(path)?;
        self.config_hash = Some(sha256_file(path)?);
        ExperimentConfig::load(path)
    }

    pub fn seed(&mut self, seed: u64) {
        self.base_seed = Some(seed);
    }

    /// Path of an output file, registered for the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    /// Output written together with its JSON sidecar.
    pub fn output_with_sidecar(&mut self, name: &str) -> PathBuf {
        let p = self.output(name);
        let side = glasscav::io::sidecar_path(Path::new(name));
        self.outputs.push(side.display().to_string());
        p
    }
}

pub fn write_json<T: serde::Serialize>(run: &mut Run, name: &str, value: &T) -> Result<()> {
    Ok(glasscav::io::write_json(&run.output(name), value)?)
}

fn out_dir(cmd: &Command) -> &Path {
    match cmd {
        Command::Jmatrix(a) => &a.out,
        Command::Replicas(a) => &a.out,
        Command::Analyze(a) => a.out(),
        Command::Image(a) => a.out(),
        Command::Randmat(a) => &a.out,
        Command::Reproduce(a) => &a.out,
    }
}

/// Runs one non-replay command and writes its manifest.
fn execute(cmd: &Command, args: &[String], threads: usize) -> Result<RunManifest> {
    let started_unix = unix_now();
    let mut run = Run::new(out_dir(cmd))?;
    match cmd {
        Command::Jmatrix(a) => run::jmatrix(a, &mut run)?,
        Command::Replicas(a) => run::replicas(a, &mut run)?,
        Command::Analyze(a) => analyze::execute(a, &mut run)?,
        Command::Image(a) => image::execute(a, &mut run)?,
        Command::Randmat(a) => run::randmat(a, &mut run)?,
        Command::Reproduce(_) => unreachable!("replays are not nested"),
    }
    let mut outputs = BTreeMap::new();
    for name in &run.outputs {
        outputs.insert(name.clone(), sha256_file(&run.out.join(name))?);
    }
    let m = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        args: args.to_vec(),
        cwd: std::env::current_dir()?,
        config_hash: run.config_hash,
        base_seed: run.base_seed,
        threads,
        inputs: run.inputs,
        outputs,
        started_unix,
        finished_unix: unix_now(),
    };
    m.write(&run.out)?;
    Ok(m)
}

/// Recorded arguments with `--out` and `--threads` removed.
fn replay_args(args: &[String]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" || a == "--threads" {
            it.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--threads=")) {
            kept.push(a.clone());
        }
    }
    kept
}

fn reproduce(a: &ReproduceArgs, original: &RunManifest) -> Result<()> {
    let stale = original.stale_inputs()?;
    if !stale.is_empty() {
        bail!(Invalid(format!("inputs changed since the recorded run: {}", stale.join(", "))));
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let out = std::fs::canonicalize(&a.out)?;
    let mut args = replay_args(&original.args);
    args.push("--out".into());
    args.push(out.display().to_string());
    std::env::set_current_dir(&original.cwd)
        .with_context(|| format!("entering recorded working directory {}", original.cwd.display()))?;
    let cli = Cli::try_parse_from(std::iter::once("glasscav".to_string()).chain(args.iter().cloned()))
        .map_err(|e| anyhow!(Invalid(format!("recorded arguments no longer parse: {e}"))))?;
    if matches!(cli.command, Command::Reproduce(_)) {
        bail!(Invalid("manifest records a replay".into()));
    }
    let replay = execute(&cli.command, &args, original.threads)?;
    let mut differ = Vec::new();
    for (name, digest) in &original.outputs {
        match replay.outputs.get(name) {
            Some(d) if d == digest => println!("identical  {name}"),
            Some(_) => differ.push(format!("{name} (content)")),
            None => differ.push(format!("{name} (missing)")),
        }
    }
    differ.extend(replay.outputs.keys().filter(|k| !original.outputs.contains_key(*k)).map(|k| format!("{k} (extra)")));
    if !differ.is_empty() {
        bail!("replay differs from the recorded run: {}", differ.join(", "));
    }
    println!("reproduced {} outputs bit-exactly into {}", original.outputs.len(), a.out.display());
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| anyhow!(Invalid(format!("{THREADS_ENV}={v:?} is not a thread count"))))?,
        Err(_) => flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    if n == 0 {
        bail!(Invalid("thread count must be positive".into()));
    }
    Ok(n)
}

fn main_inner(cli: Cli, args: Vec<String>) -> Result<()> {
    let original = match &cli.command {
        Command::Reproduce(a) => Some(RunManifest::read(&a.manifest).map_err(|e| anyhow!(Invalid(format!("{e:#}"))))?),
        _ => None,
    };
    // A replay must use the recorded thread count to be bit-exact.
    let threads = match &original {
        Some(m) => m.threads,
        None => thread_count(cli.threads)?,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    match (&cli.command, &original) {
        (Command::Reproduce(a), Some(m)) => reproduce(a, m),
        (cmd, _) => execute(cmd, &args, threads).map(|_| ()),
    }
}

fn classify(e: &glasscav::Error) -> u8 {
    use glasscav::Error as E;
    match e {
        E::SingularArgument(_)
        | E::UnsupportedGeometry(_)
        | E::InvalidParameter(_)
        | E::DimensionMismatch { .. }
        | E::GridCoverage(_)
        | E::BinningMismatch(_)
        | E::EmptyInput(_)
        | E::Format(_)
        | E::Io(_)
        | E::Csv(_)
        | E::Json(_) => 1,
        _ => 2,
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Invalid>() || cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 1;
        }
        if let Some(g) = cause.downcast_ref::<glasscav::Error>() {
            return classify(g);
        }
    }
    2
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::iter::once("glasscav".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match main_inner(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
