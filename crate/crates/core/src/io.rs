//! File formats: CSV for tabular data with JSON sidecars for provenance.
//!
//! Floats are written in Rust's shortest round-trip form, so a value read
//! back is bit-identical to the value written.

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{Histogram, OverlapMatrix};
use crate::coupling::{CouplingMatrix, QuadratureConfig, SpinSite};
use crate::dynamics::{ReplicaEnsemble, SpinConfiguration};
use crate::optics::CavityGeometry;
use crate::randmat::SweepResult;
use crate::{Error, Result};

fn context(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| context(path, e))
}

/// Path of the JSON sidecar next to a data file: `x.csv` → `x.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

/// Writes numeric rows without a header.
pub fn write_matrix_csv(path: &Path, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads numeric rows. Lines starting with `#` are skipped, as is a first
/// row that does not parse as numbers (a header).
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(context(path, format!("row {}: {e}", k + 1))),
        }
    }
    if let Some(first) = rows.first() {
        let width = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch { expected: width, found: bad.len() });
        }
    }
    Ok(rows)
}

/// Provenance of a coupling matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JSidecar {
    pub n: usize,
    pub geometry: CavityGeometry,
    pub include_local: bool,
    pub quadrature: Option<QuadratureConfig>,
    pub sites: Vec<SpinSite>,
    pub eigenvalues: Vec<f64>,
    pub fingerprint: String,
    pub unconverged: Vec<(usize, usize)>,
}

pub fn write_coupling(path: &Path, jm: &CouplingMatrix) -> Result<()> {
    write_matrix_csv(path, jm.j.row_iter().map(|r| r.iter().copied().collect()))?;
    let side = JSidecar {
        n: jm.n(),
        geometry: jm.geom.clone(),
        include_local: jm.include_local,
        quadrature: jm.quadrature,
        sites: jm.sites.clone(),
        eigenvalues: jm.eigvals.clone(),
        fingerprint: jm.fingerprint(),
        unconverged: jm.unconverged.clone(),
    };
    write_json(&sidecar_path(path), &side)
}

/// Reads a coupling matrix. Without a sidecar the geometry defaults to the
/// 4/7 cavity and the sites are unknown.
pub fn read_coupling(path: &Path) -> Result<CouplingMatrix> {
    let rows = read_matrix_csv(path)?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(context(path, "coupling matrix must be square"));
    }
    let j = DMatrix::from_fn(n, n, |a, b| rows[a][b]);
    let side = sidecar_path(path);
    if side.exists() {
        let s: JSidecar = read_json(&side)?;
        if s.n != n {
            return Err(Error::DimensionMismatch { expected: s.n, found: n });
        }
        let mut jm = CouplingMatrix::from_matrix(j, s.sites, s.geometry, s.include_local, s.quadrature)?;
        jm.unconverged = s.unconverged;
        Ok(jm)
    } else {
        CouplingMatrix::from_matrix(j, Vec::new(), CavityGeometry::four_seven(), false, None)
    }
}

/// Provenance of a replica ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSidecar {
    pub n_spins: usize,
    pub n_reps: usize,
    pub j_ref: String,
    /// Absent for ensembles not produced by a ramp.
    pub t_ramp_ms: Option<f64>,
    pub seeds: Vec<u64>,
    /// Free-form generation settings (engine, schedule, physical parameters).
    pub generator: serde_json::Value,
}

/// Writes unit-norm replica configurations, one row per replica, and the
/// sidecar.
pub fn write_ensemble(path: &Path, ens: &ReplicaEnsemble, generator: serde_json::Value) -> Result<()> {
    write_matrix_csv(path, ens.rows().map(|r| r.to_vec()))?;
    let side = EnsembleSidecar {
        n_spins: ens.n_spins(),
        n_reps: ens.n_reps(),
        j_ref: ens.j_ref.clone(),
        t_ramp_ms: Some(ens.configs[0].t_ramp_ms).filter(|t| t.is_finite()),
        seeds: ens.configs.iter().map(|c| c.seed).collect(),
        generator,
    };
    write_json(&sidecar_path(path), &side)
}

/// Reads an ensemble; rows are normalized to unit length. Seeds and ramp time
/// come from the sidecar when present.
pub fn read_ensemble(path: &Path) -> Result<ReplicaEnsemble> {
    let rows = read_matrix_csv(path)?;
    if rows.is_empty() {
        return Err(context(path, "ensemble has no replicas"));
    }
    let side = sidecar_path(path);
    let meta: Option<EnsembleSidecar> = if side.exists() { Some(read_json(&side)?) } else { None };
    if let Some(m) = &meta {
        if m.n_reps != rows.len() || m.n_spins != rows[0].len() {
            return Err(context(path, format!(
                "sidecar describes {}×{}, file holds {}×{}",
                m.n_reps,
                m.n_spins,
                rows.len(),
                rows[0].len()
            )));
        }
    }
    let configs = rows
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let seed = meta.as_ref().map_or(k as u64, |m| m.seeds[k]);
            let t = meta.as_ref().and_then(|m| m.t_ramp_ms).unwrap_or(f64::NAN);
            SpinConfiguration::from_raw(r, seed, t)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| context(path, e))?;
    ReplicaEnsemble::new(configs, meta.map(|m| m.j_ref).unwrap_or_default())
}

pub fn write_overlap_csv(path: &Path, q: &OverlapMatrix) -> Result<()> {
    write_matrix_csv(path, q.q.row_iter().map(|r| r.iter().copied().collect()))
}

pub fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_center", "probability", "stderr"])?;
    for k in 0..h.bins() {
        w.write_record([h.bin_centers[k].to_string(), h.probabilities[k].to_string(), h.stderr[k].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a histogram written by [`write_histogram`]. Bin edges are inferred
/// from the equally spaced centers.
pub fn read_histogram(path: &Path) -> Result<Histogram> {
    let mut r = csv::Reader::from_path(path)?;
    let (mut c, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let f = |k: usize| -> Result<f64> {
            rec.get(k).ok_or_else(|| context(path, "missing column"))?.trim().parse().map_err(|e| context(path, e))
        };
        c.push(f(0)?);
        p.push(f(1)?);
        s.push(f(2)?);
    }
    if c.len() < 2 {
        return Err(context(path, "histogram needs at least two bins"));
    }
    let width = (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
    let lo = c[0] - width / 2.0;
    let hi = c[c.len() - 1] + width / 2.0;
    // Snap to the canonical overlap range when the centers match it.
    let (lo, hi) = if (lo + 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9 { (-1.0, 1.0) } else { (lo, hi) };
    Ok(Histogram { lo, hi, bin_centers: c, probabilities: p, stderr: s })
}

/// Long-format sweep table: one row per (cell, statistic).
pub fn write_sweep(path: &Path, r: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "w_over_w0", "statistic", "value", "stderr"])?;
    for c in &r.cells {
        for (name, v, e) in [
            ("hellinger", c.hellinger, c.hellinger_stderr),
            ("p_neg", c.p_neg, c.p_neg_stderr),
            ("p_frustrated_triple", c.p_frustrated_triple, c.p_frustrated_triple_stderr),
            ("pearson", c.pearson, c.pearson_stderr),
        ] {
            w.write_record([c.n.to_string(), c.w_over_w0.to_string(), name.to_string(), v.to_string(), e.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
