use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descent::{descend, DescentOptions};
use super::schedule::RampSchedule;
use super::semiclassical::{integrate_semiclassical, SemiclassicalOptions};
use crate::coupling::{CouplingMatrix, PhysicalParams};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Engine {
    Semiclassical(SemiclassicalOptions),
    Descent(DescentOptions),
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Semiclassical(SemiclassicalOptions::default())
    }
}

/// One replica: unit-norm spin amplitudes s_i ∝ ⟨S_i^x⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinConfiguration {
    pub s: Vec<f64>,
    pub raw_amplitudes: Vec<f64>,
    pub seed: u64,
    pub t_ramp_ms: f64,
}

impl SpinConfiguration {
    /// Normalizes `raw` to unit length.
    pub fn from_raw(raw: Vec<f64>, seed: u64, t_ramp_ms: f64) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("spin configuration has no spins".into()));
        }
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter("spin configuration has zero or non-finite norm".into()));
        }
        let s = raw.iter().map(|x| x / norm).collect();
        Ok(Self { s, raw_amplitudes: raw, seed, t_ramp_ms })
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }
}

/// Replicas of one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaEnsemble {
    pub configs: Vec<SpinConfiguration>,
    /// Fingerprint of the coupling matrix the replicas were generated from.
    pub j_ref: String,
}

impl ReplicaEnsemble {
    pub fn new(configs: Vec<SpinConfiguration>, j_ref: String) -> Result<Self> {
        let n = configs.first().map(|c| c.n()).ok_or_else(|| Error::EmptyInput("ensemble has no replicas".into()))?;
        if let Some(bad) = configs.iter().find(|c| c.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
        }
        Ok(Self { configs, j_ref })
    }

    /// Builds an ensemble from raw rows, normalizing each to unit length.
    pub fn from_rows(rows: Vec<Vec<f64>>, j_ref: String) -> Result<Self> {
        let configs = rows
            .into_iter()
            .enumerate()
            .map(|(k, r)| SpinConfiguration::from_raw(r, k as u64, f64::NAN))
            .collect::<Result<Vec<_>>>()?;
        Self::new(configs, j_ref)
    }

    pub fn n_reps(&self) -> usize {
        self.configs.len()
    }

    pub fn n_spins(&self) -> usize {
        self.configs[0].n()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.configs.iter().map(|c| c.s.as_slice())
    }

    /// Sub-ensemble with the given replica indices (repeats allowed).
    pub fn select(&self, idx: &[usize]) -> Self {
        Self { configs: idx.iter().map(|&k| self.configs[k].clone()).collect(), j_ref: self.j_ref.clone() }
    }
}

/// Replica count used for a system of `n` spins.
pub fn default_replica_count(n: usize) -> usize {
    match n {
        0..=11 => 100,
        12..=15 => 150,
        _ => 200,
    }
}

/// s_i → sign(s_i)/√n, with sign(0) = +1.
pub fn binarize(c: &SpinConfiguration) -> SpinConfiguration {
    let v = 1.0 / (c.n() as f64).sqrt();
    let s = c.s.iter().map(|&x| if x < 0.0 { -v } else { v }).collect();
    SpinConfiguration { s, ..c.clone() }
}

pub fn binarize_ensemble(e: &ReplicaEnsemble) -> ReplicaEnsemble {
    ReplicaEnsemble { configs: e.configs.iter().map(binarize).collect(), j_ref: e.j_ref.clone() }
}

/// Runs one replica from the noise realization determined by `seed`.
pub fn evolve_replica(
    jm: &CouplingMatrix,
    phys: &PhysicalParams,
    schedule: &RampSchedule,
    engine: &Engine,
    seed: u64,
) -> Result<SpinConfiguration> {
    let n = jm.n();
    let mut rng = rng::seeded(seed);
    let raw = match engine {
        Engine::Semiclassical(opts) => {
            let normal = Normal::new(0.0, opts.epsilon)
                .map_err(|e| Error::InvalidParameter(format!("noise amplitude {}: {e}", opts.epsilon)))?;
            let xi: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            integrate_semiclassical(&jm.j, jm.lambda_max(), phys, schedule, &xi, opts)?.mx()
        }
        Engine::Descent(opts) => {
            let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            descend(&jm.j, &start, opts)?.s
        }
    };
    SpinConfiguration::from_raw(raw, seed, schedule.t_ramp_ms)
        .map_err(|_| Error::Integrator { t: schedule.total_s(), reason: "no symmetry breaking: all amplitudes vanish".into() })
}

/// Paramagnetic baseline: `n_reps` i.i.d. uniformly random sign patterns.
pub fn random_sign_ensemble(n: usize, n_reps: usize, seed: u64) -> Result<ReplicaEnsemble> {
    if n == 0 || n_reps < 2 {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and at least 2 replicas, got n = {n}, {n_reps} replicas")));
    }
    let mut rng = rng::seeded(seed);
    let v = 1.0 / (n as f64).sqrt();
    let configs = (0..n_reps)
        .map(|k| {
            let s: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { v } else { -v }).collect();
            SpinConfiguration::from_raw(s, k as u64, f64::NAN)
        })
        .collect::<Result<Vec<_>>>()?;
    ReplicaEnsemble::new(configs, "paramagnet".into())
}

/// `n_reps` replicas with seeds `base_seed + k`, evaluated in parallel.
pub fn generate_ensemble(
    jm: &CouplingMatrix,
    phys: &PhysicalParams,
    schedule: &RampSchedule,
    engine: &Engine,
    n_reps: usize,
    base_seed: u64,
) -> Result<ReplicaEnsemble> {
    if n_reps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replicas, got {n_reps}")));
    }
    let configs = (0..n_reps)
        .into_par_iter()
        .map(|k| {
            evolve_replica(jm, phys, schedule, engine, base_seed.wrapping_add(k as u64))
                .map_err(|e| Error::Replica { index: k, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    ReplicaEnsemble::new(configs, jm.fingerprint())
}
