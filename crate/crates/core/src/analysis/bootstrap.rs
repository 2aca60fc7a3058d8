use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::ReplicaEnsemble;
use crate::rng;

/// Replica indices drawn with replacement for resample `b`.
pub(crate) fn resample_indices(n: usize, seed: u64, b: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, b);
    (0..n).map(|_| r.random_range(0..n)).collect()
}

/// Sample standard deviation of each column across rows, computed about the
/// first row so identical rows give exactly zero.
pub(crate) fn column_std(samples: &[Vec<f64>], width: usize) -> Vec<f64> {
    let m = samples.len();
    if m < 2 {
        return vec![0.0; width];
    }
    (0..width)
        .map(|k| {
            let shift = samples[0][k];
            let mean = samples.iter().map(|s| s[k] - shift).sum::<f64>() / m as f64;
            let var = samples.iter().map(|s| (s[k] - shift - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            var.sqrt()
        })
        .collect()
}

/// Bootstrap standard error of each component of `statistic`, resampling
/// replicas with replacement `n_boot` times. Deterministic given `seed`,
/// independent of the thread count.
pub fn bootstrap_errors<F>(ens: &ReplicaEnsemble, statistic: F, n_boot: usize, seed: u64) -> Vec<f64>
where
    F: Fn(&ReplicaEnsemble) -> Vec<f64> + Sync,
{
    let n = ens.n_reps();
    let samples: Vec<Vec<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| statistic(&ens.select(&resample_indices(n, seed, b as u64))))
        .collect();
    let width = samples.first().map_or(0, |s| s.len());
    column_std(&samples, width)
}
