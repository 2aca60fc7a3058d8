use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use crate::dynamics::ReplicaEnsemble;

/// Distribution of per-replica sign magnetization m = (1/n) Σ sign(s_i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationStats {
    /// One bin per attainable value −1, −1 + 2/n, …, 1.
    pub histogram: Histogram,
    pub values: Vec<f64>,
    pub mean: f64,
    pub mean_abs: f64,
    pub std: f64,
    /// Standard error of the mean.
    pub stderr_mean: f64,
}

pub fn magnetization_stats(ens: &ReplicaEnsemble) -> MagnetizationStats {
    let n = ens.n_spins();
    let values: Vec<f64> = ens
        .rows()
        .map(|r| {
            let down = r.iter().filter(|&&v| v < 0.0).count();
            (n as f64 - 2.0 * down as f64) / n as f64
        })
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / m;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let half = 1.0 / n as f64;
    let mut w = vec![0.0; n + 1];
    for v in &values {
        w[Histogram::index(-1.0 - half, 1.0 + half, n + 1, *v)] += 1.0;
    }
    MagnetizationStats {
        histogram: Histogram::from_weights(-1.0 - half, 1.0 + half, &w),
        values,
        mean,
        mean_abs,
        std,
        stderr_mean: std / m.sqrt(),
    }
}
