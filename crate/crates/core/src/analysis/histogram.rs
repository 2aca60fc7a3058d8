use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normalized histogram on equal-width bins over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_centers: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Histogram {
    /// Normalizes per-bin weights; an all-zero input yields all-zero
    /// probabilities.
    pub fn from_weights(lo: f64, hi: f64, weights: &[f64]) -> Self {
        let bins = weights.len();
        let width = (hi - lo) / bins as f64;
        let total: f64 = weights.iter().sum();
        Self {
            lo,
            hi,
            bin_centers: (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect(),
            probabilities: weights.iter().map(|w| if total > 0.0 { w / total } else { 0.0 }).collect(),
            stderr: vec![0.0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.bin_centers.len()
    }

    /// Bin of `v` with the top edge included in the last bin.
    pub fn index(lo: f64, hi: f64, bins: usize, v: f64) -> usize {
        let k = ((v - lo) / (hi - lo) * bins as f64).floor();
        (k.max(0.0) as usize).min(bins - 1)
    }

    pub fn same_binning(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.bins() == other.bins()
    }

    pub fn check_binning(&self, other: &Self) -> Result<()> {
        if self.same_binning(other) {
            Ok(())
        } else {
            Err(Error::BinningMismatch(format!(
                "[{}, {}] with {} bins vs [{}, {}] with {} bins",
                self.lo,
                self.hi,
                self.bins(),
                other.lo,
                other.hi,
                other.bins()
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        self.bin_centers.iter().zip(&self.probabilities).map(|(c, p)| c * p).sum()
    }

    /// Probability mass in bins whose center satisfies |c| > `q`.
    pub fn abs_mass_above(&self, q: f64) -> f64 {
        self.bin_centers.iter().zip(&self.probabilities).filter(|(c, _)| c.abs() > q).map(|(_, p)| p).sum()
    }
}
