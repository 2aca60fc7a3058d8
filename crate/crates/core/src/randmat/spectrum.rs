use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Eigenvalues of a symmetric matrix, ascending, divided by their standard
/// deviation. The mean is not subtracted.
pub fn eigen_spectrum_normalized(j: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = j.nrows();
    if n < 2 || j.ncols() != n {
        return Err(Error::InvalidParameter(format!("spectrum needs a square matrix with n ≥ 2, got {}×{}", n, j.ncols())));
    }
    let mut ev: Vec<f64> = j.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let mean = ev.iter().sum::<f64>() / n as f64;
    let sd = (ev.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::InvalidParameter("spectrum has zero spread".into()));
    }
    Ok(ev.iter().map(|v| v / sd).collect())
}

/// Cumulative distribution of the semicircle law of radius 2.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// Uniform eigenvalue bins plus one bucket for everything outside them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBins {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for SpectrumBins {
    fn default() -> Self {
        Self { lo: -3.05, hi: 3.05, bins: 61 }
    }
}

impl SpectrumBins {
    /// Counts per bin, with the outside count last.
    pub fn counts(&self, values: &[f64]) -> Vec<u64> {
        let mut c = vec![0u64; self.bins + 1];
        for &v in values {
            let k = if v >= self.lo && v < self.hi {
                (((v - self.lo) / (self.hi - self.lo) * self.bins as f64) as usize).min(self.bins - 1)
            } else {
                self.bins
            };
            c[k] += 1;
        }
        c
    }

    /// Hellinger distance between binned counts and the semicircle law.
    pub fn hellinger(&self, counts: &[u64]) -> Result<f64> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyInput("empty spectrum".into()));
        }
        let width = (self.hi - self.lo) / self.bins as f64;
        let mut h2 = 0.0;
        let mut inside_sc = 0.0;
        for (k, &c) in counts[..self.bins].iter().enumerate() {
            let a = self.lo + k as f64 * width;
            let sc = semicircle_cdf(a + width) - semicircle_cdf(a);
            inside_sc += sc;
            h2 += ((c as f64 / total as f64).sqrt() - sc.sqrt()).powi(2);
        }
        let outside = counts[self.bins] as f64 / total as f64;
        h2 += (outside.sqrt() - (1.0 - inside_sc).max(0.0).sqrt()).powi(2);
        Ok((0.5 * h2).sqrt().min(1.0))
    }
}

/// Hellinger distance between pooled normalized eigenvalues and the
/// semicircle of radius 2 on matched bins.
pub fn hellinger_to_semicircle(values: &[f64], bins: &SpectrumBins) -> Result<f64> {
    bins.hellinger(&bins.counts(values))
}
