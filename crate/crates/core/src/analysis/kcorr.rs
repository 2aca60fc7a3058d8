use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::overlap::OverlapMatrix;
use crate::{Error, Result};

const K_BINS: usize = 50;
const KDE_GRID: usize = 2048;
/// Distance spreads below this are roundoff: all distances are equal.
const SIGMA_FLOOR: f64 = 1e-12;

/// Distribution of the ultrametricity correlator over replica triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCorrelator {
    pub histogram: Histogram,
    pub mean: f64,
    pub fwhm: f64,
    pub triples: usize,
}

/// K = (d₁ − d₂)/σ_d for every replica triple, where d₁ ≥ d₂ ≥ d₃ are the
/// triple's distances d = 1 − |q| and σ_d is the standard deviation of all
/// pairwise distances. K vanishes for isosceles triples with the two largest
/// sides equal.
///
/// Triples sharing replicas are strongly correlated, so the KDE bandwidth for
/// the FWHM uses the replica count as the sample size.
pub fn k_correlator(q: &OverlapMatrix) -> Result<KCorrelator> {
    let n = q.n_reps();
    if n < 3 {
        return Err(Error::EmptyInput("K correlator needs at least three replicas".into()));
    }
    let d = q.distances(true);
    let pair_d: Vec<f64> = q.pairs().iter().map(|v| 1.0 - v.abs()).collect();
    let mean_d = pair_d.iter().sum::<f64>() / pair_d.len() as f64;
    let sigma = (pair_d.iter().map(|v| (v - mean_d).powi(2)).sum::<f64>() / pair_d.len() as f64).sqrt();

    let ks: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let d = &d;
            (a + 1..n).flat_map(move |b| {
                (b + 1..n).map(move |c| {
                    let mut t = [d[(a, b)], d[(a, c)], d[(b, c)]];
                    t.sort_by(|x, y| y.total_cmp(x));
                    if sigma > SIGMA_FLOOR {
                        (t[0] - t[1]) / sigma
                    } else {
                        0.0
                    }
                })
            })
        })
        .collect();
    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
    let hi = ks.iter().copied().fold(0.0, f64::max);
    let hi = if hi > 0.0 { hi } else { 1.0 };
    let mut w = vec![0.0; K_BINS];
    for &k in &ks {
        w[Histogram::index(0.0, hi, K_BINS, k)] += 1.0;
    }
    Ok(KCorrelator { histogram: Histogram::from_weights(0.0, hi, &w), mean, fwhm: kde_fwhm(&ks, Some(n)), triples: ks.len() })
}

/// Full width at half maximum of a Gaussian kernel density estimate with
/// Silverman's bandwidth, evaluated by linear binning onto a fine grid.
/// `effective_n` replaces the sample count in the bandwidth rule when the
/// samples are correlated. Zero when the samples have no spread.
pub fn kde_fwhm(samples: &[f64], effective_n: Option<usize>) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantile = |p: f64| {
        let pos = p * (n - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos.fract());
        sorted[i] + f * (sorted[(i + 1).min(n - 1)] - sorted[i])
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * (effective_n.unwrap_or(n).max(1) as f64).powf(-0.2);
    if !(h > 0.0) {
        return 0.0;
    }
    let (lo, hi) = (sorted[0] - 4.0 * h, sorted[n - 1] + 4.0 * h);
    let dx = (hi - lo) / (KDE_GRID - 1) as f64;
    let mut binned = vec![0.0; KDE_GRID];
    for &v in samples {
        let pos = (v - lo) / dx;
        let i = (pos.floor() as usize).min(KDE_GRID - 2);
        let f = pos - i as f64;
        binned[i] += 1.0 - f;
        binned[i + 1] += f;
    }
    let reach = ((4.0 * h / dx).ceil() as usize).max(1);
    let kernel: Vec<f64> = (0..=reach).map(|k| (-0.5 * (k as f64 * dx / h).powi(2)).exp()).collect();
    let density: Vec<f64> = (0..KDE_GRID)
        .map(|i| {
            let lo_k = i.saturating_sub(reach);
            let hi_k = (i + reach).min(KDE_GRID - 1);
            (lo_k..=hi_k).map(|j| binned[j] * kernel[i.abs_diff(j)]).sum()
        })
        .collect();
    let (peak, &top) = density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let half = top / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| -> f64 {
        for i in range {
            if density[i] < half {
                let j = (i as isize - step) as usize;
                let f = (half - density[i]) / (density[j] - density[i]);
                return lo + (i as f64 + f * step as f64) * dx;
            }
        }
        if step > 0 { lo } else { hi }
    };
    let left = crossing(&mut (0..peak).rev(), 1);
    let right = crossing(&mut (peak + 1..KDE_GRID), -1);
    right - left
}
