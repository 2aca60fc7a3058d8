use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dynamics::ReplicaEnsemble;
use crate::{Error, Result};

/// Shannon entropy in bits of the Z2-symmetrized sign-pattern distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub plug_in: f64,
    pub jackknife: f64,
    /// Number of distinct patterns up to global sign flip.
    pub classes: usize,
}

/// Entropy of Z2 classes with counts `counts` out of `total`, plus the one bit
/// from splitting each class evenly between s and −s.
fn entropy_bits(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.filter(|&c| c > 0).map(|c| c as f64 / t * (c as f64 / t).log2()).sum::<f64>()
}

/// Plug-in and leave-one-out jackknife entropy of replica sign patterns, with
/// p(s) = p(−s) imposed. Zero amplitudes count as positive.
pub fn shannon_entropy_jackknife(ens: &ReplicaEnsemble) -> Result<EntropyEstimate> {
    let n = ens.n_reps();
    if n < 2 {
        return Err(Error::EmptyInput("entropy needs at least two replicas".into()));
    }
    let mut classes: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for row in ens.rows() {
        let flip = row[0] < 0.0;
        let key: Vec<bool> = row.iter().map(|&v| (v < 0.0) != flip).collect();
        *classes.entry(key).or_default() += 1;
    }
    let counts: Vec<usize> = classes.values().copied().collect();
    let plug_in = entropy_bits(counts.iter().copied(), n);
    // Leaving out any member of a class gives the same entropy.
    let loo_sum: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let reduced = counts.iter().enumerate().map(|(j, &v)| if j == k { v - 1 } else { v });
            c as f64 * entropy_bits(reduced, n - 1)
        })
        .sum();
    let jackknife = n as f64 * plug_in - (n - 1) as f64 * loo_sum / n as f64;
    Ok(EntropyEstimate { plug_in, jackknife, classes: counts.len() })
}
