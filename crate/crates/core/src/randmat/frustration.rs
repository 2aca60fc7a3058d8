use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;

const EXHAUSTIVE_MAX_N: usize = 20;
const SAMPLED_TRIPLES: usize = 100_000;

/// Bond-sign statistics pooled over a J ensemble. Only off-diagonal entries
/// enter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrustrationStats {
    /// P(J_ij < 0).
    pub p_neg: f64,
    /// P(J_ij J_jk J_ki < 0).
    pub p_frustrated_triple: f64,
    /// Corr(J_ij, J_jk) over ordered pairs sharing j with i ≠ k; zero when
    /// either side has no variance.
    pub pearson: f64,
}

/// Additive per-matrix counts from which pooled statistics are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct SignCounts {
    pub bonds: u64,
    pub negative: u64,
    pub triples: u64,
    pub frustrated: u64,
    pub pairs: f64,
    pub sx: f64,
    pub sy: f64,
    pub sxx: f64,
    pub syy: f64,
    pub sxy: f64,
}

impl SignCounts {
    pub fn of(j: &DMatrix<f64>, seed: u64, stream: u64) -> Self {
        let n = j.nrows();
        let mut c = Self::default();
        for a in 0..n {
            for b in a + 1..n {
                c.bonds += 1;
                c.negative += (j[(a, b)] < 0.0) as u64;
            }
        }
        let mut triple = |a: usize, b: usize, d: usize| {
            c.triples += 1;
            c.frustrated += (j[(a, b)] * j[(b, d)] * j[(d, a)] < 0.0) as u64;
        };
        if n <= EXHAUSTIVE_MAX_N {
            for a in 0..n {
                for b in a + 1..n {
                    for d in b + 1..n {
                        triple(a, b, d);
                    }
                }
            }
        } else {
            let mut r = rng::stream(seed, stream);
            for _ in 0..SAMPLED_TRIPLES {
                let a = r.random_range(0..n);
                let mut b = r.random_range(0..n - 1);
                b += (b >= a) as usize;
                let mut d = r.random_range(0..n - 2);
                for lo in [a.min(b), a.max(b)] {
                    d += (d >= lo) as usize;
                }
                triple(a, b, d);
            }
        }
        // Ordered pairs (J_ij, J_jk) with i, k ≠ j and i ≠ k, by row sums.
        for mid in 0..n {
            let row: Vec<f64> = (0..n).filter(|&i| i != mid).map(|i| j[(i, mid)]).collect();
            let m = row.len() as f64;
            let s1: f64 = row.iter().sum();
            let s2: f64 = row.iter().map(|v| v * v).sum();
            c.pairs += m * (m - 1.0);
            c.sx += (m - 1.0) * s1;
            c.sy += (m - 1.0) * s1;
            c.sxx += (m - 1.0) * s2;
            c.syy += (m - 1.0) * s2;
            c.sxy += s1 * s1 - s2;
        }
        c
    }

    pub fn add(&mut self, o: &Self) {
        self.bonds += o.bonds;
        self.negative += o.negative;
        self.triples += o.triples;
        self.frustrated += o.frustrated;
        self.pairs += o.pairs;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self.sxy += o.sxy;
    }

    pub fn stats(&self) -> FrustrationStats {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let p = self.pairs;
        let cov = self.sxy / p - self.sx * self.sy / (p * p);
        let vx = self.sxx / p - (self.sx / p).powi(2);
        let vy = self.syy / p - (self.sy / p).powi(2);
        let scale = (self.sxx / p).max(self.syy / p);
        let pearson = if p > 0.0 && vx > 1e-14 * scale && vy > 1e-14 * scale { cov / (vx * vy).sqrt() } else { 0.0 };
        FrustrationStats {
            p_neg: ratio(self.negative, self.bonds),
            p_frustrated_triple: ratio(self.frustrated, self.triples),
            pearson,
        }
    }
}

/// Pooled bond-sign statistics of a J ensemble. Triples are enumerated for
/// n ≤ 20 and otherwise sampled, 10⁵ per matrix, from streams keyed by
/// `seed` and the matrix index.
pub fn frustration_stats(js: &[DMatrix<f64>], seed: u64) -> FrustrationStats {
    let mut total = SignCounts::default();
    for (k, j) in js.iter().enumerate() {
        total.add(&SignCounts::of(j, seed, k as u64));
    }
    total.stats()
}
