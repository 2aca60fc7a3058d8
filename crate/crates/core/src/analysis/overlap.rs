use nalgebra::DMatrix;

use super::bootstrap::resample_indices;
use super::histogram::Histogram;
use crate::dynamics::ReplicaEnsemble;
use crate::{Error, Result};

/// Replica overlaps q_ab = s^a · s^b.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub q: DMatrix<f64>,
}

impl OverlapMatrix {
    pub fn n_reps(&self) -> usize {
        self.q.nrows()
    }

    /// Distances d_ab = 1 − |q_ab|, or 1 − q_ab when `abs` is false.
    pub fn distances(&self, abs: bool) -> DMatrix<f64> {
        self.q.map(|v| 1.0 - if abs { v.abs() } else { v })
    }

    /// Off-diagonal overlaps q_ab, a < b, in row-major order.
    pub fn pairs(&self) -> Vec<f64> {
        let n = self.n_reps();
        let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for a in 0..n {
            for b in a + 1..n {
                out.push(self.q[(a, b)]);
            }
        }
        out
    }
}

/// Overlap matrix of an ensemble. Binarized ensembles (all entries ±1/√n) are
/// evaluated by counting sign agreements, so overlaps land exactly on the
/// lattice (n − 2k)/n.
pub fn overlap_matrix(ens: &ReplicaEnsemble) -> Result<OverlapMatrix> {
    let n = ens.n_spins();
    let rows: Vec<&[f64]> = ens.rows().collect();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    let unit = 1.0 / (n as f64).sqrt();
    let binary = rows.iter().all(|r| r.iter().all(|&v| v.abs() == unit));
    let m = rows.len();
    let mut q = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let v = if binary {
                let disagree = rows[a].iter().zip(rows[b]).filter(|(x, y)| (**x < 0.0) != (**y < 0.0)).count();
                (n as f64 - 2.0 * disagree as f64) / n as f64
            } else {
                rows[a].iter().zip(rows[b]).map(|(x, y)| x * y).sum()
            };
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    Ok(OverlapMatrix { q })
}

/// Bin of q on [−1, 1], mirrored so that bin(−q) = bins − 1 − bin(q) exactly.
fn mirrored_bin(q: f64, bins: usize) -> usize {
    let k = Histogram::index(-1.0, 1.0, bins, q.abs());
    if q < 0.0 {
        bins - 1 - k
    } else {
        k
    }
}

fn pair_weights(pairs: impl Iterator<Item = f64>, bins: usize, symmetrize: bool) -> Vec<f64> {
    let mut w = vec![0.0; bins];
    for q in pairs {
        let k = mirrored_bin(q, bins);
        if symmetrize {
            w[k] += 0.5;
            w[bins - 1 - k] += 0.5;
        } else {
            w[k] += 1.0;
        }
    }
    w
}

/// Histogram of off-diagonal overlaps on `bins` equal bins over [−1, 1];
/// with `symmetrize` it is the average of P(q) and P(−q).
pub fn overlap_distribution(q: &OverlapMatrix, bins: usize, symmetrize: bool) -> Result<Histogram> {
    if q.n_reps() < 2 {
        return Err(Error::EmptyInput("overlap distribution needs at least two replicas".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    Ok(Histogram::from_weights(-1.0, 1.0, &pair_weights(q.pairs().into_iter(), bins, symmetrize)))
}

/// [`overlap_distribution`] with per-bin standard errors from resampling
/// replicas with replacement. Pairs formed by two copies of the same replica
/// are skipped.
pub fn overlap_distribution_bootstrap(
    q: &OverlapMatrix,
    bins: usize,
    symmetrize: bool,
    n_boot: usize,
    seed: u64,
) -> Result<Histogram> {
    let mut hist = overlap_distribution(q, bins, symmetrize)?;
    let n = q.n_reps();
    let samples: Vec<Vec<f64>> = (0..n_boot)
        .map(|b| {
            let idx = resample_indices(n, seed, b as u64);
            let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |c| (a, c))).filter_map(|(a, c)| {
                let (i, j) = (idx[a], idx[c]);
                (i != j).then(|| q.q[(i, j)])
            });
            Histogram::from_weights(-1.0, 1.0, &pair_weights(pairs, bins, symmetrize)).probabilities
        })
        .collect();
    hist.stderr = super::bootstrap::column_std(&samples, bins);
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::binarize_ensemble;
    use proptest::prelude::*;

    fn ens(rows: Vec<Vec<f64>>) -> ReplicaEnsemble {
        ReplicaEnsemble::from_rows(rows, String::new()).unwrap()
    }

    #[test]
    fn trivial_overlaps() {
        let e = ens(vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]]);
        let q = overlap_matrix(&e).unwrap();
        assert_eq!(q.q[(0, 1)], 1.0);
        assert_eq!(q.q[(0, 2)], -1.0);
        assert_eq!(q.q[(0, 3)], 0.0);
        assert!((0..4).all(|a| q.q[(a, a)] == 1.0));
    }

    #[test]
    fn two_replicas_symmetrized_split_mass() {
        let e = ens(vec![vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]]);
        let h = overlap_distribution(&overlap_matrix(&e).unwrap(), 50, true).unwrap();
        let k = mirrored_bin(0.5, 50);
        assert_eq!(h.probabilities[k], 0.5);
        assert_eq!(h.probabilities[49 - k], 0.5);
        assert!((h.bin_centers[k] + h.bin_centers[49 - k]).abs() < 1e-15);
    }

    #[test]
    fn identical_replicas_fill_goalposts() {
        let e = ens(vec![vec![0.3, -0.2, 0.9]; 5]);
        let h = overlap_distribution(&overlap_matrix(&e).unwrap(), 50, true).unwrap();
        assert_eq!(h.probabilities[0], 0.5);
        assert_eq!(h.probabilities[49], 0.5);
    }

    #[test]
    fn bootstrap_of_identical_replicas_has_zero_error() {
        let e = ens(vec![vec![0.3, -0.2, 0.9]; 6]);
        let h = overlap_distribution_bootstrap(&overlap_matrix(&e).unwrap(), 50, true, 100, 3).unwrap();
        assert!(h.stderr.iter().all(|&s| s == 0.0));
    }

    proptest! {
        #[test]
        fn binarized_overlaps_sit_on_the_lattice(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 7), 2..8)
        ) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r[0] += 2.5; r }).collect();
            let b = binarize_ensemble(&ens(rows));
            let q = overlap_matrix(&b).unwrap();
            for v in q.q.iter() {
                let k = (7.0 * (1.0 - v) / 2.0).round();
                prop_assert_eq!(*v, (7.0 - 2.0 * k) / 7.0);
            }
        }

        #[test]
        fn negating_replicas_leaves_symmetrized_histogram_bit_exact(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 5), 3..9),
            flips in proptest::collection::vec(any::<bool>(), 9)
        ) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r[0] += 2.5; r }).collect();
            let flipped: Vec<Vec<f64>> = rows.iter().zip(&flips)
                .map(|(r, &f)| r.iter().map(|v| if f { -v } else { *v }).collect()).collect();
            let a = overlap_distribution(&overlap_matrix(&ens(rows)).unwrap(), 50, true).unwrap();
            let b = overlap_distribution(&overlap_matrix(&ens(flipped)).unwrap(), 50, true).unwrap();
            prop_assert_eq!(a.probabilities, b.probabilities);
        }

        #[test]
        fn overlaps_are_bounded(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 6), 2..6)
        ) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|mut r| { r[0] += 2.5; r }).collect();
            let q = overlap_matrix(&ens(rows)).unwrap();
            prop_assert!(q.q.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }
}
