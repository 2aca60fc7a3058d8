use serde::{Deserialize, Serialize};

use super::overlap::OverlapMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    /// Unweighted pair-group average (UPGMA).
    #[default]
    Average,
}

/// One agglomeration step. Leaves are `0..n`; the cluster formed by merge `k`
/// has id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub linkage: Linkage,
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
    /// Leaf order for block-diagonal display of the overlap matrix.
    pub order: Vec<usize>,
}

impl Dendrogram {
    /// Number of distinct merge heights above `tol`, counting heights within
    /// `tol` of each other once.
    pub fn depth(&self, tol: f64) -> usize {
        let mut h: Vec<f64> = self.merges.iter().map(|m| m.height).filter(|&h| h > tol).collect();
        h.sort_by(f64::total_cmp);
        let mut levels = 0;
        let mut last = f64::NEG_INFINITY;
        for v in h {
            if v - last > tol {
                levels += 1;
                last = v;
            }
        }
        levels
    }

    /// Leaves under cluster `id`, in display order.
    pub fn leaves(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if c < self.n_leaves {
                out.push(c);
            } else {
                let m = &self.merges[c - self.n_leaves];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Leaf sets of the two children of the root.
    pub fn root_split(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        self.merges.last().map(|m| (self.leaves(m.left), self.leaves(m.right)))
    }
}

/// Agglomerative clustering of replicas on d = 1 − |q| (or 1 − q when `abs`
/// is false). Ties are broken by the lowest pair of cluster slots.
pub fn cluster_replicas(q: &OverlapMatrix, linkage: Linkage, abs: bool) -> Result<Dendrogram> {
    let n = q.n_reps();
    if n < 2 {
        return Err(Error::EmptyInput("clustering needs at least two replicas".into()));
    }
    let mut d = q.distances(abs);
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if d[(i, j)] < best.0 {
                    best = (d[(i, j)], i, j);
                }
            }
        }
        let (h, i, j) = best;
        let (l, r) = (id[i].min(id[j]), id[i].max(id[j]));
        merges.push(Merge { left: l, right: r, height: h, size: size[i] + size[j] });
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let v = match linkage {
                Linkage::Single => d[(i, k)].min(d[(j, k)]),
                Linkage::Complete => d[(i, k)].max(d[(j, k)]),
                Linkage::Average => {
                    (size[i] as f64 * d[(i, k)] + size[j] as f64 * d[(j, k)]) / (size[i] + size[j]) as f64
                }
            };
            d[(i, k)] = v;
            d[(k, i)] = v;
        }
        size[i] += size[j];
        id[i] = n + step;
        active[j] = false;
    }
    let mut dendro = Dendrogram { linkage, n_leaves: n, merges, order: Vec::new() };
    dendro.order = dendro.leaves(2 * n - 2);
    Ok(dendro)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::overlap_matrix;
    use crate::dynamics::ReplicaEnsemble;

    fn q_of(rows: Vec<Vec<f64>>) -> OverlapMatrix {
        overlap_matrix(&ReplicaEnsemble::from_rows(rows, String::new()).unwrap()).unwrap()
    }

    /// 2 × 2 × 2 nested groups of two identical replicas each, built by sign
    /// flips on disjoint blocks of decreasing size.
    fn nested() -> Vec<Vec<f64>> {
        let mut rows = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let mut s = vec![1.0; 24];
                    if a == 1 {
                        s[..8].iter_mut().for_each(|v| *v = -*v);
                    }
                    if b == 1 {
                        s[8..12].iter_mut().for_each(|v| *v = -*v);
                    }
                    if c == 1 {
                        s[12..14].iter_mut().for_each(|v| *v = -*v);
                    }
                    rows.push(s.clone());
                    rows.push(s);
                }
            }
        }
        rows
    }

    #[test]
    fn two_clusters_split_at_root() {
        let mut rows = Vec::new();
        for k in 0..10 {
            let mut s = vec![1.0; 12];
            s[k % 3] = -1.0;
            if k % 2 == 1 {
                s[6..].iter_mut().for_each(|v| *v = -*v);
            }
            rows.push(s);
        }
        let dg = cluster_replicas(&q_of(rows), Linkage::Average, false).unwrap();
        let (mut a, mut b) = dg.root_split().unwrap();
        a.sort();
        b.sort();
        let (evens, odds): (Vec<usize>, Vec<usize>) = (0..10).partition(|k| k % 2 == 0);
        assert!((a == evens && b == odds) || (a == odds && b == evens));
    }

    #[test]
    fn identical_replicas_merge_at_zero() {
        let dg = cluster_replicas(&q_of(vec![vec![0.2, 0.5, -0.1]; 6]), Linkage::Average, true).unwrap();
        assert!(dg.merges.iter().all(|m| m.height.abs() < 1e-12));
        assert_eq!(dg.depth(1e-9), 0);
    }

    #[test]
    fn nested_hierarchy_depth_is_recovered() {
        for linkage in [Linkage::Average, Linkage::Single, Linkage::Complete] {
            let dg = cluster_replicas(&q_of(nested()), linkage, true).unwrap();
            assert_eq!(dg.depth(1e-9), 3, "{linkage:?}");
        }
    }

    #[test]
    fn heights_never_decrease_toward_the_root() {
        let dg = cluster_replicas(&q_of(nested()), Linkage::Average, true).unwrap();
        let n = dg.n_leaves;
        for m in &dg.merges {
            for child in [m.left, m.right] {
                if child >= n {
                    assert!(dg.merges[child - n].height <= m.height);
                }
            }
        }
        let mut order = dg.order.clone();
        order.sort();
        assert_eq!(order, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn clustering_on_abs_distance_ignores_replica_signs() {
        let rows = nested();
        let flipped: Vec<Vec<f64>> =
            rows.iter().enumerate().map(|(k, r)| r.iter().map(|v| if k % 3 == 0 { -v } else { *v }).collect()).collect();
        let a = cluster_replicas(&q_of(rows), Linkage::Average, true).unwrap();
        let b = cluster_replicas(&q_of(flipped), Linkage::Average, true).unwrap();
        assert_eq!(a, b);
    }
}
