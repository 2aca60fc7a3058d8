use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::frustration::SignCounts;
use super::spectrum::{eigen_spectrum_normalized, SpectrumBins};
use crate::coupling::{point_source_j, SpinSite};
use crate::optics::CavityGeometry;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub n_values: Vec<usize>,
    /// Disorder widths in units of the waist.
    pub w_over_w0: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
    /// Resamples of the draws for standard errors; zero disables them.
    pub n_boot: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_values: vec![16],
            w_over_w0: (1..=12).map(|k| 0.25 * k as f64).collect(),
            draws: 50,
            seed: 0,
            n_boot: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: usize,
    pub w_over_w0: f64,
    pub hellinger: f64,
    pub p_neg: f64,
    pub p_frustrated_triple: f64,
    pub pearson: f64,
    pub hellinger_stderr: f64,
    pub p_neg_stderr: f64,
    pub p_frustrated_triple_stderr: f64,
    pub pearson_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub draws: usize,
    pub seed: u64,
}

struct Draw {
    spectrum: Vec<u64>,
    signs: SignCounts,
}

/// Stream index of draw `draw` in cell `cell`.
fn stream_id(cell: usize, draw: usize) -> u64 {
    ((cell as u64) << 32) | draw as u64
}

fn one_draw(n: usize, w_um: f64, geom: &CavityGeometry, seed: u64, id: u64, bins: &SpectrumBins) -> Result<Draw> {
    let mut r = rng::stream(seed, id);
    let sites: Vec<SpinSite> = if w_um > 0.0 {
        let g = Normal::new(0.0, w_um).map_err(|e| Error::InvalidParameter(format!("disorder width: {e}")))?;
        (0..n).map(|_| SpinSite::new([g.sample(&mut r), g.sample(&mut r)])).collect()
    } else {
        (0..n).map(|_| SpinSite::new([0.0, 0.0])).collect()
    };
    let jm = point_source_j(&sites, geom)?;
    let ev = eigen_spectrum_normalized(&jm.j)?;
    Ok(Draw { spectrum: bins.counts(&ev), signs: SignCounts::of(&jm.j, seed ^ 0x9e37_79b9_7f4a_7c15, id) })
}

fn pooled(draws: &[Draw], idx: &mut dyn Iterator<Item = usize>, bins: &SpectrumBins) -> Result<[f64; 4]> {
    let mut spec = vec![0u64; bins.bins + 1];
    let mut signs = SignCounts::default();
    for k in idx {
        for (a, b) in spec.iter_mut().zip(&draws[k].spectrum) {
            *a += b;
        }
        signs.add(&draws[k].signs);
    }
    let st = signs.stats();
    Ok([bins.hellinger(&spec)?, st.p_neg, st.p_frustrated_triple, st.pearson])
}

/// Point-source coupling ensembles with positions drawn from an isotropic
/// Gaussian of width w about the cavity axis, for every (n, w) cell.
///
/// Each draw uses its own RNG stream keyed by the seed, cell and draw index,
/// so results do not depend on the thread count.
pub fn sweep_w(opts: &SweepOptions, geom: &CavityGeometry) -> Result<SweepResult> {
    if opts.draws < 2 {
        return Err(Error::InvalidParameter(format!("sweep needs at least two draws per cell, got {}", opts.draws)));
    }
    if let Some(&n) = opts.n_values.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidParameter(format!("sweep needs n ≥ 3, got {n}")));
    }
    if let Some(w) = opts.w_over_w0.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!("disorder width {w} must be non-negative")));
    }
    let bins = SpectrumBins::default();
    let grid: Vec<(usize, f64)> =
        opts.n_values.iter().flat_map(|&n| opts.w_over_w0.iter().map(move |&w| (n, w))).collect();
    let mut cells = Vec::with_capacity(grid.len());
    for (c, &(n, w)) in grid.iter().enumerate() {
        let draws = (0..opts.draws)
            .into_par_iter()
            .map(|d| one_draw(n, w * geom.w0_um, geom, opts.seed, stream_id(c, d), &bins))
            .collect::<Result<Vec<_>>>()?;
        let est = pooled(&draws, &mut (0..draws.len()), &bins)?;
        let boot = (0..opts.n_boot)
            .into_par_iter()
            .map(|b| {
                let mut r = rng::stream(opts.seed, stream_id(c, 0) | 1 << 63 | b as u64);
                let idx: Vec<usize> = (0..draws.len()).map(|_| rand::Rng::random_range(&mut r, 0..draws.len())).collect();
                pooled(&draws, &mut idx.into_iter(), &bins).map(|v| v.to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        let se = crate::analysis::column_std(&boot, 4);
        cells.push(SweepCell {
            n,
            w_over_w0: w,
            hellinger: est[0],
            p_neg: est[1],
            p_frustrated_triple: est[2],
            pearson: est[3],
            hellinger_stderr: se[0],
            p_neg_stderr: se[1],
            p_frustrated_triple_stderr: se[2],
            pearson_stderr: se[3],
        });
    }
    Ok(SweepResult { cells, draws: opts.draws, seed: opts.seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(w: Vec<f64>, draws: usize) -> SweepOptions {
        SweepOptions { n_values: vec![8], w_over_w0: w, draws, seed: 17, n_boot: 20 }
    }

    #[test]
    fn narrow_cloud_is_ferromagnetic() {
        let r = sweep_w(&opts(vec![0.0, 0.05], 20), &CavityGeometry::four_seven()).unwrap();
        for c in &r.cells {
            assert_eq!(c.p_neg, 0.0);
            assert!(c.hellinger > 0.5, "{}", c.hellinger);
        }
    }

    #[test]
    fn sign_disorder_sets_in_with_width() {
        let r = sweep_w(&opts(vec![0.2, 0.5, 1.0, 2.5], 100), &CavityGeometry::four_seven()).unwrap();
        let p: Vec<f64> = r.cells.iter().map(|c| c.p_neg).collect();
        assert!(p[0] < 0.02, "{p:?}");
        assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
        assert!((p[3] - 0.5).abs() < 0.05, "{p:?}");
        assert!(r.cells[3].hellinger < r.cells[0].hellinger);
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let o = opts(vec![1.0, 2.0], 30);
        let g = CavityGeometry::four_seven();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| sweep_w(&o, &g)).unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| sweep_w(&o, &g)).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn stats_are_probabilities() {
        let r = sweep_w(&opts(vec![0.7, 3.0], 10), &CavityGeometry::four_seven()).unwrap();
        for c in &r.cells {
            for p in [c.p_neg, c.p_frustrated_triple, c.hellinger] {
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
