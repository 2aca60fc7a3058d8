use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bootstrap::{column_std, resample_indices};
use super::histogram::Histogram;
use crate::{Error, Result};

/// Disorder-averaged overlap distribution: the unweighted mean of per-realization
/// histograms, with standard errors from resampling realizations.
pub fn parisi_distribution(hists: &[Histogram], n_boot: usize, seed: u64) -> Result<Histogram> {
    if hists.len() < 2 {
        return Err(Error::EmptyInput("Parisi distribution needs at least two realizations".into()));
    }
    for h in &hists[1..] {
        hists[0].check_binning(h)?;
    }
    let bins = hists[0].bins();
    let mean_of = |idx: &mut dyn Iterator<Item = usize>| {
        let mut acc = vec![0.0; bins];
        let mut count = 0usize;
        for k in idx {
            for (a, p) in acc.iter_mut().zip(&hists[k].probabilities) {
                *a += p;
            }
            count += 1;
        }
        acc.iter().map(|a| a / count as f64).collect::<Vec<f64>>()
    };
    let mut out = hists[0].clone();
    out.probabilities = mean_of(&mut (0..hists.len()));
    let samples: Vec<Vec<f64>> = (0..n_boot)
        .map(|b| mean_of(&mut resample_indices(hists.len(), seed, b as u64).into_iter()))
        .collect();
    out.stderr = column_std(&samples, bins);
    Ok(out)
}

/// Least-squares fit q(x) = min(ax² + bx + c, q_EA), continuous at x*, with
/// the quadratic non-decreasing on [0, x*].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParisiFit {
    pub q_ea: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x_star: f64,
    /// Mean squared deviation over the sampled q(x).
    pub residual: f64,
}

impl ParisiFit {
    pub fn eval(&self, x: f64) -> f64 {
        if x >= self.x_star {
            self.q_ea
        } else {
            (self.a * x + self.b) * x + self.c
        }
    }
}

/// Sampled Parisi function q(x) on x_j = (j + ½)/m, its plateau and fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParisiFunction {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub q_ea: f64,
    /// Absent when |q| has a single atom.
    pub fit: Option<ParisiFit>,
}

/// Atoms (|q|, mass) of the folded distribution, ascending.
fn abs_atoms(hist: &Histogram) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = hist
        .bin_centers
        .iter()
        .zip(&hist.probabilities)
        .filter(|(_, &p)| p > 0.0)
        .map(|(c, &p)| (c.abs(), p))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (q, p) in atoms {
        match merged.last_mut() {
            Some(last) if (q - last.0).abs() < 1e-12 => last.1 += p,
            _ => merged.push((q, p)),
        }
    }
    merged
}

/// q(x) as the right-continuous generalized inverse of x(q) = P(|q′| ≤ q),
/// sampled at `samples` points, plus the piecewise quadratic-constant fit.
pub fn parisi_function(hist: &Histogram, samples: usize) -> Result<ParisiFunction> {
    let atoms = abs_atoms(hist);
    if atoms.is_empty() {
        return Err(Error::EmptyInput("overlap distribution has no mass".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut cumulative = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for (q, p) in &atoms {
        acc += p / total;
        cumulative.push((*q, acc));
    }
    let x: Vec<f64> = (0..samples).map(|j| (j as f64 + 0.5) / samples as f64).collect();
    let q: Vec<f64> = x
        .iter()
        .map(|&xv| cumulative.iter().find(|(_, c)| *c > xv).unwrap_or(cumulative.last().unwrap()).0)
        .collect();
    if atoms.len() == 1 {
        return Ok(ParisiFunction { q_ea: atoms[0].0, x, q, fit: None });
    }
    let fit = fit_parisi(&x, &q);
    Ok(ParisiFunction { q_ea: fit.q_ea, x, q, fit: Some(fit) })
}

/// Grid search over x* with an active-set linear least-squares solve for
/// (a, b, c) at each candidate.
fn fit_parisi(x: &[f64], q: &[f64]) -> ParisiFit {
    let m = x.len();
    let y = DVector::from_column_slice(q);
    let mut best: Option<ParisiFit> = None;
    for k in 1..=m {
        let xs = k as f64 / m as f64;
        let row = |xv: f64| if xv < xs { [xv * xv, xv, 1.0] } else { [xs * xs, xs, 1.0] };
        let full = DMatrix::from_fn(m, 3, |i, j| row(x[i])[j]);
        // Free; b = 0; b = −2a x*; a = b = 0.
        let maps: [DMatrix<f64>; 4] = [
            DMatrix::identity(3, 3),
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -2.0 * xs, 0.0, 0.0, 1.0]),
            DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]),
        ];
        for map in &maps {
            let design = &full * map;
            let Ok(theta) = design.clone().svd(true, true).solve(&y, 1e-12) else { continue };
            let p = map * theta;
            let (a, b, c) = (p[0], p[1], p[2]);
            if b < -1e-12 || 2.0 * a * xs + b < -1e-12 {
                continue;
            }
            let sse = (&full * &p - &y).norm_squared();
            let cand = ParisiFit { q_ea: (a * xs + b) * xs + c, a, b, c, x_star: xs, residual: sse / m as f64 };
            if best.is_none_or(|bst| cand.residual < bst.residual - 1e-15) {
                best = Some(cand);
            }
        }
    }
    best.expect("the constant model is always feasible")
}
