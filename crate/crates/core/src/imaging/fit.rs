use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{Coeffs, FieldModel};
use crate::coupling::{DensityProfile, SpinSite};
use crate::optics::{CavityGeometry, ComplexFieldImage};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub cost_rtol: f64,
    /// Central-difference step for positions and widths, µm.
    pub fd_step_um: f64,
    pub fit_sigma: bool,
    /// Known field scale. When set, recovered spins are c00/scale; otherwise
    /// the recovered spin vector is normalized to unit Euclidean norm.
    pub amplitude_scale: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 200, cost_rtol: 1e-7, fd_step_um: 1e-3, fit_sigma: true, amplitude_scale: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSite {
    /// Signed site amplitude; sign follows the HG00 coefficient.
    pub amplitude: f64,
    pub position: Vec2,
    pub a00: f64,
    pub a01: f64,
    pub a10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub sites: Vec<FittedSite>,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// ‖I − model‖² / ‖I‖² over the real part of the image.
    pub residual: f64,
    pub s: Vec<f64>,
    pub iterations: usize,
    /// Cost after each accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    fn densities(&self) -> impl Iterator<Item = (Vec2, DensityProfile, f64)> + '_ {
        self.sites.iter().map(|s| {
            let d = DensityProfile { sigma_x: self.sigma_x, sigma_y: self.sigma_y, a00: s.a00, a01: s.a01, a10: s.a10 };
            (s.position, d, s.amplitude)
        })
    }
}

struct Params {
    pos: Vec<Vec2>,
    sigma: [f64; 2],
}

impl Params {
    fn len(&self, fit_sigma: bool) -> usize {
        2 * self.pos.len() + if fit_sigma { 2 } else { 0 }
    }

    fn shifted(&self, delta: &DVector<f64>) -> Self {
        let pos = self.pos.iter().enumerate().map(|(i, p)| [p[0] + delta[2 * i], p[1] + delta[2 * i + 1]]).collect();
        let k = 2 * self.pos.len();
        let sigma = if delta.len() > k { [self.sigma[0] + delta[k], self.sigma[1] + delta[k + 1]] } else { self.sigma };
        Self { pos, sigma }
    }

    fn density(&self) -> DensityProfile {
        DensityProfile::gaussian(self.sigma[0], self.sigma[1])
    }
}

/// Least-squares solution for the linear coefficients at fixed geometry.
struct Projection {
    phi: DMatrix<f64>,
    c: DVector<f64>,
    gram_inv: DMatrix<f64>,
    residual: DVector<f64>,
    cost: f64,
}

fn basis(model: &FieldModel, p: &Params) -> DMatrix<f64> {
    let n = p.pos.len();
    let d = p.density();
    let len = model.len();
    let mut phi = DMatrix::zeros(len, 3 * n);
    for (i, &c) in p.pos.iter().enumerate() {
        let (fx, fy) = model.site_axes(c, &d);
        for (k, a) in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]].into_iter().enumerate() {
            let start = (3 * i + k) * len;
            model.render(&mut phi.as_mut_slice()[start..start + len], &fx, &fy, a, 1.0, true);
        }
    }
    phi
}

/// AᵀB through the blocked matrix product; `tr_mul` runs one strided dot
/// product per entry, which is memory bound for image-sized columns.
fn at_b(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * b
}

fn project(model: &FieldModel, p: &Params, y: &DVector<f64>) -> Result<Projection> {
    let phi = basis(model, p);
    let gram = at_b(&phi, &phi);
    let gram_inv = match gram.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => {
            let eps = 1e-12 * gram.diagonal().max();
            gram.pseudo_inverse(eps).map_err(|e| Error::InvalidParameter(format!("fit basis: {e}")))?
        }
    };
    let c = &gram_inv * phi.tr_mul(y);
    let residual = y - &phi * &c;
    let cost = residual.norm_squared();
    Ok(Projection { phi, c, gram_inv, residual, cost })
}

/// Columns ∂(Φc)/∂θ by central differences with c held fixed. Each parameter
/// moves one axis of one site, so the difference is taken on the axis factors.
fn model_derivatives(model: &FieldModel, p: &Params, c: &DVector<f64>, h: f64, fit_sigma: bool) -> DMatrix<f64> {
    let n = p.pos.len();
    let len = model.len();
    let mut d = DMatrix::zeros(len, p.len(fit_sigma));
    let coeffs = |i: usize| -> Coeffs { [c[3 * i], c[3 * i + 2], c[3 * i + 1]] };
    let [sx, sy] = p.sigma;
    let span = |k: usize| k * len..(k + 1) * len;
    for i in 0..n {
        let [x, y] = p.pos[i];
        let (fx, fy) = (model.axis(true, x, sx), model.axis(false, y, sy));
        let dx = model.axis(true, x + h, sx).difference(&model.axis(true, x - h, sx), 2.0 * h);
        let dy = model.axis(false, y + h, sy).difference(&model.axis(false, y - h, sy), 2.0 * h);
        model.render(&mut d.as_mut_slice()[span(2 * i)], &dx, &fy, coeffs(i), 1.0, true);
        model.render(&mut d.as_mut_slice()[span(2 * i + 1)], &fx, &dy, coeffs(i), 1.0, true);
        if fit_sigma {
            let dsx = model.axis(true, x, sx + h).difference(&model.axis(true, x, sx - h), 2.0 * h);
            let dsy = model.axis(false, y, sy + h).difference(&model.axis(false, y, sy - h), 2.0 * h);
            model.render(&mut d.as_mut_slice()[span(2 * n)], &dsx, &fy, coeffs(i), 1.0, true);
            model.render(&mut d.as_mut_slice()[span(2 * n + 1)], &fx, &dsy, coeffs(i), 1.0, true);
        }
    }
    d
}

fn real_part(image: &ComplexFieldImage) -> DVector<f64> {
    DVector::from_iterator(image.data().len(), image.data().iter().map(|z| z.re))
}

/// Fits the emitted-field model to the real part of a calibrated image.
///
/// Site coefficients enter linearly and are eliminated by least squares at
/// every step; positions and the shared density widths are refined by a
/// damped Gauss–Newton iteration on the projected residual. Steps are only
/// accepted when they lower the cost.
pub fn fit_spins(
    image: &ComplexFieldImage,
    initial_sites: &[SpinSite],
    geom: &CavityGeometry,
    opts: &FitOptions,
) -> Result<FitResult> {
    if initial_sites.is_empty() {
        return Err(Error::EmptyInput("no sites to fit".into()));
    }
    let model = FieldModel::new(image, geom)?;
    let n = initial_sites.len();
    let sigma = [
        initial_sites.iter().map(|s| s.density.sigma_x).sum::<f64>() / n as f64,
        initial_sites.iter().map(|s| s.density.sigma_y).sum::<f64>() / n as f64,
    ];
    let mut p = Params { pos: initial_sites.iter().map(|s| s.position).collect(), sigma };
    p.density().validate()?;
    for &c in &p.pos {
        model.check_coverage(c, &p.density())?;
    }
    warn_overlaps(&p);

    let y = real_part(image);
    let norm = y.norm_squared();
    let mut proj = project(&model, &p, &y)?;
    let mut history = vec![proj.cost];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = norm == 0.0 || proj.cost <= 1e-28 * norm;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let d = model_derivatives(&model, &p, &proj.c, opts.fd_step_um, opts.fit_sigma);
        // Projected Jacobian J = −(I − Φ G⁻¹ Φᵀ) D, so JᵀJ = DᵀD − DᵀΦ G⁻¹ ΦᵀD
        // and Jᵀr = −Dᵀr since r is already orthogonal to the basis.
        let phid = at_b(&proj.phi, &d);
        let jtj = at_b(&d, &d) - phid.tr_mul(&(&proj.gram_inv * &phid));
        let g = d.tr_mul(&proj.residual);
        let floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * jtj[(k, k)].max(floor);
            }
            let Some(ch) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = ch.solve(&g);
            let trial = p.shifted(&step);
            if trial.sigma[0] <= 0.0 || trial.sigma[1] <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let tp = project(&model, &trial, &y)?;
            if tp.cost < proj.cost {
                let rel = (proj.cost - tp.cost) / proj.cost;
                p = trial;
                proj = tp;
                history.push(proj.cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                converged = rel < opts.cost_rtol || proj.cost <= 1e-28 * norm;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left at machine precision: a stationary point.
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "spin fit".into(), iterations });
    }
    Ok(assemble(&p, &proj, norm, iterations, history, opts))
}

fn assemble(p: &Params, proj: &Projection, norm: f64, iterations: usize, history: Vec<f64>, opts: &FitOptions) -> FitResult {
    let n = p.pos.len();
    let sites: Vec<FittedSite> = (0..n)
        .map(|i| {
            let (c00, c01, c10) = (proj.c[3 * i], proj.c[3 * i + 1], proj.c[3 * i + 2]);
            let mag = (c00 * c00 + c01 * c01 + c10 * c10).sqrt();
            if mag == 0.0 {
                return FittedSite { amplitude: 0.0, position: p.pos[i], a00: 1.0, a01: 0.0, a10: 0.0 };
            }
            let a = if c00 < 0.0 { -mag } else { mag };
            FittedSite { amplitude: a, position: p.pos[i], a00: c00 / a, a01: c01 / a, a10: c10 / a }
        })
        .collect();
    let raw: Vec<f64> = sites.iter().map(|s| s.amplitude * s.a00).collect();
    let scale = opts.amplitude_scale.unwrap_or_else(|| raw.iter().map(|v| v * v).sum::<f64>().sqrt());
    let s = raw.iter().map(|v| if scale == 0.0 { 0.0 } else { v / scale }).collect();
    FitResult {
        sites,
        sigma_x: p.sigma[0],
        sigma_y: p.sigma[1],
        residual: if norm == 0.0 { 0.0 } else { proj.cost / norm },
        s,
        iterations,
        cost_history: history,
    }
}

fn warn_overlaps(p: &Params) {
    let reach = p.sigma[0].max(p.sigma[1]);
    for i in 0..p.pos.len() {
        for j in i + 1..p.pos.len() {
            let d = (p.pos[i][0] - p.pos[j][0]).hypot(p.pos[i][1] - p.pos[j][1]);
            if d < reach {
                log::warn!("sites {i} and {j} are {d:.2} µm apart, within one density width; their amplitudes are poorly separated");
            }
        }
    }
}

/// Image with the fitted nonlocal field removed, leaving the local emission of
/// each site.
pub fn local_spin_map(image: &ComplexFieldImage, fit: &FitResult, geom: &CavityGeometry) -> Result<ComplexFieldImage> {
    let model = FieldModel::new(image, geom)?;
    let mut nonlocal = vec![0.0; model.len()];
    for (pos, d, amp) in fit.densities() {
        if amp != 0.0 {
            model.accumulate(&mut nonlocal, pos, &d, amp, false);
        }
    }
    let data = image.data().iter().zip(&nonlocal).map(|(z, v)| z - Complex64::new(*v, 0.0)).collect();
    Ok(image.with_data(data))
}
