//! Discrete fractional Fourier transform on the calibrated pixel grid.
//!
//! The transform is diagonal in a discrete Hermite–Gauss basis: sampled
//! Hermite functions of the waist-scaled coordinate t = √2 (j − x_c)/w0_px,
//! orthonormalized by a sign-fixed QR factorization. This makes the operator
//! exactly unitary and exactly a one-parameter group, and its low orders
//! reproduce the continuous Hermite functions. The chirp decomposition of
//! the continuous kernel is kept as [`frft_chirp`] for cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use super::geometry::CavityGeometry;
use super::image::ComplexFieldImage;
use crate::{Error, Result};

/// Orthogonal discrete Hermite–Gauss basis for one image axis.
#[derive(Debug, Clone)]
pub struct FrftBasis {
    /// Column n is the discrete analogue of ψ_n.
    pub v: DMatrix<f64>,
}

impl FrftBasis {
    pub fn new(size: usize, center: f64, w0_px: f64) -> Self {
        let mut h = DMatrix::<f64>::zeros(size, size);
        let norm0 = PI.powf(-0.25);
        for j in 0..size {
            let t = 2f64.sqrt() * (j as f64 - center) / w0_px;
            let mut prev = norm0 * (-0.5 * t * t).exp();
            h[(j, 0)] = prev;
            if size > 1 {
                let mut cur = 2f64.sqrt() * t * prev;
                h[(j, 1)] = cur;
                for k in 1..size - 1 {
                    let kf = k as f64;
                    let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
                    h[(j, k + 1)] = next;
                    prev = cur;
                    cur = next;
                }
            }
        }
        let qr = h.qr();
        let r = qr.r();
        let mut q = qr.q();
        for k in 0..size {
            if r[(k, k)] < 0.0 {
                q.column_mut(k).neg_mut();
            }
        }
        Self { v: q }
    }

    pub fn size(&self) -> usize {
        self.v.nrows()
    }
}

/// Splits a complex image into real and imaginary matrices (rows = y).
fn split(image: &ComplexFieldImage) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = image.size();
    let re = DMatrix::from_fn(n, n, |r, c| image.get(r, c).re);
    let im = DMatrix::from_fn(n, n, |r, c| image.get(r, c).im);
    (re, im)
}

fn join(template: &ComplexFieldImage, re: &DMatrix<f64>, im: &DMatrix<f64>) -> ComplexFieldImage {
    let n = template.size();
    let data = (0..n * n).map(|k| Complex64::new(re[(k / n, k % n)], im[(k / n, k % n)])).collect();
    template.with_data(data)
}

/// Hermite–Gauss coefficients C = V_yᵀ I V_x of an image, as (re, im).
fn coefficients(image: &ComplexFieldImage, bx: &FrftBasis, by: &FrftBasis) -> (DMatrix<f64>, DMatrix<f64>) {
    let (re, im) = split(image);
    (by.v.transpose() * re * &bx.v, by.v.transpose() * im * &bx.v)
}

/// Reconstructs V_y (w ∘ C) V_xᵀ with complex per-coefficient weights
/// `w(n_y, n_x)`.
fn synthesize(
    template: &ComplexFieldImage,
    bx: &FrftBasis,
    by: &FrftBasis,
    c: (DMatrix<f64>, DMatrix<f64>),
    weight: impl Fn(usize, usize) -> Complex64,
) -> ComplexFieldImage {
    let (cr, ci) = c;
    let n = cr.nrows();
    let mut wr = DMatrix::<f64>::zeros(n, n);
    let mut wi = DMatrix::<f64>::zeros(n, n);
    for ny in 0..n {
        for nx in 0..n {
            let z = Complex64::new(cr[(ny, nx)], ci[(ny, nx)]) * weight(ny, nx);
            wr[(ny, nx)] = z.re;
            wi[(ny, nx)] = z.im;
        }
    }
    let vxt = bx.v.transpose();
    let re = &by.v * wr * &vxt;
    let im = &by.v * wi * &vxt;
    join(template, &re, &im)
}

fn bases(image: &ComplexFieldImage) -> (FrftBasis, FrftBasis) {
    let n = image.size();
    let bx = FrftBasis::new(n, image.center.0, image.w0_px);
    let by = if image.center.1 == image.center.0 {
        bx.clone()
    } else {
        FrftBasis::new(n, image.center.1, image.w0_px)
    };
    (bx, by)
}

/// Two-dimensional FRFT of angle `alpha`: Hermite–Gauss component (n_x, n_y)
/// acquires the phase e^{i(n_x + n_y)α}, so α = −π/2 is the Fourier transform
/// with kernel e^{−ik·r}/(2π) in the coordinates t = √2 r/w0.
pub fn frft_apply(image: &ComplexFieldImage, alpha: f64) -> Result<ComplexFieldImage> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("FRFT angle {alpha} is not finite")));
    }
    if alpha.rem_euclid(2.0 * PI) == 0.0 {
        return Ok(image.clone());
    }
    let (bx, by) = bases(image);
    let c = coefficients(image, &bx, &by);
    Ok(synthesize(image, &bx, &by, c, |ny, nx| {
        Complex64::from_polar(1.0, (nx + ny) as f64 * alpha)
    }))
}

/// Per-order weight of the symmetry average:
/// (1/N) Σ_{l<N} e^{−iηlMπ/N} e^{i n l Mπ/N}.
fn symmetry_weights(geom: &CavityGeometry, max_order: usize) -> Vec<Complex64> {
    let a = geom.half_trip_angle();
    let n = geom.n as usize;
    (0..=max_order)
        .map(|order| {
            let s: Complex64 = (0..n)
                .map(|l| Complex64::from_polar(1.0, l as f64 * a * (order as f64 - geom.eta as f64)))
                .sum();
            s / n as f64
        })
        .collect()
}

/// Cavity symmetry filter F̃ = (1/N) Σ_l e^{−iηlMπ/N} FRFT(lMπ/N).
///
/// For even M this is the orthogonal projector onto Hermite–Gauss orders
/// n ≡ η (mod N).
pub fn symmetry_average(image: &ComplexFieldImage, geom: &CavityGeometry) -> Result<ComplexFieldImage> {
    let (bx, by) = bases(image);
    Ok(symmetry_project(image, geom, &bx, &by))
}

/// [`symmetry_average`] with precomputed bases.
pub fn symmetry_project(
    image: &ComplexFieldImage,
    geom: &CavityGeometry,
    bx: &FrftBasis,
    by: &FrftBasis,
) -> ComplexFieldImage {
    let w = symmetry_weights(geom, 2 * image.size());
    let c = coefficients(image, bx, by);
    synthesize(image, bx, by, c, |ny, nx| w[nx + ny])
}

/// One-dimensional FRFT of angle `alpha` by chirp multiplication, chirp
/// convolution and chirp multiplication on samples `f(t_j)`,
/// t_j = t0 + j·dt. Same phase convention as [`frft_apply`].
///
/// Direct O(n²) evaluation, intended as a reference. Logs a warning when the
/// convolution chirp is undersampled over the grid.
pub fn frft_chirp(f: &[Complex64], t0: f64, dt: f64, alpha: f64) -> Vec<Complex64> {
    // Standard kernel at angle a = −α.
    let a = -alpha;
    let (s, c) = a.sin_cos();
    if s.abs() < 1e-12 {
        return if c > 0.0 { f.to_vec() } else { f.iter().rev().copied().collect() };
    }
    let n = f.len();
    let t = |j: usize| t0 + j as f64 * dt;
    let t_max = t(0).abs().max(t(n - 1).abs());
    if 2.0 * t_max * dt / s.abs() > PI {
        log::warn!("frft_chirp: chirp undersampled at alpha = {alpha} (|t| up to {t_max}, dt = {dt})");
    }
    let cot = c / s;
    let pre = |x: f64| Complex64::from_polar(1.0, 0.5 * (cot - 1.0 / s) * x * x);
    let amp = (Complex64::new(1.0, -cot) / (2.0 * PI)).sqrt() * dt;
    let g: Vec<Complex64> = (0..n).map(|j| f[j] * pre(t(j))).collect();
    (0..n)
        .map(|k| {
            let tk = t(k);
            let conv: Complex64 = (0..n)
                .map(|j| g[j] * Complex64::from_polar(1.0, 0.5 * (tk - t(j)).powi(2) / s))
                .sum();
            amp * pre(tk) * conv
        })
        .collect()
}
