//! Emitted-field basis: the field radiated by one density component of one
//! site through the φ = 0 family Green's function, sampled on the pixel grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coupling::DensityProfile;
use crate::gaussint::chirped_gaussian;
use crate::optics::{greens_nonlocal_terms, local_weight, CavityGeometry, ComplexFieldImage, NonlocalTerm};
use crate::{Error, Result, Vec2};

/// Pixel grid of synthesized images: square, centered on the cavity axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingGrid {
    pub size: usize,
    /// Waist in pixels; the pixel pitch is w0/w0_px.
    pub w0_px: f64,
}

impl Default for ImagingGrid {
    /// 256 × 256 with w0_px = √(256/π), which balances the Hermite–Gauss
    /// bandwidth of the grid between position and spatial frequency.
    fn default() -> Self {
        Self::balanced(256)
    }
}

impl ImagingGrid {
    pub fn balanced(size: usize) -> Self {
        Self { size, w0_px: (size as f64 / PI).sqrt() }
    }

    pub fn blank(&self, geom: &CavityGeometry) -> Result<ComplexFieldImage> {
        ComplexFieldImage::centered(self.size, geom.w0_um, self.w0_px)
    }
}

/// Profile of one site along one axis: per nonlocal term the complex HG0 and
/// HG1 factors (chirp and term phase folded in), plus the local Gaussian
/// factors. A site's field is a sum of outer products of x and y factors.
#[derive(Clone)]
pub(crate) struct AxisFactors {
    nl0: Vec<Vec<Complex64>>,
    nl1: Vec<Vec<Complex64>>,
    loc0: Vec<f64>,
    loc1: Vec<f64>,
}

impl AxisFactors {
    /// (self − other)/h, the finite-difference derivative of the factors.
    pub fn difference(&self, other: &Self, h: f64) -> Self {
        let cd = |a: &[Vec<Complex64>], b: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            a.iter().zip(b).map(|(u, v)| u.iter().zip(v).map(|(p, q)| (p - q) / h).collect()).collect()
        };
        let rd = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| (p - q) / h).collect() };
        Self {
            nl0: cd(&self.nl0, &other.nl0),
            nl1: cd(&self.nl1, &other.nl1),
            loc0: rd(&self.loc0, &other.loc0),
            loc1: rd(&self.loc1, &other.loc1),
        }
    }
}

/// Density coefficients (a00, a10, a01) of one site.
pub(crate) type Coeffs = [f64; 3];

pub(crate) struct FieldModel {
    pub terms: Vec<NonlocalTerm>,
    pub local: f64,
    pub w0: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl FieldModel {
    pub fn new(image: &ComplexFieldImage, geom: &CavityGeometry) -> Result<Self> {
        let n = image.size();
        Ok(Self {
            terms: greens_nonlocal_terms(geom)?,
            local: local_weight(geom),
            w0: geom.w0_um,
            xs: (0..n).map(|c| image.x_um(c)).collect(),
            ys: (0..n).map(|r| image.y_um(r)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn check_coverage(&self, center: Vec2, d: &DensityProfile) -> Result<()> {
        let (x0, x1) = (self.xs[0], *self.xs.last().unwrap());
        let (y0, y1) = (self.ys[0], *self.ys.last().unwrap());
        let mx = 3.0 * d.sigma_x;
        let my = 3.0 * d.sigma_y;
        if center[0] - mx < x0 || center[0] + mx > x1 || center[1] - my < y0 || center[1] + my > y1 {
            return Err(Error::GridCoverage(format!(
                "site at ({:.1}, {:.1}) µm lies outside the imaged region [{x0:.1}, {x1:.1}] × [{y0:.1}, {y1:.1}] µm",
                center[0], center[1]
            )));
        }
        Ok(())
    }

    /// Factors along x (`is_x`, carrying the term phase) or y for a site
    /// centered at `c` with width `s` on that axis.
    pub fn axis(&self, is_x: bool, c: f64, s: f64) -> AxisFactors {
        let coords = if is_x { &self.xs } else { &self.ys };
        let (mut nl0, mut nl1) = (Vec::with_capacity(self.terms.len()), Vec::with_capacity(self.terms.len()));
        for t in &self.terms {
            let (beta, gamma) = t.beta_gamma(self.w0);
            let phase = if is_x { t.phase } else { 0.0 };
            let (f0, f1): (Vec<Complex64>, Vec<Complex64>) = coords
                .iter()
                .map(|&x| {
                    let (i0, i1) = chirped_gaussian(c, s, beta, gamma * x);
                    let p = Complex64::from_polar(1.0, phase + beta * x * x);
                    (p * i0, p * i1)
                })
                .unzip();
            nl0.push(f0);
            nl1.push(f1);
        }
        let loc0: Vec<f64> = coords.iter().map(|&x| gauss(x - c, s)).collect();
        let loc1 = coords.iter().zip(&loc0).map(|(&x, g)| g * 2f64.sqrt() * (x - c) / s).collect();
        AxisFactors { nl0, nl1, loc0, loc1 }
    }

    pub fn site_axes(&self, center: Vec2, d: &DensityProfile) -> (AxisFactors, AxisFactors) {
        (self.axis(true, center[0], d.sigma_x), self.axis(false, center[1], d.sigma_y))
    }

    /// Adds amp · (a00 f00 + a10 f10 + a01 f01) for the site described by
    /// the factors, row-major over the image.
    pub fn render(&self, acc: &mut [f64], fx: &AxisFactors, fy: &AxisFactors, a: Coeffs, amp: f64, include_local: bool) {
        let nx = self.xs.len();
        let [a00, a10, a01] = a;
        let (mut ur, mut ui, mut vr, mut vi) = (vec![0.0; nx], vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]);
        for (k, t) in self.terms.iter().enumerate() {
            // Im[(u ⊗ y0) + (v ⊗ y1)] with u = a00 x0 + a10 x1 and v = a01 x0.
            for c in 0..nx {
                let u = fx.nl0[k][c] * a00 + fx.nl1[k][c] * a10;
                let v = fx.nl0[k][c] * a01;
                (ur[c], ui[c], vr[c], vi[c]) = (u.re, u.im, v.re, v.im);
            }
            let w = amp * t.weight;
            for (r, row) in acc.chunks_exact_mut(nx).enumerate() {
                let (y0, y1) = (fy.nl0[k][r] * w, fy.nl1[k][r] * w);
                for c in 0..nx {
                    row[c] += ur[c] * y0.im + ui[c] * y0.re + vr[c] * y1.im + vi[c] * y1.re;
                }
            }
        }
        if include_local {
            for c in 0..nx {
                ur[c] = a00 * fx.loc0[c] + a10 * fx.loc1[c];
                vr[c] = a01 * fx.loc0[c];
            }
            let w = amp * self.local;
            for (r, row) in acc.chunks_exact_mut(nx).enumerate() {
                let (y0, y1) = (fy.loc0[r] * w, fy.loc1[r] * w);
                for c in 0..nx {
                    row[c] += ur[c] * y0 + vr[c] * y1;
                }
            }
        }
    }

    /// Field of a site with its density coefficients applied, scaled by `amp`.
    pub fn accumulate(&self, acc: &mut [f64], center: Vec2, d: &DensityProfile, amp: f64, include_local: bool) {
        let (fx, fy) = self.site_axes(center, d);
        self.render(acc, &fx, &fy, [d.a00, d.a10, d.a01], amp, include_local);
    }
}

fn gauss(x: f64, s: f64) -> f64 {
    (-x * x / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
}
