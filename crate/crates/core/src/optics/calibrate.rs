use serde::{Deserialize, Serialize};

use super::frft::{symmetry_project, FrftBasis};
use super::geometry::CavityGeometry;
use super::image::ComplexFieldImage;
use crate::optim::nelder_mead;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationOptions {
    /// Relative tolerance on each parameter.
    pub param_rtol: f64,
    /// Absolute tolerance on the spread of cost values, relative to ½‖I‖².
    pub cost_tol: f64,
    pub max_evaluations: usize,
    /// Fresh simplices started from the incumbent after convergence.
    pub restarts: usize,
    /// Initial simplex step for w0_px, as a fraction.
    pub waist_step: f64,
    /// Initial simplex step for the center, in pixels.
    pub center_step: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { param_rtol: 1e-4, cost_tol: 1e-8, max_evaluations: 2000, restarts: 2, waist_step: 0.02, center_step: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub w0_px: f64,
    pub x_c: f64,
    pub y_c: f64,
    /// Final cost ½‖F̃I − I‖².
    pub cost: f64,
    pub evaluations: usize,
}

/// Cost ½ Σ |F̃[I] − I|² with the filter referenced to (w0_px, x_c, y_c).
pub fn calibration_cost(image: &ComplexFieldImage, geom: &CavityGeometry, w0_px: f64, x_c: f64, y_c: f64) -> f64 {
    if !(w0_px > 0.0) {
        return f64::INFINITY;
    }
    let n = image.size();
    let bx = FrftBasis::new(n, x_c, w0_px);
    let by = FrftBasis::new(n, y_c, w0_px);
    let mut probe = image.clone();
    probe.center = (x_c, y_c);
    probe.w0_px = w0_px;
    let filtered = symmetry_project(&probe, geom, &bx, &by);
    0.5 * filtered.data().iter().zip(image.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
}

/// Finds the cavity center and waist that make the image most invariant
/// under the symmetry filter, starting from the image's own metadata.
pub fn calibrate_center_waist(
    image: &ComplexFieldImage,
    geom: &CavityGeometry,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    let scale = image.power();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateImage("field is identically zero or not finite".into()));
    }
    // Work with a normalized cost so that tolerances are scale free.
    let mut cost = |p: &[f64]| calibration_cost(image, geom, p[0], p[1], p[2]) / (0.5 * scale);
    let mut x = vec![image.w0_px, image.center.0, image.center.1];
    let mut fx = cost(&x);
    let mut evaluations = 1;
    let mut converged = false;
    for _ in 0..=opts.restarts {
        let step = [x[0] * opts.waist_step, opts.center_step, opts.center_step];
        let xtol: Vec<f64> = x.iter().map(|v| opts.param_rtol * v.abs().max(1.0)).collect();
        let budget = opts.max_evaluations.saturating_sub(evaluations);
        if budget == 0 {
            break;
        }
        let r = nelder_mead(&mut cost, &x, &step, &xtol, opts.cost_tol, budget);
        evaluations += r.evaluations;
        let improved = fx - r.f;
        if r.f <= fx {
            x = r.x;
            fx = r.f;
        }
        converged = r.converged;
        if converged && improved <= opts.cost_tol {
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "center/waist calibration".into(), iterations: evaluations });
    }
    Ok(Calibration { w0_px: x[0], x_c: x[1], y_c: x[2], cost: fx * 0.5 * scale, evaluations })
}
