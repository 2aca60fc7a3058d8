//! Closed-form complex Gaussian integrals.

use num_complex::Complex64;
use std::f64::consts::PI;

/// ∫ exp(−a x² + b x + c) dx for Re a > 0 (principal square root).
pub(crate) fn gauss_1d(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    (PI / a).sqrt() * (b * b / (4.0 * a) + c).exp()
}

/// ∫ g(x′) e^{i(β x′² − γ X x′)} dx′ and the same with the HG1 factor
/// √2 (x′ − x0)/σ, for g the normalized Gaussian of mean x0 and width σ.
pub(crate) fn chirped_gaussian(x0: f64, sigma: f64, beta: f64, gamma_x: f64) -> (Complex64, Complex64) {
    let a = Complex64::new(1.0 / (2.0 * sigma * sigma), -beta);
    let b = Complex64::new(x0 / (sigma * sigma), -gamma_x);
    let c = Complex64::new(-x0 * x0 / (2.0 * sigma * sigma), 0.0);
    let i0 = gauss_1d(a, b, c) / ((2.0 * PI).sqrt() * sigma);
    let mean = b / (2.0 * a);
    (i0, 2f64.sqrt() / sigma * (mean - x0) * i0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_trapezoid_sum() {
        let (x0, s, beta, gx) = (3.0, 1.7, 0.05, -0.4);
        let h = 0.002;
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        for k in -9000..=9000 {
            let x = x0 + k as f64 * h;
            let g = (-(x - x0).powi(2) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s);
            let ph = Complex64::from_polar(1.0, beta * x * x - gx * x);
            i0 += g * ph * h;
            i1 += 2f64.sqrt() * (x - x0) / s * g * ph * h;
        }
        let (a, b) = chirped_gaussian(x0, s, beta, gx);
        assert!((a - i0).norm() < 1e-12 && (b - i1).norm() < 1e-12, "{a} {i0} {b} {i1}");
    }
}
