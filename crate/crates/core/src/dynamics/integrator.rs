//! Adaptive Dormand–Prince 5(4) stepping.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`. After every accepted step
/// `post` may project the state; it returns `false` to reject the step.
pub(crate) fn dopri5(
    f: &dyn Fn(f64, &[f64], &mut [f64]),
    post: &dyn Fn(&mut [f64]) -> bool,
    y: &mut [f64],
    t0: f64,
    t1: f64,
    h0: f64,
    ctl: StepControl,
) -> Result<(f64, usize)> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    let mut h = h0.min(t1 - t0);
    let mut steps = 0;
    if t1 <= t0 {
        return Ok((h0, 0));
    }
    f(t, y, &mut k[0]);
    while t < t1 {
        if steps >= ctl.max_steps {
            return Err(Error::Integrator { t, reason: format!("exceeded {} steps", ctl.max_steps) });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut a5 = 0.0;
            let mut a4 = 0.0;
            for s in 0..7 {
                a5 += B5[s] * k[s][i];
                a4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + h * a5;
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (a5 - a4) / sc).abs());
        }
        steps += 1;
        if !err.is_finite() {
            return Err(Error::Integrator { t, reason: "non-finite state".into() });
        }
        let accept = err <= 1.0 && post(&mut y5);
        if accept {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y5);
            f(t, y, &mut k[0]);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if accept { factor } else { factor.min(0.5) };
        if h < 1e-14 * t1.abs().max(1.0) {
            return Err(Error::Integrator { t, reason: format!("step size underflow ({h:e})") });
        }
    }
    Ok((h, steps))
}
