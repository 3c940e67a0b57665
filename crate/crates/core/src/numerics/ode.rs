//! Dormand-Prince 5(4) integrator with output at prescribed abscissae.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            min_step: 1e-14,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(x, y)` from `x0` and records the state at each
/// abscissa of `outputs` (non-decreasing, all `>= x0`).
pub fn integrate<const N: usize, F>(
    rhs: F,
    x0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: OdeOptions,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut result = Vec::with_capacity(outputs.len());
    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs(x, &y);
    let span = outputs.last().map_or(0.0, |&xe| xe - x0);
    let mut h = (span.abs() / 100.0).clamp(1e-6, opts.max_step.min(0.1));

    for &target in outputs {
        if target < x {
            return Err(Error::Value(format!(
                "ODE output abscissa {target} precedes current position {x}"
            )));
        }
        while x < target {
            let remaining = target - x;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let k2 = rhs(x + C2 * step, &axpy(&y, &[(A21, &k1)], step));
            let k3 = rhs(x + C3 * step, &axpy(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = rhs(
                x + C4 * step,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step),
            );
            let k5 = rhs(
                x + C5 * step,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
            );
            let k6 = rhs(
                x + step,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    step,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                step,
            );
            let x_new = if last { target } else { x + step };
            let k7 = rhs(x_new, &y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let ratio = (e / sc).abs();
                err = if ratio.is_nan() { f64::INFINITY } else { err.max(ratio) };
            }

            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a truncated final step says nothing about the natural step size
                if !last {
                    h = (step * grow).min(opts.max_step);
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < opts.min_step {
                    return Err(Error::StepFailure { x, step: h });
                }
            }
        }
        result.push(y);
    }
    Ok(result)
}
