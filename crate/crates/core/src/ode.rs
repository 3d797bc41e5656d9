//! Dormand–Prince 5(4) with step-size control, reporting the state exactly
//! at a prescribed increasing list of abscissae.

use crate::{Error, Result};

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `y′ = f(x, y)` from `grid[0]` with `y(grid[0]) = y0` and returns
/// the state at every grid abscissa.
pub(crate) fn integrate_on_grid<const N: usize, F>(
    mut f: F,
    grid: &[f64],
    y0: [f64; N],
    tol: Tolerance,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out = Vec::with_capacity(grid.len());
    let Some(&x0) = grid.first() else {
        return Ok(out);
    };
    out.push(y0);
    let span = grid.last().unwrap() - x0;
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y)?;
    let mut h = (span / 100.0).max(f64::EPSILON);
    let mut steps = 0usize;

    for &target in &grid[1..] {
        while x < target {
            steps += 1;
            let remaining = target - x;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-14 * x.abs().max(span) || steps > MAX_STEPS {
                return Err(Error::StepSizeCollapse { x, step });
            }

            let k2 = f(x + C2 * step, &axpy(&y, &[(step * A21, &k1)]))?;
            let k3 = f(
                x + C3 * step,
                &axpy(&y, &[(step * A31, &k1), (step * A32, &k2)]),
            )?;
            let k4 = f(
                x + C4 * step,
                &axpy(
                    &y,
                    &[(step * A41, &k1), (step * A42, &k2), (step * A43, &k3)],
                ),
            )?;
            let k5 = f(
                x + C5 * step,
                &axpy(
                    &y,
                    &[
                        (step * A51, &k1),
                        (step * A52, &k2),
                        (step * A53, &k3),
                        (step * A54, &k4),
                    ],
                ),
            )?;
            let k6 = f(
                x + step,
                &axpy(
                    &y,
                    &[
                        (step * A61, &k1),
                        (step * A62, &k2),
                        (step * A63, &k3),
                        (step * A64, &k4),
                        (step * A65, &k5),
                    ],
                ),
            )?;
            let y_new = axpy(
                &y,
                &[
                    (step * A71, &k1),
                    (step * A73, &k3),
                    (step * A74, &k4),
                    (step * A75, &k5),
                    (step * A76, &k6),
                ],
            );
            let x_new = if last { target } else { x + step };
            let k7 = f(x_new, &y_new)?;

            let mut err = 0.0;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step <= 1e-14 * x.abs().max(span) {
                    return Err(Error::NonFiniteState { x });
                }
                h = step * MIN_FACTOR;
                continue;
            }

            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                // a step shortened to land on the target says nothing about h
                if !last || step * factor > h {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y);
    }
    Ok(out)
}
