//! Adaptive Dormand–Prince 5(4) integrator with dense stopping at output nodes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn relative(rtol: f64) -> Self {
        Tolerance { rtol, atol: rtol * 1e-3 }
    }
}

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
// Fifth-order weights equal the last row of A (FSAL); E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 200_000;

/// Integrates `y' = f(x, y)` from `(x0, y0)` and returns `y` at each node of
/// `outputs` (monotone in the direction of integration, all beyond `x0`).
///
/// Steps are clipped to land exactly on output nodes, so results do not
/// depend on interpolation.
pub fn integrate<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: [f64; N],
    outputs: &[f64],
    tol: Tolerance,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(out);
    }
    let dir = (outputs[outputs.len() - 1] - x0).signum();
    let mut x = x0;
    let mut y = y0;
    let span = (outputs[outputs.len() - 1] - x0).abs();
    let mut h = dir * (span * 1e-3).max(1e-12 * x0.abs().max(1.0)).min(span.max(f64::MIN_POSITIVE));
    let mut k0 = f(x, &y);
    let mut steps = 0usize;
    for &target in outputs {
        if (target - x) * dir < 0.0 {
            return Err(Error::Domain(format!("output node {target} precedes current point {x}")));
        }
        while (target - x) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Precision(format!("step budget exhausted near x = {x}")));
            }
            let last = (x + h - target) * dir >= 0.0;
            let hs = if last { target - x } else { h };
            let (y_new, k_last, err) = stage(&mut f, x, &y, &k0, hs, tol);
            if !err.is_finite() {
                h *= 0.25;
                if h.abs() < 1e-14 * x.abs().max(1e-300) {
                    return Err(Error::Precision(format!("non-finite derivative near x = {x}")));
                }
                continue;
            }
            if err <= 1.0 {
                x = if last { target } else { x + hs };
                y = y_new;
                k0 = k_last;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac > 1.0 {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < 16.0 * f64::EPSILON * x.abs().max(1e-300) {
                    return Err(Error::Precision(format!(
                        "step size underflow near x = {x} (tolerance {:e})",
                        tol.rtol
                    )));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn stage<const N: usize, F>(
    f: &mut F,
    x: f64,
    y: &[f64; N],
    k0: &[f64; N],
    h: f64,
    tol: Tolerance,
) -> ([f64; N], [f64; N], f64)
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if s == 6 {
            k[6] = f(x + h, &ys);
            let mut err = 0.0f64;
            for i in 0..N {
                let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
                let sc = tol.atol + tol.rtol * y[i].abs().max(ys[i].abs());
                err = err.max((e / sc).abs());
            }
            return (ys, k[6], err);
        }
        k[s] = f(x + C[s] * h, &ys);
    }
    unreachable!()
}
