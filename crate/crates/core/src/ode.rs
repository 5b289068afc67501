//! Adaptive Dormand–Prince 5(4) integrator for small autonomous systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Integration stops with [`Outcome::Escaped`] once any component
    /// exceeds this magnitude.
    pub escape: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-11,
            rtol: 1e-11,
            max_steps: 200_000,
            escape: 1e8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome<const N: usize> {
    Reached { y: [f64; N], steps: usize },
    Escaped { t: f64, y: [f64; N] },
}

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
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(y)` from `t = 0` to `t = t_end > 0`.
pub fn integrate<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerances,
) -> Result<Outcome<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    if !(t_end >= 0.0) {
        return Err(Error::domain(format!(
            "integration length must be non-negative, got {t_end}"
        )));
    }
    let mut t = 0.0;
    let mut y = y0;
    if t_end == 0.0 {
        return Ok(Outcome::Reached { y, steps: 0 });
    }
    let mut k1 = f(&y);
    let mut h = (0.01 * t_end).min(0.1);
    let mut steps = 0;
    while t < t_end {
        if steps >= tol.max_steps {
            return Err(Error::convergence(format!(
                "ODE integration exceeded {} steps at t = {t}",
                tol.max_steps
            )));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let k2 = f(&combine(&y, h, &[(A21, &k1)]));
        let k3 = f(&combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&combine(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ));
        let k6 = f(&combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = combine(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(&y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 * t_end {
                return Err(Error::numerical("ODE step size underflow"));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            steps += 1;
            if y.iter().any(|v| v.abs() > tol.escape) {
                return Ok(Outcome::Escaped { t, y });
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * t_end && t < t_end {
            return Err(Error::numerical("ODE step size underflow"));
        }
    }
    Ok(Outcome::Reached { y, steps })
}
