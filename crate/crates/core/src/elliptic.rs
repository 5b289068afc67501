//! Jacobi elliptic functions and complete elliptic integrals for moduli
//! `k ∈ [0, √2)`.
//!
//! For `k < 1` the functions are computed with the descending Landen
//! scheme in Bulirsch's form: the AGM sequence of `(1, k')`, `k' = √(1-k²)`,
//! is run forward, then the cotangent of the amplitude and `dn` are
//! recovered by a backward recurrence,
//!
//! ```text
//! aₙ₊₁ = (aₙ + bₙ)/2,  bₙ₊₁ = √(aₙ bₙ)
//! dnⱼ = (bⱼ + rⱼ)/(aⱼ + rⱼ)
//! ```
//!
//! which keeps `cn` and `dn` accurate in relative terms even where they are
//! tiny (near the quarter period with `k` close to 1).
//!
//! Moduli `k > 1` go through the real transformation with `κ = 1/k`:
//!
//! ```text
//! sn(u; k) = sn(ku; κ)/k,  cn(u; k) = dn(ku; κ),  dn(u; k) = cn(ku; κ)
//! ```
//!
//! When `|1 - k²| < 1e-12` and the deviation `|1 - k²| cosh²u` from the
//! soliton is below rounding, the hyperbolic limit `sn = tanh`,
//! `cn = dn = sech` is returned.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITER: usize = 40;
const EPSILON: f64 = 1e-16;
/// Below this value of `|1 - k²|` the soliton limit is used.
pub const SOLITON_SWITCH: f64 = 1e-12;
/// Step for the numerical modulus derivatives.
pub const DK_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `√(1-k²)` computed without cancellation near `k = 1`.
pub fn complementary_modulus(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

fn check_integral_modulus(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::domain(format!(
            "complete elliptic integrals need 0 <= k < 1, got {k}"
        )));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2 AGM(1, k'))`.
pub fn complete_k(k: f64) -> Result<f64> {
    check_integral_modulus(k)?;
    let (mut a, mut b) = (1.0, complementary_modulus(k));
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(FRAC_PI_2 / a)
}

/// Complete elliptic integral of the second kind,
/// `E(k) = K(k) (1 - Σ 2^{n-1} cₙ²)`.
pub fn complete_e(k: f64) -> Result<f64> {
    check_integral_modulus(k)?;
    let (mut a, mut b) = (1.0, complementary_modulus(k));
    let mut sum = 0.5 * k * k;
    let mut pow = 0.5;
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
        pow *= 2.0;
        sum += pow * c * c;
    }
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// Leading term `log(4/√(1-k²))` of `K(k)` as `k → 1`.
pub fn k_log_expansion(k: f64) -> f64 {
    (4.0 / complementary_modulus(k)).ln()
}

fn hyperbolic(u: f64) -> Jacobi {
    let sech = 1.0 / u.cosh();
    Jacobi {
        sn: u.tanh(),
        cn: sech,
        dn: sech,
    }
}

fn landen(u: f64, k: f64) -> Jacobi {
    if k == 0.0 {
        return Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        };
    }
    // AGM of (1, k'); the convergence test uses sqrt(eps) because the next
    // mean is then exact to rounding.
    let mut a_seq = [0.0; MAX_ITER];
    let mut b_seq = [0.0; MAX_ITER];
    let (mut a, mut b) = (1.0, complementary_modulus(k));
    let mut n = 0;
    let mut mean;
    loop {
        a_seq[n] = a;
        b_seq[n] = b;
        n += 1;
        mean = 0.5 * (a + b);
        if (a - b).abs() <= 1e-8 * a || n == MAX_ITER {
            break;
        }
        b = (a * b).sqrt();
        a = mean;
    }
    let phi = u * mean;
    let (sn0, cn0) = phi.sin_cos();
    if sn0 == 0.0 {
        return Jacobi {
            sn: sn0,
            cn: cn0,
            dn: 1.0,
        };
    }
    // Backward recurrence on the cotangent of the amplitude; avoids the
    // cancellation in cos φ₀ and dn near the quarter period.
    let mut cot = mean * cn0 / sn0;
    let mut r = cn0 / sn0;
    let mut dn = 1.0;
    for j in (0..n).rev() {
        r *= cot;
        cot *= dn;
        dn = (b_seq[j] + r) / (a_seq[j] + r);
        r = cot / a_seq[j];
    }
    let sn = (1.0 / (cot * cot + 1.0).sqrt()).copysign(sn0);
    Jacobi {
        sn,
        cn: cot * sn,
        dn,
    }
}

/// Jacobi elliptic functions `sn, cn, dn` at argument `u` and modulus `k ∈ [0, √2)`.
pub fn jacobi(u: f64, k: f64) -> Result<Jacobi> {
    if !(0.0..SQRT_2).contains(&k) {
        return Err(Error::domain(format!(
            "modulus must lie in [0, sqrt 2), got {k}"
        )));
    }
    let gap = (1.0 - k) * (1.0 + k);
    if gap.abs() < SOLITON_SWITCH && gap.abs() * u.cosh().powi(2) < EPSILON {
        return Ok(hyperbolic(u));
    }
    if k < 1.0 {
        return Ok(landen(u, k));
    }
    let kappa = 1.0 / k;
    let t = landen(k * u, kappa);
    Ok(Jacobi {
        sn: t.sn / k,
        cn: t.dn,
        dn: t.cn,
    })
}

fn check_profile_modulus(k: f64) -> Result<()> {
    if !(k > 0.0 && k < SQRT_2) {
        return Err(Error::domain(format!(
            "profile modulus must lie in (0, sqrt 2), got {k}"
        )));
    }
    Ok(())
}

/// Positive single-hump solution of `-Ψ'' + Ψ - 2Ψ³ = 0`:
/// `Ψ(z) = dn(z/√(2-k²); k)/√(2-k²)`; `sech z` at `k = 1`.
pub fn dnoidal_profile(z: f64, k: f64) -> Result<f64> {
    check_profile_modulus(k)?;
    let s = (2.0 - k * k).sqrt();
    Ok(jacobi(z / s, k)?.dn / s)
}

/// `Ψ'(z) = -k²/(2-k²) · sn · cn` at the argument `z/√(2-k²)`.
pub fn dnoidal_slope(z: f64, k: f64) -> Result<f64> {
    check_profile_modulus(k)?;
    let s2 = 2.0 - k * k;
    let j = jacobi(z / s2.sqrt(), k)?;
    Ok(-k * k / s2 * j.sn * j.cn)
}

/// Sign-changing periodic solution `κ/√(2κ²-1) · cn(z/√(2κ²-1); κ)` for `κ ∈ (1/√2, 1]`.
pub fn cnoidal_profile(z: f64, kappa: f64) -> Result<f64> {
    if !(kappa > std::f64::consts::FRAC_1_SQRT_2 && kappa <= 1.0) {
        return Err(Error::domain(format!(
            "cnoidal modulus must lie in (1/sqrt 2, 1], got {kappa}"
        )));
    }
    let s = (2.0 * kappa * kappa - 1.0).sqrt();
    Ok(kappa / s * jacobi(z / s, kappa)?.cn)
}

/// Closed-form modulus derivatives at `k = 1`.
pub fn dk_jacobi_at_one(xi: f64) -> Jacobi {
    let (sh, ch) = (xi.sinh(), xi.cosh());
    let (sech, tanh) = (1.0 / ch, xi.tanh());
    Jacobi {
        sn: -0.5 * (sh * ch - xi) * sech * sech,
        cn: 0.5 * (sh * ch - xi) * tanh * sech,
        dn: -0.5 * (sh * ch + xi) * tanh * sech,
    }
}

/// Derivatives of `(sn, cn, dn)` with respect to `k` at fixed `u`.
///
/// Exact at `k = 1`; elsewhere the five-point centered difference with step
/// [`DK_STEP`] (shrunk near the ends of the modulus range).
pub fn dk_jacobi(u: f64, k: f64) -> Result<Jacobi> {
    if k == 1.0 {
        return Ok(dk_jacobi_at_one(u));
    }
    check_profile_modulus(k)?;
    let h = DK_STEP.min(0.25 * k).min(0.25 * (SQRT_2 - k));
    let f = |dk: f64| jacobi(u, k + dk);
    let (m2, m1, p1, p2) = (f(-2.0 * h)?, f(-h)?, f(h)?, f(2.0 * h)?);
    let d = |a: f64, b: f64, c: f64, e: f64| (a - 8.0 * b + 8.0 * c - e) / (12.0 * h);
    Ok(Jacobi {
        sn: d(m2.sn, m1.sn, p1.sn, p2.sn),
        cn: d(m2.cn, m1.cn, p1.cn, p2.cn),
        dn: d(m2.dn, m1.dn, p1.dn, p2.dn),
    })
}
