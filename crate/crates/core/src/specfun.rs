//! Real special functions: log-gamma, digamma, trigamma, log-beta and the
//! Hurwitz zeta function for real order > 1.
//!
//! The checked entry points ([`log_gamma`], [`digamma`], [`trigamma`],
//! [`log_beta`]) validate their arguments and return [`Error::Domain`].
//! The raw kernels ([`ln_gamma`], [`psi`], [`psi1`], [`ln_beta`]) skip the
//! check and return NaN outside the domain; they are what the hot loops use.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Argument above which the asymptotic expansions are used directly.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

// Bernoulli numbers B_2 .. B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// ζ(k) − 1 for k = 2..=ZETA_TABLE_LEN+1.
const ZETA_TABLE_LEN: usize = 40;

fn zeta_minus_one() -> &'static [f64; ZETA_TABLE_LEN] {
    static TABLE: OnceLock<[f64; ZETA_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; ZETA_TABLE_LEN];
        for (i, v) in t.iter_mut().enumerate() {
            *v = hurwitz_zeta((i + 2) as f64, 2.0);
        }
        t
    })
}

/// Σ_{k≥2} (−1)^k (ζ(k)−1) ε^k / k, convergent for |ε| < 2.
fn lgamma_series_tail(eps: f64) -> f64 {
    let z = zeta_minus_one();
    let mut pow = -eps;
    let mut acc = 0.0;
    for (i, zk) in z.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        let term = zk * pow / k;
        acc += term;
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
    }
    acc
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(7) {
        let two_k = 2.0 * (k + 1) as f64;
        corr += b / (two_k * (two_k - 1.0)) * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr
}

/// ln Γ(x) for x > 0 without argument validation.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x with x+1 in [1, 1.5)
        let eps = x;
        return -x.ln() - EULER_GAMMA * eps - eps.ln_1p() + eps + lgamma_series_tail(eps);
    }
    if x < 1.5 {
        let eps = x - 1.0;
        return -eps.ln_1p() + eps * (1.0 - EULER_GAMMA) + lgamma_series_tail(eps);
    }
    if x < 2.5 {
        let eps = x - 2.0;
        return eps * (1.0 - EULER_GAMMA) + lgamma_series_tail(eps);
    }
    if x >= ASYMPTOTIC_THRESHOLD {
        return stirling_ln_gamma(x);
    }
    let mut prod = 1.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        prod *= z;
        z += 1.0;
    }
    stirling_ln_gamma(z) - prod.ln()
}

/// ψ(x) for x > 0 without argument validation.
pub fn psi(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Σ B_2k / (2k z^{2k}), k = 1..7
    let mut series = 0.0;
    let mut p = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(7) {
        series += b / (2.0 * (k + 1) as f64) * p;
        p *= inv2;
    }
    shift + z.ln() - 0.5 * inv - series
}

/// ψ₁(x) for x > 0 without argument validation.
pub fn psi1(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv2 * inv;
    for b in BERNOULLI_EVEN.iter().take(7) {
        series += b * p;
        p *= inv2;
    }
    shift + inv + 0.5 * inv2 + series
}

/// ln B(a, b) without argument validation.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(func, format!("argument must be finite and > 0, got {x}")))
    }
}

/// ln Γ(x), x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    Ok(ln_gamma(x))
}

/// Digamma ψ(x) = Γ′(x)/Γ(x), x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(psi(x))
}

/// Trigamma ψ₁(x) = (ln Γ(x))″, x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(psi1(x))
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    check_positive("log_beta", a)?;
    check_positive("log_beta", b)?;
    Ok(ln_beta(a, b))
}

/// Hurwitz zeta ζ(s, x) = Σ_{q≥0} (x+q)^{−s} for s > 1, x > 0.
///
/// Direct summation of the first N terms followed by the Euler–Maclaurin
/// tail; N grows with s so the tail correction stays tiny.
pub fn hurwitz_zeta(s: f64, x: f64) -> f64 {
    if !(s > 1.0) || !(x > 0.0) {
        return f64::NAN;
    }
    let n_direct = (12.0_f64).max(s.ceil()) as usize;
    let mut head = 0.0;
    for q in (0..n_direct).rev() {
        head += (x + q as f64).powf(-s);
    }
    let a = x + n_direct as f64;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // B_2t/(2t)! * s(s+1)...(s+2t-2) * a^{-s-2t+1}
    let mut rising = s; // s(s+1)...(s+2t-2) for t = 1
    let mut fact = 2.0; // (2t)!
    let mut apow = a.powf(-s - 1.0);
    let inv_a2 = 1.0 / (a * a);
    for (t, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * apow;
        tail += term;
        if term.abs() < 1e-18 * (head + tail).abs() {
            break;
        }
        let t1 = (t + 1) as f64;
        rising *= (s + 2.0 * t1 - 1.0) * (s + 2.0 * t1);
        fact *= (2.0 * t1 + 1.0) * (2.0 * t1 + 2.0);
        apow *= inv_a2;
    }
    head + tail
}

/// ln Γ(z) for Re z > 0, up to an additive multiple of 2πi (exact after
/// exponentiation).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut prod = Complex64::new(1.0, 0.0);
    while z.norm() < 15.0 {
        prod *= z;
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(7) {
        let two_k = 2.0 * (k + 1) as f64;
        corr += p * (b / (two_k * (two_k - 1.0)));
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + corr - prod.ln()
}

/// ln |Γ(x)| for any non-integer-pole real x, via reflection for x < 0.
pub fn ln_abs_gamma(x: f64) -> f64 {
    if x > 0.0 {
        return ln_gamma(x);
    }
    if x == x.floor() {
        return f64::INFINITY;
    }
    // Γ(x)Γ(1−x) = π / sin(πx)
    (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)
}
