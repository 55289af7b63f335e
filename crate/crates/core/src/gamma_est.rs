//! Estimators for the Gamma(α, λ) family (shape α, rate λ).
//!
//! The UMVUEs depend on the data only through X = Σxᵢ and
//! Y = (geometric mean / arithmetic mean)^n and need the coefficient table
//! of [`crate::gseries`]. The Ye–Chen and Louzada estimators are closed
//! forms in the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gseries::CoeffTable;
use crate::numkit::NeumaierSum;
use crate::specfun::{psi, psi1};

/// Largest n for which the UMVUE paths build a coefficient table.
pub const UMVUE_N_MAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("lambda", lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain("GammaParams", format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(GammaParams { alpha, lambda })
    }
}

/// A validated sample: at least two positive finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSample {
    data: Vec<f64>,
}

impl GammaSample {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Precondition(format!("need at least 2 observations, got {}", data.len())));
        }
        if let Some((i, v)) = data.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::domain("GammaSample", format!("observation {i} = {v} is not positive and finite")));
        }
        Ok(GammaSample { data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    fn mean(&self) -> f64 {
        self.data.iter().copied().collect::<NeumaierSum>().value() / self.n() as f64
    }
}

/// (X, Y) with Y carried as log Y; 1 − Y is kept separately so that
/// near-constant samples do not lose it to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStat {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub log_y: f64,
    pub one_minus_y: f64,
}

/// X = Σxᵢ and log Y = Σ log(xᵢ/x̄).
pub fn suff_stat(s: &GammaSample) -> SufficientStat {
    let n = s.n();
    let mean = s.mean();
    let all_equal = s.data.iter().all(|&v| v == s.data[0]);
    let log_y = if all_equal {
        0.0
    } else {
        s.data
            .iter()
            .map(|&v| ((v - mean) / mean).ln_1p())
            .collect::<NeumaierSum>()
            .value()
            .min(0.0)
    };
    SufficientStat {
        n,
        x: mean * n as f64,
        y: log_y.exp(),
        log_y,
        one_minus_y: -log_y.exp_m1(),
    }
}

fn check_table(stat: &SufficientStat, tbl: &CoeffTable) -> Result<()> {
    if tbl.n() != stat.n {
        return Err(Error::Config(format!("coefficient table is for n={}, sample has n={}", tbl.n(), stat.n)));
    }
    Ok(())
}

fn check_nondegenerate(stat: &SufficientStat, what: &str) -> Result<()> {
    if stat.one_minus_y == 0.0 {
        return Err(Error::DegenerateSample(format!("all observations equal (Y = 1); {what} is singular")));
    }
    if stat.y == 0.0 {
        return Err(Error::Overflow(format!("Y underflows to 0 (log Y = {}); {what} unavailable", stat.log_y)));
    }
    Ok(())
}

/// u₀ = ((n−3)/2)·Y/(1−Y) − Y·G′(Y)/G(Y), the UMVUE of α (n ≥ 4).
pub fn umvue_alpha(stat: &SufficientStat, tbl: &CoeffTable) -> Result<f64> {
    if stat.n < 4 {
        return Err(Error::Precondition(format!(
            "no unbiased estimator of alpha exists for n={} (needs n >= 4)",
            stat.n
        )));
    }
    check_table(stat, tbl)?;
    check_nondegenerate(stat, "u0")?;
    tbl.neg_y_log_derivative_h(stat.y, stat.one_minus_y)
}

/// u₁ = (n·u₀ − 1)/X, the UMVUE of λ (n ≥ 4).
pub fn umvue_lambda(stat: &SufficientStat, tbl: &CoeffTable) -> Result<f64> {
    let u0 = umvue_alpha(stat, tbl)?;
    Ok((stat.n as f64 * u0 - 1.0) / stat.x)
}

/// u₂, the UMVUE of 1/α. Uses the closed form for n = 2.
pub fn umvue_inv_alpha(stat: &SufficientStat, tbl: &CoeffTable) -> Result<f64> {
    if stat.n == 2 {
        return Ok(inv_alpha_n2(stat));
    }
    umvue_inv_alpha_integral(stat, tbl)
}

/// √(1−Y)(2 log(1+√(1−Y)) − log Y).
fn inv_alpha_n2(stat: &SufficientStat) -> f64 {
    let r = stat.one_minus_y.sqrt();
    r * (2.0 * r.ln_1p() - stat.log_y)
}

/// u₂ = H(Y)^{−1} ∫_Y¹ x^{−1}H(x) dx with H(x) = (1−x)^{(n−3)/2}G(x),
/// through the coefficient table for every n ≥ 2.
pub fn umvue_inv_alpha_integral(stat: &SufficientStat, tbl: &CoeffTable) -> Result<f64> {
    if stat.n < 2 {
        return Err(Error::Precondition("u2 needs n >= 2".into()));
    }
    check_table(stat, tbl)?;
    if stat.one_minus_y == 0.0 {
        return Ok(0.0);
    }
    if stat.y == 0.0 {
        return Err(Error::Overflow(format!("Y underflows to 0 (log Y = {})", stat.log_y)));
    }
    let num = tbl.integral_h_over_x(stat.y, stat.one_minus_y)?;
    Ok(num / tbl.h_value(stat.y, stat.one_minus_y)?)
}

/// u₃ = (X/n)·u₂, the UMVUE of 1/λ.
pub fn umvue_inv_lambda(stat: &SufficientStat, tbl: &CoeffTable) -> Result<f64> {
    Ok(stat.x / stat.n as f64 * umvue_inv_alpha(stat, tbl)?)
}

/// T₂(x₁,x₂) = (x₂−x₁)(log x₂ − log x₁)/(x₁+x₂).
pub fn kernel_t2(x1: f64, x2: f64) -> f64 {
    (x2 - x1) * (x2.ln() - x1.ln()) / (x1 + x2)
}

/// T₃(x₁,x₂) = (x₂−x₁)(log x₂ − log x₁)/2.
pub fn kernel_t3(x1: f64, x2: f64) -> f64 {
    0.5 * (x2 - x1) * (x2.ln() - x1.ln())
}

/// Σ(xᵢ − x̄)(log xᵢ − mean log x)/(n−1), the U-statistic with kernel T₃;
/// unbiased for 1/λ.
pub fn yechen_inv_lambda(s: &GammaSample) -> f64 {
    let n = s.n() as f64;
    let mean = s.mean();
    let logs: Vec<f64> = s.data.iter().map(|v| v.ln()).collect();
    let mean_log = logs.iter().copied().collect::<NeumaierSum>().value() / n;
    let cov: NeumaierSum = s.data.iter().zip(&logs).map(|(&v, &l)| (v - mean) * (l - mean_log)).collect();
    cov.value() / (n - 1.0)
}

/// yechen_inv_lambda / x̄, unbiased for 1/α.
pub fn yechen_inv_alpha(s: &GammaSample) -> f64 {
    yechen_inv_lambda(s) / s.mean()
}

/// The Louzada et al. bias correction applied to â⁻¹ = `inv_alpha`.
pub fn louzada_from_inv_alpha(inv_alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    let denom = nf + (nf - 1.0) * inv_alpha;
    (nf - 3.0) / ((nf - 1.0) * inv_alpha) + 0.4 / denom * (11.0 / 3.0 - 2.0 * nf / denom)
}

pub fn louzada_alpha(s: &GammaSample) -> f64 {
    louzada_from_inv_alpha(yechen_inv_alpha(s), s.n())
}

/// Fisher information of one observation and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherGamma {
    pub j: [[f64; 2]; 2],
    pub j_inv: [[f64; 2]; 2],
}

pub fn fisher_gamma(p: &GammaParams) -> FisherGamma {
    let (a, l) = (p.alpha, p.lambda);
    let t = psi1(a);
    let det = a * t - 1.0;
    FisherGamma {
        j: [[t, -1.0 / l], [-1.0 / l, a / (l * l)]],
        j_inv: [[a / det, l / det], [l / det, l * l * t / det]],
    }
}

fn check_alpha(func: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(func, format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// Cramér–Rao bound for unbiased estimators of h(α) from n observations
/// with λ unknown: h′²/(n(ψ₁(α) − 1/α)).
pub fn cr_bound_shape(alpha: f64, hprime: f64, n: usize) -> Result<f64> {
    check_alpha("cr_bound_shape", alpha)?;
    if n == 0 {
        return Err(Error::domain("cr_bound_shape", "n must be positive"));
    }
    Ok(hprime * hprime / (psi1(alpha) - 1.0 / alpha) / n as f64)
}

/// Fisher information of Y about α: Σ_{i=1}^{n−1}[ψ₁(α) − ψ₁(α+i/n)].
pub fn j_y(alpha: f64, n: usize) -> Result<f64> {
    check_alpha("j_y", alpha)?;
    if n < 2 {
        return Err(Error::domain("j_y", format!("n must be >= 2, got {n}")));
    }
    let t = psi1(alpha);
    let nf = n as f64;
    Ok((1..n).map(|i| t - psi1(alpha + i as f64 / nf)).collect::<NeumaierSum>().value())
}

/// Bound for unbiased estimators of h(α) that depend on the data through
/// Y only: h′²/J_Y. Strictly above [`cr_bound_shape`] for h′ ≠ 0.
pub fn cr_bound_sharpened(alpha: f64, hprime: f64, n: usize) -> Result<f64> {
    Ok(hprime * hprime / j_y(alpha, n)?)
}

/// h(α) = E[(c₁/n)log Y + c₂], the variance of that estimator and the
/// derivative h′(α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficientH {
    pub value: f64,
    pub hprime: f64,
    pub variance: f64,
}

/// The functions of α estimated without loss by (c₁/n)log Y + c₂.
pub fn efficient_h(alpha: f64, n: usize, c1: f64, c2: f64) -> Result<EfficientH> {
    let jy = j_y(alpha, n)?;
    let nf = n as f64;
    let pa = psi(alpha);
    let mean_log_y: f64 = (1..n).map(|i| pa - psi(alpha + i as f64 / nf)).collect::<NeumaierSum>().value();
    let k = c1 / nf;
    Ok(EfficientH { value: k * mean_log_y + c2, hprime: k * jy, variance: k * k * jy })
}

/// ARE of the Ye–Chen estimator of 1/λ: ψ₁/(α²ψ₁² − 1).
pub fn are_inv_lambda(alpha: f64) -> f64 {
    let t = psi1(alpha);
    t / (alpha * alpha * t * t - 1.0)
}

/// ARE of the Ye–Chen estimator of α: [(αψ₁−1)(α²ψ₁+α−1)]⁻¹.
pub fn are_alpha_yechen(alpha: f64) -> f64 {
    let t = psi1(alpha);
    1.0 / ((alpha * t - 1.0) * (alpha * alpha * t + alpha - 1.0))
}

/// Every applicable estimator for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub n: usize,
    pub suffstat: SufficientStat,
    pub umvue_alpha: Option<f64>,
    pub umvue_lambda: Option<f64>,
    pub umvue_inv_alpha: Option<f64>,
    pub umvue_inv_lambda: Option<f64>,
    pub yechen_inv_lambda: f64,
    pub yechen_inv_alpha: f64,
    pub yechen_alpha: f64,
    pub yechen_lambda: f64,
    pub louzada_alpha: f64,
    pub variance_finiteness_notes: Vec<String>,
}

/// Fits everything; the UMVUEs need `tbl` for n ≥ 3 and are skipped (with
/// a note) when it is absent.
pub fn fit_gamma(s: &GammaSample, tbl: Option<&CoeffTable>) -> Result<GammaFit> {
    let stat = suff_stat(s);
    let n = s.n();
    let mut notes = Vec::new();
    let (mut ua, mut ul, mut uia, mut uil) = (None, None, None, None);
    match tbl {
        Some(t) => {
            if n >= 4 {
                let u0 = umvue_alpha(&stat, t)?;
                ua = Some(u0);
                ul = Some((n as f64 * u0 - 1.0) / stat.x);
            }
            let u2 = umvue_inv_alpha(&stat, t)?;
            uia = Some(u2);
            uil = Some(stat.x / n as f64 * u2);
        }
        None if n == 2 => {
            let u2 = inv_alpha_n2(&stat);
            uia = Some(u2);
            uil = Some(stat.x / 2.0 * u2);
        }
        None => notes.push(format!("UMVUEs not computed: no coefficient table for n={n}")),
    }
    if n < 4 {
        notes.push(format!("no unbiased estimator of alpha or lambda exists for n={n}"));
    } else if n < 6 {
        notes.push(format!("u0 (alpha) and u1 (lambda) have infinite variance for n={n} < 6"));
    } else if let Some(a) = ua {
        if a <= 2.0 / n as f64 {
            notes.push(format!(
                "u1 (lambda) variance is finite only if alpha > 2/n = {:.4}; estimated alpha {a:.4} does not clear it",
                2.0 / n as f64
            ));
        }
    }
    let yil = yechen_inv_lambda(s);
    let yia = yil / s.mean();
    Ok(GammaFit {
        n,
        suffstat: stat,
        umvue_alpha: ua,
        umvue_lambda: ul,
        umvue_inv_alpha: uia,
        umvue_inv_lambda: uil,
        yechen_inv_lambda: yil,
        yechen_inv_alpha: yia,
        yechen_alpha: 1.0 / yia,
        yechen_lambda: 1.0 / yil,
        louzada_alpha: louzada_from_inv_alpha(yia, n),
        variance_finiteness_notes: notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{minimize_scalar, Tolerance};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sample(v: &[f64]) -> GammaSample {
        GammaSample::new(v.to_vec()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn sufficient_statistic_examples() {
        let s = suff_stat(&sample(&[3.0, 3.0, 3.0]));
        assert_eq!((s.y, s.one_minus_y, s.log_y), (1.0, 0.0, 0.0));
        let s = suff_stat(&sample(&[1.0, 4.0]));
        assert_eq!(s.x, 5.0);
        assert!((s.y - 0.64).abs() < 1e-15);
        let s = suff_stat(&sample(&[1.0, 2.0, 3.0]));
        assert_eq!(s.x, 6.0);
        assert!((s.y - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sample_validation() {
        assert!(GammaSample::new(vec![1.0]).is_err());
        assert!(GammaSample::new(vec![1.0, 0.0]).is_err());
        assert!(GammaSample::new(vec![1.0, f64::NAN]).is_err());
        assert!(GammaParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn umvue_alpha_preconditions() {
        let t3 = CoeffTable::for_sample_size(3).unwrap();
        let s3 = suff_stat(&sample(&[1.0, 2.0, 3.0]));
        assert!(matches!(umvue_alpha(&s3, &t3), Err(Error::Precondition(_))));
        let t2 = CoeffTable::for_sample_size(2).unwrap();
        let s2 = suff_stat(&sample(&[1.0, 2.0]));
        assert!(matches!(umvue_lambda(&s2, &t2), Err(Error::Precondition(_))));
        let t4 = CoeffTable::for_sample_size(4).unwrap();
        let flat = suff_stat(&sample(&[2.0; 4]));
        assert!(matches!(umvue_alpha(&flat, &t4), Err(Error::DegenerateSample(_))));
        let s5 = suff_stat(&sample(&[1.0, 2.0, 3.0, 4.0, 5.0]));
        assert!(matches!(umvue_alpha(&s5, &t4), Err(Error::Config(_))));
    }

    #[test]
    fn umvue_alpha_at_half() {
        // n = 4, Y = 1/2: u0 = 0.5·0.5/0.5 + 0.5·|G′|/G with G, G′ summed
        // directly from the table
        let t = CoeffTable::for_sample_size(4).unwrap();
        let (g, dg) = t.d().iter().enumerate().fold((0.0, 0.0), |(g, dg), (m, &d)| {
            (g + d * 0.5f64.powi(m as i32), dg + m as f64 * d * 0.5f64.powi(m as i32 - 1))
        });
        let want = 0.5 + 0.5 * dg / g;
        let stat = SufficientStat { n: 4, x: 1.0, y: 0.5, log_y: 0.5f64.ln(), one_minus_y: 0.5 };
        let u0 = umvue_alpha(&stat, &t).unwrap();
        assert!(rel(u0, want) < 1e-13);
        let u1 = umvue_lambda(&stat, &t).unwrap();
        assert!((u1 * stat.x + 1.0 - 4.0 * u0).abs() < 1e-13);
    }

    #[test]
    fn umvue_alpha_is_positive_across_y() {
        for n in [4, 5, 8] {
            let t = CoeffTable::for_sample_size(n).unwrap();
            for ly in [-1e-6, -0.01, -0.3, -1.0, -3.0, -10.0, -40.0] {
                let stat = SufficientStat { n, x: 1.0, y: f64::exp(ly), log_y: ly, one_minus_y: -f64::exp_m1(ly) };
                let u0 = umvue_alpha(&stat, &t).unwrap();
                assert!(u0 > 0.0 && u0.is_finite(), "n={n} logY={ly}: {u0}");
            }
        }
    }

    #[test]
    fn n2_integral_matches_closed_form() {
        let t = CoeffTable::for_sample_size(2).unwrap();
        for (a, b) in [(1.0, 2.0), (0.3, 7.0), (1e-3, 50.0), (5.0, 5.0001)] {
            let s = sample(&[a, b]);
            let stat = suff_stat(&s);
            let t2 = kernel_t2(a, b);
            let via_int = umvue_inv_alpha_integral(&stat, &t).unwrap();
            assert!((via_int - t2).abs() < 1e-10 * t2.max(1.0), "{a},{b}: {via_int} vs {t2}");
            let closed = umvue_inv_alpha(&stat, &t).unwrap();
            assert!((closed - t2).abs() < 1e-12 * t2.max(1.0));
            let u3 = umvue_inv_lambda(&stat, &t).unwrap();
            assert!((u3 - kernel_t3(a, b)).abs() < 1e-10 * u3.max(1.0));
            assert!((yechen_inv_alpha(&s) - t2).abs() < 1e-12 * t2.max(1.0));
        }
    }

    #[test]
    fn inv_alpha_vanishes_at_y_one() {
        let t = CoeffTable::for_sample_size(5).unwrap();
        let flat = suff_stat(&sample(&[1.5; 5]));
        assert_eq!(umvue_inv_alpha(&flat, &t).unwrap(), 0.0);
        assert_eq!(umvue_inv_lambda(&flat, &t).unwrap(), 0.0);
        let near = suff_stat(&sample(&[1.0, 1.0 + 1e-6, 1.0, 1.0, 1.0 - 1e-6]));
        let u2 = umvue_inv_alpha(&near, &t).unwrap();
        assert!(u2 > 0.0 && u2 < 1e-9, "{u2}");
    }

    #[test]
    fn yechen_examples() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0]);
        let pairs: f64 = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| kernel_t3(s.data()[i], s.data()[j]))
            .sum();
        assert!((yechen_inv_lambda(&s) - pairs / 6.0).abs() < 1e-14);
        let perm = sample(&[3.0, 1.0, 4.0, 2.0]);
        assert!((yechen_inv_lambda(&s) - yechen_inv_lambda(&perm)).abs() < 1e-15);
        let scaled = sample(&[7.0, 14.0, 21.0, 28.0]);
        assert!(rel(yechen_inv_alpha(&scaled), yechen_inv_alpha(&s)) < 1e-14);
    }

    #[test]
    fn louzada_formula() {
        let want = 7.0 / 9.0 + 0.4 / 19.0 * (11.0 / 3.0 - 20.0 / 19.0);
        assert!((louzada_from_inv_alpha(1.0, 10) - want).abs() < 1e-15);
    }

    #[test]
    fn fisher_examples() {
        let f = fisher_gamma(&GammaParams::new(1.0, 1.0).unwrap());
        assert!((f.j[0][0] - PI * PI / 6.0).abs() < 1e-14);
        assert_eq!((f.j[0][1], f.j[1][0], f.j[1][1]), (-1.0, -1.0, 1.0));
    }

    #[test]
    fn cr_bounds() {
        assert_eq!(cr_bound_shape(2.0, 0.0, 10).unwrap(), 0.0);
        assert_eq!(cr_bound_sharpened(2.0, 0.0, 10).unwrap(), 0.0);
        let b = cr_bound_shape(1.0, 1.0, 1).unwrap();
        assert!(rel(b, 1.0 / (PI * PI / 6.0 - 1.0)) < 1e-14);
        // 1/(10(ψ₁(2) − 1/2)) from a 30-digit trigamma
        assert!(rel(cr_bound_shape(2.0, 1.0, 10).unwrap(), 0.689_968_909_136_587_2) < 1e-13);
        assert!(cr_bound_shape(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn sharpened_exceeds_cr() {
        for a in [0.05, 0.3, 1.0, 3.0, 30.0] {
            for n in [2, 4, 10, 50, 400] {
                let cr = cr_bound_shape(a, 1.0, n).unwrap();
                let sh = cr_bound_sharpened(a, 1.0, n).unwrap();
                assert!(sh > cr, "a={a} n={n}");
            }
        }
        let r = cr_bound_sharpened(1.0, 1.0, 1000).unwrap() / cr_bound_shape(1.0, 1.0, 1000).unwrap();
        assert!((r - 1.0).abs() < 0.01);
    }

    #[test]
    fn efficient_h_attains_bound() {
        let e = efficient_h(2.0, 5, 0.0, 3.0).unwrap();
        assert_eq!((e.value, e.variance), (3.0, 0.0));
        for (a, n, c1) in [(0.4, 3, 1.0), (2.0, 5, -2.5), (7.0, 40, 0.3)] {
            let e = efficient_h(a, n, c1, 1.0).unwrap();
            let b = cr_bound_sharpened(a, e.hprime, n).unwrap();
            assert!(rel(e.variance, b) < 1e-12);
            // hprime is the derivative of value
            let h = 1e-5;
            let fd = (efficient_h(a + h, n, c1, 1.0).unwrap().value - efficient_h(a - h, n, c1, 1.0).unwrap().value) / (2.0 * h);
            assert!(rel(fd, e.hprime) < 1e-7);
        }
    }

    #[test]
    fn are_examples() {
        let z = PI * PI / 6.0;
        assert!(rel(are_inv_lambda(1.0), z / (z * z - 1.0)) < 1e-14);
        // α = 10 from a 30-digit trigamma
        assert!(rel(are_inv_lambda(10.0), 0.992_174_404_421_235_5) < 1e-12);
        let tol = Tolerance::minimize().with_abs(1e-9);
        let r = minimize_scalar(are_inv_lambda, 0.1, 3.0, tol).unwrap();
        assert!((r.argmin - 0.920_835).abs() < 1e-4 && r.min_value > 0.964);
        let r = minimize_scalar(are_alpha_yechen, 0.05, 3.0, tol).unwrap();
        assert!((r.argmin - 0.415_41).abs() < 1e-3 && (r.min_value - 0.9281).abs() < 5e-4);
    }

    #[test]
    fn are_alpha_bounded_by_one() {
        for k in 0..=60 {
            let a = 10f64.powf(-3.0 + k as f64 * 0.1);
            let r = are_alpha_yechen(a);
            assert!(r > 0.0 && r <= 1.0 + 1e-12, "a={a}: {r}");
        }
    }

    #[test]
    fn fit_bundle() {
        let s = sample(&[0.8, 1.3, 2.2, 0.4, 3.1, 1.9]);
        let t = CoeffTable::for_sample_size(6).unwrap();
        let f = fit_gamma(&s, Some(&t)).unwrap();
        assert!(f.umvue_alpha.unwrap() > 0.0);
        assert!((f.yechen_alpha * f.yechen_inv_alpha - 1.0).abs() < 1e-15);
        let f3 = fit_gamma(&sample(&[1.0, 2.0, 3.0]), Some(&CoeffTable::for_sample_size(3).unwrap())).unwrap();
        assert!(f3.umvue_alpha.is_none() && f3.umvue_inv_alpha.is_some());
        assert!(!f3.variance_finiteness_notes.is_empty());
        let f5 = fit_gamma(&sample(&[1.0, 2.0, 3.0, 4.0, 6.0]), None).unwrap();
        assert!(f5.umvue_inv_alpha.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn scale_equivariance(data in prop::collection::vec(0.05..20.0f64, 5), c in 0.01..100.0f64) {
            let t = CoeffTable::for_sample_size(5).unwrap();
            let s = GammaSample::new(data.clone()).unwrap();
            let sc = GammaSample::new(data.iter().map(|v| v * c).collect()).unwrap();
            let (a, b) = (suff_stat(&s), suff_stat(&sc));
            let u0 = umvue_alpha(&a, &t).unwrap();
            prop_assert!(rel(umvue_alpha(&b, &t).unwrap(), u0) < 1e-10);
            prop_assert!(rel(umvue_lambda(&b, &t).unwrap(), umvue_lambda(&a, &t).unwrap() / c) < 1e-10);
            let u2 = umvue_inv_alpha(&a, &t).unwrap();
            prop_assert!(rel(umvue_inv_alpha(&b, &t).unwrap(), u2) < 1e-10);
            prop_assert!(rel(umvue_inv_lambda(&b, &t).unwrap(), c * umvue_inv_lambda(&a, &t).unwrap()) < 1e-10);
        }

        #[test]
        fn u_statistic_identity(data in prop::collection::vec(0.01..50.0f64, 2..50)) {
            let s = GammaSample::new(data.clone()).unwrap();
            let n = data.len();
            let mut acc = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    acc += kernel_t3(data[i], data[j]);
                }
            }
            let u = 2.0 * acc / (n * (n - 1)) as f64;
            prop_assert!((yechen_inv_lambda(&s) - u).abs() <= 1e-10 * u.abs().max(1.0));
        }
    }
}
