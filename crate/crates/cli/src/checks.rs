//! The `verify` suites: deterministic numerical identities and seeded
//! Monte Carlo experiments.

use serde::Serialize;

use umvue::beta_est::{delta_matrix, delta_via_jacobian, stein_identity_check, v_entries, v_sq_un, BetaParams};
use umvue::gamma_est::{kernel_t2, kernel_t3, suff_stat, umvue_inv_alpha_integral, umvue_inv_lambda, GammaSample};
use umvue::gseries::{build_coeffs, log_k, normalization_integral, unbiasedness_sum, CoeffTable};
use umvue::mc::{beta_clt_check, beta_variate, run_experiment, skewness_check, stream_rng, Estimator, ExperimentSpec};
use umvue::specfun::ln_gamma;
use umvue::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Check::new(name, pass, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn identities() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(Check::from_result("unbiasedness_identity", unbiasedness()));
    out.push(Check::from_result("density_normalization", normalization()));
    out.push(Check::from_result("n3_closed_form_coefficients", n3_closed_form()));
    out.push(Check::from_result("n2_closed_form_estimators", n2_closed_forms()));
    out.push(Check::from_result("delta_cross_check", delta_cross_check()));
    out.push(Check::from_result("stein_identity", stein()));
    out
}

fn unbiasedness() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [4, 5, 6] {
        let t = CoeffTable::for_sample_size(n)?;
        for a in [0.5, 1.0, 2.0] {
            let want = (-ln_gamma(a) - log_k(n, a)?).exp();
            worst = worst.max(rel(unbiasedness_sum(&t, a)?, want));
        }
    }
    Ok((worst <= 1e-8, format!("max rel error {worst:.2e} (tol 1e-8)")))
}

fn normalization() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5, 6] {
        let t = CoeffTable::for_sample_size(n)?;
        for a in [0.5, 1.0, 2.5] {
            worst = worst.max((normalization_integral(&t, a)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |integral - 1| {worst:.2e} (tol 1e-8)")))
}

fn n3_closed_form() -> Result<(bool, String)> {
    let t = build_coeffs(3, 200)?;
    let scale = 2.0 * std::f64::consts::PI / 3f64.sqrt();
    let worst = (0..=200)
        .map(|m| {
            let mf = m as f64;
            let closed = (ln_gamma(3.0 * mf + 1.0) - 3.0 * (mf * 3f64.ln() + ln_gamma(mf + 1.0))).exp();
            rel(t.d()[m], scale * closed)
        })
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("d_m vs (2pi/sqrt3)(3m)!/(3^m m!)^3, m <= 200: max rel error {worst:.2e}")))
}

fn n2_closed_forms() -> Result<(bool, String)> {
    let t = CoeffTable::for_sample_size(2)?;
    let mut rng = stream_rng(2, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a: f64 = (beta_variate(&mut rng, 1.0, 1.0) * 8.0 - 4.0).exp();
        let b: f64 = (beta_variate(&mut rng, 1.0, 1.0) * 8.0 - 4.0).exp();
        let s = suff_stat(&GammaSample::new(vec![a, b])?);
        let u2 = umvue_inv_alpha_integral(&s, &t)?;
        let u3 = umvue_inv_lambda(&s, &t)?;
        let t2 = kernel_t2(a, b);
        let t3 = kernel_t3(a, b);
        worst = worst.max((u2 - t2).abs() / t2.max(1.0)).max((u3 - t3).abs() / t3.max(1.0));
    }
    Ok((worst <= 1e-10, format!("1000 random pairs: max error {worst:.2e} (tol 1e-10)")))
}

fn delta_cross_check() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut v12_ok = true;
    let mut vsq_worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let p = BetaParams::new(0.2 + 7.8 * i as f64 / 9.0, 0.2 + 7.8 * j as f64 / 9.0)?;
            let d = delta_matrix(&p);
            let e = delta_via_jacobian(&p)?;
            for r in 0..2 {
                for c in 0..2 {
                    worst = worst.max((d[r][c] - e[r][c]).abs() / d[r][c].abs().max(1.0));
                }
            }
            let (v11, v12, v22) = v_entries(&p);
            v12_ok &= v12 > 0.0;
            let s = p.alpha + p.beta;
            let via = (v11 + v22 + 2.0 * v12) / (s.powi(4) * (s + 1.0));
            vsq_worst = vsq_worst.max(rel(v_sq_un(&p).v_sq, via));
        }
    }
    Ok((
        worst <= 1e-10 && v12_ok && vsq_worst <= 1e-12,
        format!("max error {worst:.2e}; v12 > 0: {v12_ok}; v^2 reduction rel error {vsq_worst:.2e}"),
    ))
}

fn stein() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (a, b) in [(1.0, 1.0), (2.0, 3.0), (0.5, 4.0)] {
        let p = BetaParams::new(a, b)?;
        let pairs = [
            stein_identity_check(&p, |x| x, |_| 1.0)?,
            stein_identity_check(&p, |x| x.ln() - (-x).ln_1p(), |x| 1.0 / (x * (1.0 - x)))?,
            stein_identity_check(&p, |x| x * x, |x| 2.0 * x)?,
        ];
        for (l, r) in pairs {
            worst = worst.max((l - r).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |lhs - rhs| {worst:.2e} (tol 1e-8)")))
}

/// Unbiasedness of u₀..u₃ and Uₙ at the standard design points.
pub fn unbiasedness_mc(reps: usize, seed: u64) -> Vec<Check> {
    let designs = [
        (Estimator::UmvueAlpha, 2.0, 1.0, 6),
        (Estimator::UmvueLambda, 2.0, 3.0, 6),
        (Estimator::UmvueInvAlpha, 2.0, 1.0, 5),
        (Estimator::UmvueInvLambda, 1.0, 2.0, 4),
        (Estimator::BetaU, 2.0, 3.0, 10),
    ];
    designs
        .into_iter()
        .map(|(e, a, b, n)| {
            let spec = if e.is_beta() {
                ExperimentSpec::beta(e, a, b, n, reps, seed)
            } else {
                ExperimentSpec::gamma(e, a, b, n, reps, seed)
            };
            let name = format!("mc_{}", e.name());
            Check::from_result(
                &name,
                spec.and_then(|s| run_experiment(&s)).map(|r| {
                    (
                        r.pass,
                        format!(
                            "n={n} mean {:.6} target {:.6} se {:.2e} z {:.3} failures {}",
                            r.estimate_mean, r.target, r.estimate_se, r.z_score, r.failures
                        ),
                    )
                }),
            )
        })
        .collect()
}

pub fn clt(seed: u64) -> Vec<Check> {
    let beta = BetaParams::new(2.0, 3.0).and_then(|p| beta_clt_check(&p, 5000, 2000, seed, 0.10)).map(|r| {
        (
            r.pass,
            format!(
                "cov {:?} vs delta {:?}: max rel error {:.3} (tol 0.10)",
                r.empirical_cov, r.delta, r.max_rel_error
            ),
        )
    });
    let skew = ExperimentSpec::gamma(Estimator::YechenInvLambda, 3.0, 2.0, 200, 20_000, seed)
        .and_then(|s| skewness_check(&s, 0.2))
        .map(|r| (r.pass, format!("n=200 skewness {:.4} (bound 0.2)", r.skewness)));
    vec![Check::from_result("beta_clt_covariance", beta), Check::from_result("yechen_skewness", skew)]
}
