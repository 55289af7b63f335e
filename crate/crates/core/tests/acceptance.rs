//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use umvue::beta_est::{
    delta_matrix, delta_via_jacobian, stein_identity_check, table1, table1_default_grid, table1_row, v_entries,
    v_sq_un, BetaParams,
};
use umvue::gamma_est::{
    are_alpha_yechen, are_inv_lambda, cr_bound_sharpened, cr_bound_shape, efficient_h, kernel_t2, kernel_t3,
    suff_stat, umvue_inv_alpha_integral, GammaSample,
};
use umvue::gseries::{build_coeffs, log_k, normalization_integral, unbiasedness_sum, CoeffTable};
use umvue::mc::{beta_clt_check, beta_variate, run_experiment, stream_rng, Estimator, ExperimentSpec};
use umvue::numkit::{minimize_scalar, Tolerance};
use umvue::specfun::ln_gamma;
use umvue::Result;

type Outcome = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn table1_reproduction() -> Outcome {
    let expected = [
        (0.05, 0.179_398, 0.712_626),
        (0.5, 0.315_422, 0.929_356),
        (1.0, 0.322_936, 0.949_046),
        (2.5, 0.333_239, 0.949_496),
        (5.0, 0.352_973, 0.943_37),
        (10.0, 0.374_822, 0.937_431),
    ];
    let mut worst: f64 = 0.0;
    for (b, a, r) in expected {
        let row = table1_row(b)?;
        worst = worst.max((row.alpha_star - a).abs()).max((row.rho1_star - r).abs());
    }
    let start = Instant::now();
    let rows = table1(&table1_default_grid())?;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-5 && rows.len() == 200 && secs < 30.0,
        format!("max deviation {worst:.1e} (tol 1e-5); {} rows in {secs:.2} s", rows.len()),
    ))
}

fn are_minima() -> Outcome {
    let tol = Tolerance::minimize().with_abs(1e-9);
    let a = minimize_scalar(are_inv_lambda, 0.1, 3.0, tol)?;
    let b = minimize_scalar(are_alpha_yechen, 0.05, 3.0, tol)?;
    let pass = (a.argmin - 0.920_835).abs() <= 1e-4
        && a.min_value > 0.964
        && (b.argmin - 0.415_41).abs() <= 1e-3
        && (b.min_value - 0.9281).abs() <= 5e-4;
    Ok((
        pass,
        format!(
            "1/lambda: argmin {:.6}, min {:.6}; alpha: argmin {:.6}, min {:.6}",
            a.argmin, a.min_value, b.argmin, b.min_value
        ),
    ))
}

fn unbiasedness_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [4, 5, 6] {
        let t = CoeffTable::for_sample_size(n)?;
        for a in [0.5, 1.0, 2.0] {
            let want = (-ln_gamma(a) - log_k(n, a)?).exp();
            worst = worst.max(rel(unbiasedness_sum(&t, a)?, want));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-8 && secs < 10.0, format!("max rel error {worst:.2e} (tol 1e-8) in {secs:.2} s")))
}

fn density_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5, 6] {
        let t = CoeffTable::for_sample_size(n)?;
        for a in [0.5, 1.0, 2.5] {
            worst = worst.max((normalization_integral(&t, a)? - 1.0).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |integral - 1| {worst:.2e} (tol 1e-8)")))
}

fn n3_closed_form() -> Outcome {
    // The recursion carries the constant Γ(1/3)Γ(2/3) = 2π/√3 in front of
    // the closed form; it is part of the normalisation of the density.
    let t = build_coeffs(3, 200)?;
    let scale = 2.0 * PI / 3f64.sqrt();
    let mut worst: f64 = 0.0;
    for m in 0..=200 {
        let mf = m as f64;
        let closed = (ln_gamma(3.0 * mf + 1.0) - 3.0 * (mf * 3f64.ln() + ln_gamma(mf + 1.0))).exp();
        worst = worst.max(rel(t.d()[m], scale * closed));
    }
    Ok((worst <= 1e-10, format!("d_m = (2pi/sqrt3)(3m)!/(3^m m!)^3 for m <= 200, max rel error {worst:.2e}")))
}

fn n2_equivalence() -> Outcome {
    let t = CoeffTable::for_sample_size(2)?;
    let mut rng = stream_rng(6, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = (beta_variate(&mut rng, 1.0, 1.0) * 10.0 - 5.0).exp();
        let b = (beta_variate(&mut rng, 1.0, 1.0) * 10.0 - 5.0).exp();
        let s = suff_stat(&GammaSample::new(vec![a, b])?);
        let u2 = umvue_inv_alpha_integral(&s, &t)?;
        let u3 = s.x / 2.0 * u2;
        let (t2, t3) = (kernel_t2(a, b), kernel_t3(a, b));
        worst = worst.max((u2 - t2).abs() / t2.max(1.0)).max((u3 - t3).abs() / t3.max(1.0));
    }
    Ok((worst <= 1e-10, format!("1000 random pairs, max error {worst:.2e} (tol 1e-10)")))
}

fn delta_cross_check() -> Outcome {
    let (mut worst, mut vsq): (f64, f64) = (0.0, 0.0);
    let mut v12_pos = true;
    for i in 0..10 {
        for j in 0..10 {
            let p = BetaParams::new(0.2 + 7.8 * i as f64 / 9.0, 0.2 + 7.8 * j as f64 / 9.0)?;
            let (d, e) = (delta_matrix(&p), delta_via_jacobian(&p)?);
            for r in 0..2 {
                for c in 0..2 {
                    worst = worst.max((d[r][c] - e[r][c]).abs() / d[r][c].abs().max(1.0));
                }
            }
            let (v11, v12, v22) = v_entries(&p);
            v12_pos &= v12 > 0.0;
            let s = p.alpha + p.beta;
            vsq = vsq.max(rel(v_sq_un(&p).v_sq, (v11 + v22 + 2.0 * v12) / (s.powi(4) * (s + 1.0))));
        }
    }
    Ok((
        worst <= 1e-10 && v12_pos && vsq <= 1e-12,
        format!("Delta vs A0 Sigma A0^T {worst:.2e} (tol 1e-10); v12 > 0 {v12_pos}; v^2 reduction {vsq:.2e} (tol 1e-12)"),
    ))
}

fn mc_unbiasedness() -> Outcome {
    let start = Instant::now();
    let specs = [
        ExperimentSpec::gamma(Estimator::UmvueAlpha, 2.0, 1.0, 6, 100_000, 42)?,
        ExperimentSpec::gamma(Estimator::UmvueLambda, 2.0, 3.0, 6, 100_000, 42)?,
        ExperimentSpec::gamma(Estimator::UmvueInvAlpha, 2.0, 1.0, 5, 100_000, 42)?,
        ExperimentSpec::gamma(Estimator::UmvueInvLambda, 1.0, 2.0, 4, 100_000, 42)?,
        ExperimentSpec::beta(Estimator::BetaU, 2.0, 3.0, 10, 100_000, 42)?,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for s in &specs {
        let r = run_experiment(s)?;
        pass &= r.pass;
        parts.push(format!("{} z={:.2}", s.estimator.name(), r.z_score));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((pass && secs < 300.0, format!("{} ({secs:.1} s)", parts.join(", "))))
}

fn mc_clt() -> Outcome {
    let r = beta_clt_check(&BetaParams::new(2.0, 3.0)?, 5000, 2000, 42, 0.10)?;
    Ok((r.pass, format!("max entrywise rel error {:.3} (tol 0.10)", r.max_rel_error)))
}

fn stein_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, b) in [(1.0, 1.0), (2.0, 3.0), (0.5, 4.0)] {
        let p = BetaParams::new(a, b)?;
        for (l, r) in [
            stein_identity_check(&p, |x| x, |_| 1.0)?,
            stein_identity_check(&p, |x| (x / (1.0 - x)).ln(), |x| 1.0 / (x * (1.0 - x)))?,
            stein_identity_check(&p, |x| x * x, |x| 2.0 * x)?,
        ] {
            worst = worst.max((l - r).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |lhs - rhs| {worst:.2e} (tol 1e-8)")))
}

fn bound_ordering() -> Outcome {
    let mut strict = true;
    for a in [0.3, 1.0, 3.0] {
        for n in [4, 10, 50] {
            strict &= cr_bound_sharpened(a, 1.0, n)? > cr_bound_shape(a, 1.0, n)?;
        }
    }
    let ratio = cr_bound_sharpened(1.0, 1.0, 1000)? / cr_bound_shape(1.0, 1.0, 1000)?;
    let mut eff: f64 = 0.0;
    for (a, n, c1) in [(0.3, 4, 1.0), (1.0, 10, -2.0), (3.0, 50, 0.5)] {
        let e = efficient_h(a, n, c1, 0.7)?;
        eff = eff.max(rel(e.variance, cr_bound_sharpened(a, e.hprime, n)?));
    }
    Ok((
        strict && (ratio - 1.0).abs() <= 0.01 && eff <= 1e-12,
        format!("strict ordering {strict}; ratio at n=1000 {ratio:.5}; efficient-h variance vs bound {eff:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Table 1 reproduction", table1_reproduction),
        ("ARE minima", are_minima),
        ("unbiasedness identity", unbiasedness_identity),
        ("density normalization", density_normalization),
        ("n=3 closed-form coefficients", n3_closed_form),
        ("n=2 closed-form equivalence", n2_equivalence),
        ("Delta cross-check", delta_cross_check),
        ("Monte Carlo unbiasedness", mc_unbiasedness),
        ("Monte Carlo CLT", mc_clt),
        ("Stein identity", stein_identity),
        ("bound ordering", bound_ordering),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
