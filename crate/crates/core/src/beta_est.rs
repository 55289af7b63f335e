//! Closed-form estimators for Beta(α, β) built on the covariance identity
//! Cov(X, w(X)) = E[X(1−X)w′(X)]/(α+β), with their asymptotic theory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{integrate, minimize_scalar, MinResult, NeumaierSum, Tolerance};
use crate::specfun::{ln_beta, psi, psi1};

pub type Mat2 = [[f64; 2]; 2];
pub type Mat3 = [[f64; 3]; 3];
pub type Mat23 = [[f64; 3]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain("BetaParams", format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(BetaParams { alpha, beta })
    }

    pub fn swapped(&self) -> Self {
        BetaParams { alpha: self.beta, beta: self.alpha }
    }
}

/// At least two observations, all strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSample {
    data: Vec<f64>,
}

impl BetaSample {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Precondition(format!("need at least 2 observations, got {}", data.len())));
        }
        if let Some((i, v)) = data.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::domain(
                "BetaSample",
                format!("observation {i} = {v} is not strictly inside (0, 1)"),
            ));
        }
        Ok(BetaSample { data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }
}

fn logit(x: f64) -> f64 {
    x.ln() - (-x).ln_1p()
}

/// K(x₁,x₂) = ½(x₂−x₁)·log[x₂(1−x₁)/(x₁(1−x₂))].
pub fn stein_kernel(x1: f64, x2: f64) -> Result<f64> {
    for v in [x1, x2] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain("stein_kernel", format!("arguments must lie in (0, 1), got {v}")));
        }
    }
    Ok(0.5 * (x2 - x1) * (logit(x2) - logit(x1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub n: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Uₙ = nVₙ/(n−1), unbiased for 1/(α+β).
    pub u_stat: f64,
    pub v_stat: f64,
    pub se_alpha: f64,
    pub se_beta: f64,
}

/// Vₙ = n⁻¹Σ(xᵢ − x̄)·logit(xᵢ), α̂ = x̄/Vₙ, β̂ = (1−x̄)/Vₙ.
///
/// Standard errors are √(Δ/n) with Δ evaluated at the estimate.
pub fn fit_beta(s: &BetaSample) -> Result<BetaFit> {
    let n = s.n();
    let nf = n as f64;
    let mean = s.data.iter().copied().collect::<NeumaierSum>().value() / nf;
    let v = s.data.iter().map(|&x| (x - mean) * logit(x)).collect::<NeumaierSum>().value() / nf;
    if !(v > 0.0) {
        return Err(Error::DegenerateSample(format!(
            "V_n = {v:e}; the sample has no spread (all observations equal?)"
        )));
    }
    let alpha_hat = mean / v;
    let beta_hat = (1.0 - mean) / v;
    let delta = delta_matrix(&BetaParams { alpha: alpha_hat, beta: beta_hat });
    Ok(BetaFit {
        n,
        alpha_hat,
        beta_hat,
        u_stat: nf * v / (nf - 1.0),
        v_stat: v,
        se_alpha: (delta[0][0] / nf).sqrt(),
        se_beta: (delta[1][1] / nf).sqrt(),
    })
}

/// Mean vector and covariance matrix of (X, logit X, X·logit X).
pub fn moments_xyz(p: &BetaParams) -> ([f64; 3], Mat3) {
    let (a, b) = (p.alpha, p.beta);
    let s = a + b;
    let big_psi = psi(a) - psi(b);
    let big_psi1 = psi1(a) + psi1(b);
    let den = s * s * (s + 1.0);
    let mu = [a / s, big_psi, (1.0 + a * big_psi) / s];
    let s11 = a * b / den;
    let s12 = 1.0 / s;
    let s13 = (b + a * s + a * b * big_psi) / den;
    let s22 = big_psi1;
    let s23 = (big_psi + a * big_psi1) / s;
    let s33 = (a * b * big_psi * big_psi
        + 2.0 * (a * a + a * b + b) * big_psi
        + a * (a + 1.0) * s * big_psi1
        + s
        - 1.0)
        / den;
    (mu, [[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]])
}

/// (k₁, k₂)(x, y, z) = (x, 1−x)/(z − xy); maps the moment vector to (α, β).
pub fn k_map(m: &[f64; 3]) -> [f64; 2] {
    let d = m[2] - m[0] * m[1];
    [m[0] / d, (1.0 - m[0]) / d]
}

/// Jacobian of [`k_map`] at `mu`.
pub fn jacobian_a0(mu: &[f64; 3]) -> Result<Mat23> {
    let [x, y, z] = *mu;
    let d = x * y - z;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Singular("jacobian_a0: mu3 - mu1*mu2 vanishes"));
    }
    let k = 1.0 / (d * d);
    Ok([[k * z, k * x * x, -k * x], [k * (y - z), k * (x - x * x), k * (x - 1.0)]])
}

/// (v₁₁, v₁₂, v₂₂) of the limiting covariance, before the 1/(α+β+1) factor.
pub fn v_entries(p: &BetaParams) -> (f64, f64, f64) {
    let (a, b) = (p.alpha, p.beta);
    let t = psi1(a) + psi1(b);
    let v11 = a * (a * (a + b + 1.0) + a * a * b * t - b);
    let v12 = a * a * b + a * b * b + a * a * b * b * t - a * a - b * b;
    let v22 = b * (b * (a + b + 1.0) + a * b * b * t - a);
    (v11, v12, v22)
}

/// Limiting covariance Δ of √n(α̂−α, β̂−β).
pub fn delta_matrix(p: &BetaParams) -> Mat2 {
    let (v11, v12, v22) = v_entries(p);
    let k = 1.0 / (p.alpha + p.beta + 1.0);
    [[k * v11, k * v12], [k * v12, k * v22]]
}

/// Δ assembled as A₀ΣA₀ᵀ from the moments and the Jacobian.
pub fn delta_via_jacobian(p: &BetaParams) -> Result<Mat2> {
    let (mu, sigma) = moments_xyz(p);
    let a = jacobian_a0(&mu)?;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = NeumaierSum::default();
            for k in 0..3 {
                for l in 0..3 {
                    acc.add(a[i][k] * sigma[k][l] * a[j][l]);
                }
            }
            out[i][j] = acc.value();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherBeta {
    pub j: Mat2,
    pub j_inv: Mat2,
}

pub fn fisher_beta(p: &BetaParams) -> FisherBeta {
    let (ta, tb, ts) = (psi1(p.alpha), psi1(p.beta), psi1(p.alpha + p.beta));
    let det = ta * tb - ts * (ta + tb);
    FisherBeta {
        j: [[ta - ts, -ts], [-ts, tb - ts]],
        j_inv: [[(tb - ts) / det, ts / det], [ts / det, (ta - ts) / det]],
    }
}

/// Asymptotic efficiency of α̂: the Cramér–Rao bound for α over Δ₁₁.
pub fn rho1(p: &BetaParams) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    let (ta, tb, ts) = (psi1(a), psi1(b), psi1(a + b));
    let bracket = a * (a + b + 1.0) + a * a * b * (ta + tb) - b;
    (a + b + 1.0) * (tb - ts) / a / (bracket * (ta * tb - ts * (ta + tb)))
}

pub fn rho2(p: &BetaParams) -> f64 {
    rho1(&p.swapped())
}

/// Limit of ρ₁ as α → ∞: ψ₁(β)/(β²ψ₁(β)² − 1).
pub fn rho1_limit(beta: f64) -> f64 {
    let t = psi1(beta);
    t / (beta * beta * t * t - 1.0)
}

/// Asymptotic variance v² of √n(Uₙ − 1/(α+β)), and (α+β)⁴v² for 1/Vₙ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VSq {
    pub v_sq: f64,
    pub inv_v_sq: f64,
}

pub fn v_sq_un(p: &BetaParams) -> VSq {
    let (a, b) = (p.alpha, p.beta);
    let s = a + b;
    let v_sq = (s + a * b * (psi1(a) + psi1(b)) - 1.0) / (s * s * (s + 1.0));
    VSq { v_sq, inv_v_sq: s.powi(4) * v_sq }
}

/// Lower end of the bracket searched for α*(β).
pub const TABLE1_LO: f64 = 1e-4;
/// Upper end; the smallest stationary point lies below it.
pub const TABLE1_HI: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub beta: f64,
    pub alpha_star: f64,
    pub rho1_star: f64,
    pub min: MinResult,
    /// The minimum is not below both bracket ends, so it may be a boundary
    /// artefact rather than a stationary point.
    pub flagged: bool,
}

/// Bracket-width tolerance used by [`table1_row`].
pub fn table1_tolerance() -> Tolerance {
    Tolerance::minimize().with_rel(0.0).with_abs(1e-8)
}

/// α*(β) = argmin over (1e-4, 1) of α ↦ ρ₁(α, β).
pub fn table1_row(beta: f64) -> Result<Table1Row> {
    table1_row_with(beta, table1_tolerance())
}

pub fn table1_row_with(beta: f64, tol: Tolerance) -> Result<Table1Row> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("table1_row", format!("beta must be positive, got {beta}")));
    }
    let phi = |a: f64| rho1(&BetaParams { alpha: a, beta });
    let min = minimize_scalar(phi, TABLE1_LO, TABLE1_HI, tol)?;
    if !min.converged {
        return Err(Error::NonConvergence {
            context: format!("table1_row at beta={beta}"),
            iterations: min.iterations,
            estimate: min.argmin,
        });
    }
    let flagged = !(min.min_value < phi(TABLE1_LO) && min.min_value < phi(TABLE1_HI));
    Ok(Table1Row { beta, alpha_star: min.argmin, rho1_star: min.min_value, min, flagged })
}

/// β = 0.05, 0.10, …, 10.
pub fn table1_default_grid() -> Vec<f64> {
    (1..=200).map(|k| k as f64 / 20.0).collect()
}

/// Rows in grid order, computed in parallel.
pub fn table1(betas: &[f64]) -> Result<Vec<Table1Row>> {
    table1_with(betas, table1_tolerance())
}

pub fn table1_with(betas: &[f64], tol: Tolerance) -> Result<Vec<Table1Row>> {
    betas.par_iter().map(|&b| table1_row_with(b, tol)).collect()
}

/// Header `beta,alpha_star,rho1_star`, six decimals per field.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("beta,alpha_star,rho1_star\n");
    for r in rows {
        out.push_str(&format!("{:.6},{:.6},{:.6}\n", r.beta, r.alpha_star, r.rho1_star));
    }
    out
}

/// E[g(X)] under Beta(α, β).
///
/// Each half of (0, 1) is integrated after substituting out its endpoint
/// power, so the density singularities for α or β below 1 do no harm.
pub fn beta_expectation<F: Fn(f64) -> f64>(p: &BetaParams, g: F) -> Result<f64> {
    let (a, b) = (p.alpha, p.beta);
    let tol = Tolerance::quadrature().with_rel(1e-13).with_abs(1e-15);
    // ∫_0^½ g(x) x^{a−1}(1−x)^{b−1} dx with u = x^a
    let lower = integrate(
        |u| {
            let x = u.powf(1.0 / a);
            if x == 0.0 {
                return 0.0;
            }
            g(x) * ((b - 1.0) * (-x).ln_1p()).exp()
        },
        0.0,
        0.5f64.powf(a),
        tol,
    )? / a;
    // ∫_½^1 with u = (1−x)^b
    let upper = integrate(
        |u| {
            let y = u.powf(1.0 / b);
            if y == 0.0 {
                return 0.0;
            }
            let x = 1.0 - y;
            g(x) * x.powf(a - 1.0)
        },
        0.0,
        0.5f64.powf(b),
        tol,
    )? / b;
    Ok((lower + upper) * (-ln_beta(a, b)).exp())
}

/// Both sides of Cov(X, w(X)) = E[X(1−X)w′(X)]/(α+β), by quadrature.
pub fn stein_identity_check<W, D>(p: &BetaParams, w: W, w_deriv: D) -> Result<(f64, f64)>
where
    W: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mean = p.alpha / (p.alpha + p.beta);
    let lhs = beta_expectation(p, |x| (x - mean) * w(x))?;
    let rhs = beta_expectation(p, |x| x * (1.0 - x) * w_deriv(x))? / (p.alpha + p.beta);
    Ok((lhs, rhs))
}

/// Everything the limit theory says about the estimators at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub params: BetaParams,
    pub mu: [f64; 3],
    pub sigma: Mat3,
    pub jacobian: Mat23,
    pub delta: Mat2,
    pub rho1: f64,
    pub rho2: f64,
    pub v_sq: f64,
    pub inv_v_sq: f64,
    pub fisher_j: Mat2,
    pub fisher_j_inv: Mat2,
}

pub fn asymptotic_report(p: &BetaParams) -> Result<AsymptoticReport> {
    let (mu, sigma) = moments_xyz(p);
    let jacobian = jacobian_a0(&mu)?;
    let f = fisher_beta(p);
    let v = v_sq_un(p);
    Ok(AsymptoticReport {
        params: *p,
        mu,
        sigma,
        jacobian,
        delta: delta_matrix(p),
        rho1: rho1(p),
        rho2: rho2(p),
        v_sq: v.v_sq,
        inv_v_sq: v.inv_v_sq,
        fisher_j: f.j,
        fisher_j_inv: f.j_inv,
    })
}
