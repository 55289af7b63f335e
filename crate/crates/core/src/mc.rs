//! Seeded sampling and Monte Carlo checks of the estimators.
//!
//! Replication `r` of an experiment with seed `s` draws from ChaCha8 seeded
//! with `s` on stream `r`, so results do not depend on how rayon schedules
//! the work. Aggregates are computed from the replications in index order.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta_est::{delta_matrix, fit_beta, BetaParams, BetaSample, Mat2};
use crate::error::{Error, Result};
use crate::gamma_est::{self, suff_stat, GammaParams, GammaSample, UMVUE_N_MAX};
use crate::gseries::CoeffTable;
use crate::numkit::NeumaierSum;

pub type RngSeed = u64;

/// Largest tolerated share of replications whose estimator fails.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// The generator for replication `stream` of an experiment seeded with `seed`.
pub fn stream_rng(seed: RngSeed, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One Gamma(α, 1) variate by Marsaglia and Tsang's squeeze method, with
/// the U^{1/α} boost for α < 1.
pub fn gamma_variate<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha < 1.0 {
        let u: f64 = rng.random();
        return gamma_variate(rng, alpha + 1.0) * u.powf(1.0 / alpha);
    }
    let d = alpha - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x: f64 = rng.sample(StandardNormal);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// G_α/(G_α + G_β).
pub fn beta_variate<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let x = gamma_variate(rng, alpha);
    let y = gamma_variate(rng, beta);
    x / (x + y)
}

pub fn gamma_draws<R: Rng + ?Sized>(rng: &mut R, p: &GammaParams, n: usize) -> Vec<f64> {
    (0..n).map(|_| gamma_variate(rng, p.alpha) / p.lambda).collect()
}

pub fn beta_draws<R: Rng + ?Sized>(rng: &mut R, p: &BetaParams, n: usize) -> Vec<f64> {
    (0..n).map(|_| beta_variate(rng, p.alpha, p.beta)).collect()
}

/// n i.i.d. Gamma(α, rate λ) draws from stream 0 of `seed`.
pub fn sample_gamma(p: &GammaParams, n: usize, seed: RngSeed) -> Result<GammaSample> {
    GammaSample::new(gamma_draws(&mut stream_rng(seed, 0), p, n))
}

/// n i.i.d. Beta(α, β) draws from stream 0 of `seed`.
pub fn sample_beta(p: &BetaParams, n: usize, seed: RngSeed) -> Result<BetaSample> {
    BetaSample::new(beta_draws(&mut stream_rng(seed, 0), p, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    UmvueAlpha,
    UmvueLambda,
    UmvueInvAlpha,
    UmvueInvLambda,
    YechenInvLambda,
    YechenInvAlpha,
    LouzadaAlpha,
    /// Uₙ, unbiased for 1/(α+β).
    BetaU,
    BetaAlphaHat,
    BetaBetaHat,
}

impl Estimator {
    pub const ALL: [Estimator; 10] = [
        Estimator::UmvueAlpha,
        Estimator::UmvueLambda,
        Estimator::UmvueInvAlpha,
        Estimator::UmvueInvLambda,
        Estimator::YechenInvLambda,
        Estimator::YechenInvAlpha,
        Estimator::LouzadaAlpha,
        Estimator::BetaU,
        Estimator::BetaAlphaHat,
        Estimator::BetaBetaHat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::UmvueAlpha => "umvue_alpha",
            Estimator::UmvueLambda => "umvue_lambda",
            Estimator::UmvueInvAlpha => "umvue_inv_alpha",
            Estimator::UmvueInvLambda => "umvue_inv_lambda",
            Estimator::YechenInvLambda => "yechen_inv_lambda",
            Estimator::YechenInvAlpha => "yechen_inv_alpha",
            Estimator::LouzadaAlpha => "louzada_alpha",
            Estimator::BetaU => "beta_u",
            Estimator::BetaAlphaHat => "beta_alpha_hat",
            Estimator::BetaBetaHat => "beta_beta_hat",
        }
    }

    pub fn is_beta(self) -> bool {
        matches!(self, Estimator::BetaU | Estimator::BetaAlphaHat | Estimator::BetaBetaHat)
    }

    fn needs_table(self) -> bool {
        matches!(
            self,
            Estimator::UmvueAlpha | Estimator::UmvueLambda | Estimator::UmvueInvAlpha | Estimator::UmvueInvLambda
        )
    }

    fn min_n(self) -> usize {
        match self {
            Estimator::UmvueAlpha | Estimator::UmvueLambda => 4,
            _ => 2,
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator '{s}'")))
    }
}

/// The distribution an experiment samples from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Gamma(GammaParams),
    Beta(BetaParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub estimator: Estimator,
    pub model: Model,
    pub n: usize,
    pub reps: usize,
    pub seed: RngSeed,
    /// Largest accepted |z|.
    pub threshold: f64,
}

impl ExperimentSpec {
    pub fn gamma(estimator: Estimator, alpha: f64, lambda: f64, n: usize, reps: usize, seed: RngSeed) -> Result<Self> {
        let spec = ExperimentSpec {
            estimator,
            model: Model::Gamma(GammaParams::new(alpha, lambda)?),
            n,
            reps,
            seed,
            threshold: 3.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn beta(estimator: Estimator, alpha: f64, beta: f64, n: usize, reps: usize, seed: RngSeed) -> Result<Self> {
        let spec = ExperimentSpec {
            estimator,
            model: Model::Beta(BetaParams::new(alpha, beta)?),
            n,
            reps,
            seed,
            threshold: 3.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reads `key=value` lines (`estimator`, `alpha`, `lambda` or `beta`,
    /// `n`, `reps`, `seed`, `threshold`). Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got '{line}'", no + 1)))?;
            let k = k.trim();
            if !["estimator", "alpha", "lambda", "beta", "n", "reps", "seed", "threshold"].contains(&k) {
                return Err(Error::Parse(format!("line {}: unknown key '{k}'", no + 1)));
            }
            if fields.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key '{k}'", no + 1)));
            }
        }
        fn get<T: FromStr>(f: &std::collections::BTreeMap<String, String>, k: &str) -> Result<Option<T>> {
            f.get(k)
                .map(|v| v.parse::<T>().map_err(|_| Error::Parse(format!("bad value for {k}: '{v}'"))))
                .transpose()
        }
        fn need<T: FromStr>(f: &std::collections::BTreeMap<String, String>, k: &str) -> Result<T> {
            get(f, k)?.ok_or_else(|| Error::Parse(format!("missing key '{k}'")))
        }
        let estimator: Estimator = need::<String>(&fields, "estimator")?.parse()?;
        let alpha: f64 = need(&fields, "alpha")?;
        let n: usize = need(&fields, "n")?;
        let reps: usize = need(&fields, "reps")?;
        let seed: u64 = get(&fields, "seed")?.unwrap_or(42);
        let mut spec = if estimator.is_beta() {
            ExperimentSpec::beta(estimator, alpha, need(&fields, "beta")?, n, reps, seed)?
        } else {
            ExperimentSpec::gamma(estimator, alpha, need(&fields, "lambda")?, n, reps, seed)?
        };
        if let Some(t) = get::<f64>(&fields, "threshold")? {
            if !(t > 0.0) {
                return Err(Error::Config(format!("threshold must be positive, got {t}")));
            }
            spec.threshold = t;
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let family_ok = match self.model {
            Model::Gamma(_) => !self.estimator.is_beta(),
            Model::Beta(_) => self.estimator.is_beta(),
        };
        if !family_ok {
            return Err(Error::Config(format!("estimator {} does not apply to this family", self.estimator.name())));
        }
        if self.n < self.estimator.min_n() {
            return Err(Error::Precondition(format!(
                "{} needs n >= {}, got {}",
                self.estimator.name(),
                self.estimator.min_n(),
                self.n
            )));
        }
        if self.estimator.needs_table() && self.n > UMVUE_N_MAX {
            return Err(Error::Precondition(format!("UMVUEs are available for n <= {UMVUE_N_MAX}, got {}", self.n)));
        }
        if self.reps < 2 {
            return Err(Error::Config(format!("need at least 2 replications, got {}", self.reps)));
        }
        Ok(())
    }

    /// The value the estimator is aimed at.
    pub fn target(&self) -> f64 {
        match (self.model, self.estimator) {
            (Model::Gamma(p), e) => match e {
                Estimator::UmvueAlpha | Estimator::LouzadaAlpha => p.alpha,
                Estimator::UmvueLambda => p.lambda,
                Estimator::UmvueInvAlpha | Estimator::YechenInvAlpha => 1.0 / p.alpha,
                _ => 1.0 / p.lambda,
            },
            (Model::Beta(p), Estimator::BetaAlphaHat) => p.alpha,
            (Model::Beta(p), Estimator::BetaBetaHat) => p.beta,
            (Model::Beta(p), _) => 1.0 / (p.alpha + p.beta),
        }
    }
}

fn estimate_once(spec: &ExperimentSpec, tbl: Option<&CoeffTable>, rng: &mut ChaCha8Rng) -> Result<f64> {
    match spec.model {
        Model::Gamma(p) => {
            let s = GammaSample::new(gamma_draws(rng, &p, spec.n))?;
            let t = || tbl.ok_or_else(|| Error::Config("coefficient table missing".into()));
            match spec.estimator {
                Estimator::UmvueAlpha => gamma_est::umvue_alpha(&suff_stat(&s), t()?),
                Estimator::UmvueLambda => gamma_est::umvue_lambda(&suff_stat(&s), t()?),
                Estimator::UmvueInvAlpha => gamma_est::umvue_inv_alpha(&suff_stat(&s), t()?),
                Estimator::UmvueInvLambda => gamma_est::umvue_inv_lambda(&suff_stat(&s), t()?),
                Estimator::YechenInvLambda => Ok(gamma_est::yechen_inv_lambda(&s)),
                Estimator::YechenInvAlpha => Ok(gamma_est::yechen_inv_alpha(&s)),
                Estimator::LouzadaAlpha => Ok(gamma_est::louzada_alpha(&s)),
                _ => unreachable!("validated family"),
            }
        }
        Model::Beta(p) => {
            let f = fit_beta(&BetaSample::new(beta_draws(rng, &p, spec.n))?)?;
            Ok(match spec.estimator {
                Estimator::BetaU => f.u_stat,
                Estimator::BetaAlphaHat => f.alpha_hat,
                _ => f.beta_hat,
            })
        }
    }
}

/// Per-replication outcomes, in replication order.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    pub values: Vec<f64>,
    pub failures: Vec<(usize, String)>,
}

/// Runs the replications of `spec`; `tbl` is built when the estimator
/// needs one and none is given.
pub fn replicate(spec: &ExperimentSpec, tbl: Option<&CoeffTable>) -> Result<Replicates> {
    spec.validate()?;
    let owned;
    let tbl = match (spec.estimator.needs_table(), tbl) {
        (true, Some(t)) if t.n() == spec.n => Some(t),
        (true, Some(t)) => {
            return Err(Error::Config(format!("coefficient table is for n={}, experiment has n={}", t.n(), spec.n)))
        }
        (true, None) => {
            owned = CoeffTable::for_sample_size(spec.n)?;
            Some(&owned)
        }
        (false, _) => None,
    };
    let outcomes: Vec<Result<f64>> = (0..spec.reps)
        .into_par_iter()
        .map(|r| estimate_once(spec, tbl, &mut stream_rng(spec.seed, r as u64)))
        .collect();
    let mut values = Vec::with_capacity(spec.reps);
    let mut failures = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => failures.push((r, format!("non-finite estimate {v}"))),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    Ok(Replicates { values, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub estimator: Estimator,
    pub n: usize,
    pub seed: RngSeed,
    pub replications: usize,
    pub failures: usize,
    pub estimate_mean: f64,
    pub estimate_se: f64,
    pub target: f64,
    pub z_score: f64,
    pub threshold: f64,
    pub empirical_cov: Option<Vec<Vec<f64>>>,
    pub pass: bool,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().copied().collect::<NeumaierSum>().value() / k;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<NeumaierSum>().value();
    (mean, (ss / (k - 1.0) / k).sqrt())
}

/// Sample covariance matrix of equally long columns.
pub fn covariance(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = cols[0].len() as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().copied().collect::<NeumaierSum>().value() / k).collect();
    (0..cols.len())
        .map(|i| {
            (0..cols.len())
                .map(|j| {
                    let s: NeumaierSum = cols[i].iter().zip(&cols[j]).map(|(a, b)| (a - means[i]) * (b - means[j])).collect();
                    s.value() / (k - 1.0)
                })
                .collect()
        })
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<McReport> {
    run_experiment_with(spec, None)
}

/// Like [`run_experiment`] with a prebuilt coefficient table.
pub fn run_experiment_with(spec: &ExperimentSpec, tbl: Option<&CoeffTable>) -> Result<McReport> {
    let start = Instant::now();
    let reps = replicate(spec, tbl)?;
    let target = spec.target();
    let (mean, se) = if reps.values.len() >= 2 { mean_se(&reps.values) } else { (f64::NAN, f64::NAN) };
    let z = if se > 0.0 {
        (mean - target) / se
    } else if mean == target {
        0.0
    } else {
        f64::INFINITY
    };
    let failure_rate = reps.failures.len() as f64 / spec.reps as f64;
    Ok(McReport {
        estimator: spec.estimator,
        n: spec.n,
        seed: spec.seed,
        replications: spec.reps,
        failures: reps.failures.len(),
        estimate_mean: mean,
        estimate_se: se,
        target,
        z_score: z,
        threshold: spec.threshold,
        empirical_cov: None,
        pass: z.abs() <= spec.threshold && failure_rate <= MAX_FAILURE_RATE,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Empirical covariance of √n(α̂−α, β̂−β) against Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub params: BetaParams,
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    pub empirical_cov: Mat2,
    pub delta: Mat2,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn beta_clt_check(p: &BetaParams, n: usize, reps: usize, seed: RngSeed, tolerance: f64) -> Result<CltReport> {
    if n < 2 || reps < 2 {
        return Err(Error::Config(format!("need n >= 2 and reps >= 2, got n={n}, reps={reps}")));
    }
    let outcomes: Vec<Result<(f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let f = fit_beta(&BetaSample::new(beta_draws(&mut rng, p, n))?)?;
            Ok((f.alpha_hat, f.beta_hat))
        })
        .collect();
    let root_n = (n as f64).sqrt();
    let (mut xa, mut xb, mut failures) = (Vec::new(), Vec::new(), 0);
    for o in outcomes {
        match o {
            Ok((a, b)) => {
                xa.push(root_n * (a - p.alpha));
                xb.push(root_n * (b - p.beta));
            }
            Err(_) => failures += 1,
        }
    }
    if xa.len() < 2 {
        return Err(Error::NonConvergence { context: "beta_clt_check: every replication failed".into(), iterations: reps, estimate: f64::NAN });
    }
    let c = covariance(&[xa, xb]);
    let emp = [[c[0][0], c[0][1]], [c[1][0], c[1][1]]];
    let delta = delta_matrix(p);
    let max_rel_error = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| ((emp[i][j] - delta[i][j]) / delta[i][j]).abs())
        .fold(0.0, f64::max);
    Ok(CltReport {
        params: *p,
        n,
        replications: reps,
        failures,
        empirical_cov: emp,
        delta,
        max_rel_error,
        tolerance,
        pass: max_rel_error <= tolerance && failures as f64 / reps as f64 <= MAX_FAILURE_RATE,
    })
}

/// Sample skewness m₃/m₂^{3/2}.
pub fn sample_skewness(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    let mean = values.iter().copied().collect::<NeumaierSum>().value() / k;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).collect::<NeumaierSum>().value() / k;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).collect::<NeumaierSum>().value() / k;
    m3 / m2.powf(1.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewnessReport {
    pub estimator: Estimator,
    pub n: usize,
    pub replications: usize,
    pub skewness: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Normality sanity check: |skewness| of the replicated estimates below
/// `bound`. Skewness is invariant to standardisation.
pub fn skewness_check(spec: &ExperimentSpec, bound: f64) -> Result<SkewnessReport> {
    let reps = replicate(spec, None)?;
    let skewness = sample_skewness(&reps.values);
    Ok(SkewnessReport {
        estimator: spec.estimator,
        n: spec.n,
        replications: spec.reps,
        skewness,
        bound,
        pass: skewness.abs() < bound && reps.failures.len() as f64 / spec.reps as f64 <= MAX_FAILURE_RATE,
    })
}

/// Running variance of u₀ at growing replication counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub n: usize,
    pub alpha: f64,
    pub counts: Vec<usize>,
    pub variances: Vec<f64>,
    /// Some later variance exceeds twice the first one.
    pub non_stabilizing: bool,
}

/// Empirical variance of u₀ at Gamma(α, 1) over the first 10³, 10⁴, …
/// replications up to `max_reps`. Descriptive only.
pub fn variance_profile(alpha: f64, n: usize, max_reps: usize, seed: RngSeed) -> Result<VarianceProfile> {
    let spec = ExperimentSpec::gamma(Estimator::UmvueAlpha, alpha, 1.0, n, max_reps, seed)?;
    let reps = replicate(&spec, None)?;
    let mut counts = Vec::new();
    let mut variances = Vec::new();
    let mut k = 1000;
    while k <= reps.values.len() {
        let (_, se) = mean_se(&reps.values[..k]);
        counts.push(k);
        variances.push(se * se * k as f64);
        k *= 10;
    }
    let non_stabilizing = variances.iter().skip(1).any(|&v| v > 2.0 * variances[0]);
    Ok(VarianceProfile { n, alpha, counts, variances, non_stabilizing })
}
