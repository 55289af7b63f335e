//! Density of Y = (geometric mean / arithmetic mean)^n for a Gamma sample.
//!
//! Y is distributed as a product of independent Beta(α, i/n), i = 1..n−1,
//! with density K(α) y^{α−1} (1−y)^{(n−3)/2} G(y), where
//! G(y) = Σ d_m (1−y)^m and d_m comes out of an (n−2)-step convolution
//! recursion. Level i of that recursion is the same object for the product
//! of the first i factors; level n−2 gives G₁ and the density of Y₁.
//!
//! The power series in (1−y) is only usable away from y = 0, where G grows
//! like (log 1/y)^{n−2}. Below y = 1/2 G is evaluated from its expansion at
//! the origin instead, see [`OriginExpansion`].

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{integrate, integrate_upper_power, NeumaierSum, Tolerance};
use crate::specfun::{hurwitz_zeta, ln_gamma, ln_gamma_complex, psi, psi1, EULER_GAMMA};

/// Below this point `g_eval` switches to the origin expansion.
pub const ORIGIN_SPLIT: f64 = 0.5;

const CACHE_MAGIC: &[u8; 4] = b"GCT1";
const ORIGIN_TERMS: usize = 400;
const SERIES_REL: f64 = 1e-15;
const SUSTAIN: usize = 5;
const LAPLACE_CHUNKS: usize = 24;
const OVERLAP_POINTS: [f64; 4] = [0.05, 0.2, 0.35, ORIGIN_SPLIT];

/// Build-time limits for coefficient tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GseriesConfig {
    pub n_max: usize,
    pub m_max: usize,
    /// Smallest y at which the power series must still converge.
    pub y_min: f64,
    /// Relative size of the neglected tail at `y_min`.
    pub tail_tol: f64,
}

impl Default for GseriesConfig {
    fn default() -> Self {
        GseriesConfig { n_max: 64, m_max: 20_000, y_min: 0.02, tail_tol: 1e-16 }
    }
}

impl GseriesConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if n < 2 || n > self.n_max {
            return Err(Error::Config(format!("sample size n={n} outside 2..={}", self.n_max)));
        }
        if !(self.y_min > 0.0 && self.y_min < 1.0) {
            return Err(Error::Config(format!("y_min must lie in (0,1), got {}", self.y_min)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Recursion levels γ_i(m), i = 1..n−1, m = 0..M.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    n: usize,
    levels: Vec<Vec<f64>>,
    origin: Option<SmallY>,
    origin1: Option<SmallY>,
}

/// Incremental column-by-column evaluator of the recursion.
struct Recursion {
    n: usize,
    // ratio[l](m) = Γ(m + a_l)/Γ(m + b_l), conv[l](j) = Γ(j + p_l)/j!
    ratio: Vec<f64>,
    conv: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    p: Vec<f64>,
    levels: Vec<Vec<f64>>,
}

impl Recursion {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        let steps = n.saturating_sub(2);
        let mut a = Vec::with_capacity(steps);
        let mut b = Vec::with_capacity(steps);
        let mut p = Vec::with_capacity(steps);
        for i in 1..=steps {
            let fi = i as f64;
            a.push(fi * (fi + 1.0) / (2.0 * nf));
            b.push((fi + 1.0) * (fi + 2.0) / (2.0 * nf));
            p.push((fi + 1.0) / nf);
        }
        let ratio = a.iter().zip(&b).map(|(&a, &b)| (ln_gamma(a) - ln_gamma(b)).exp()).collect();
        let conv = p.iter().map(|&p| vec![ln_gamma(p).exp()]).collect();
        Recursion { n, ratio, conv, a, b, p, levels: vec![Vec::new(); n - 1] }
    }

    fn len(&self) -> usize {
        self.levels[0].len()
    }

    /// Appends column m = self.len() to every level.
    fn push_column(&mut self) -> Result<()> {
        let m = self.len();
        self.levels[0].push(if m == 0 { 1.0 } else { 0.0 });
        for l in 0..self.n - 2 {
            if m > 0 {
                // advance the ratio products from m−1 to m
                let mf = (m - 1) as f64;
                self.ratio[l] *= (mf + self.a[l]) / (mf + self.b[l]);
                let last = *self.conv[l].last().expect("seeded");
                self.conv[l].push(last * (mf + self.p[l]) / (mf + 1.0));
            }
            let prev = &self.levels[l];
            let conv = &self.conv[l];
            let mut acc = 0.0;
            for k in 0..=m {
                acc += conv[m - k] * prev[k];
            }
            let v = self.ratio[l] * acc;
            if !v.is_finite() {
                return Err(Error::Overflow(format!(
                    "coefficient recursion level {} at m={m} (n={})",
                    l + 2,
                    self.n
                )));
            }
            self.levels[l + 1].push(v);
        }
        Ok(())
    }
}

impl CoeffTable {
    /// Table with exactly M+1 coefficients per level.
    pub fn build(n: usize, m: usize) -> Result<Self> {
        Self::build_with(n, m, &GseriesConfig::default())
    }

    pub fn build_with(n: usize, m: usize, cfg: &GseriesConfig) -> Result<Self> {
        cfg.validate(n)?;
        if m > cfg.m_max {
            return Err(Error::Config(format!("truncation order M={m} exceeds M_max={}", cfg.m_max)));
        }
        let mut rec = Recursion::new(n);
        for _ in 0..=m {
            rec.push_column()?;
        }
        Ok(Self::from_levels(n, rec.levels))
    }

    /// Extends M until the neglected tail of G and G′ at `cfg.y_min` is
    /// below `cfg.tail_tol` relative to G there.
    pub fn build_adaptive(n: usize, cfg: &GseriesConfig) -> Result<Self> {
        cfg.validate(n)?;
        let mut rec = Recursion::new(n);
        let x = 1.0 - cfg.y_min;
        let mut partial = 0.0;
        let mut xm = 1.0;
        let mut quiet = 0;
        for m in 0..=cfg.m_max {
            rec.push_column()?;
            let d = rec.levels[n - 2][m];
            partial += d * xm;
            if tail_is_small(m, d * xm, partial, cfg) {
                quiet += 1;
                if quiet >= SUSTAIN {
                    return Ok(Self::from_levels(n, rec.levels));
                }
            } else {
                quiet = 0;
            }
            xm *= x;
        }
        Err(Error::NonConvergence {
            context: format!("coefficient table for n={n}: tail at y_min={} still too large", cfg.y_min),
            iterations: cfg.m_max,
            estimate: partial,
        })
    }

    /// Default adaptive table for sample size n.
    pub fn for_sample_size(n: usize) -> Result<Self> {
        Self::build_adaptive(n, &GseriesConfig::default())
    }

    fn from_levels(n: usize, levels: Vec<Vec<f64>>) -> Self {
        let mut t = CoeffTable { n, levels, origin: None, origin1: None };
        if n >= 3 {
            t.origin = t.small_y_evaluator(n - 1);
            t.origin1 = t.small_y_evaluator(n - 2);
        }
        t
    }

    /// Residue expansion when it passes the overlap check, Laplace inversion
    /// otherwise.
    fn small_y_evaluator(&self, level: usize) -> Option<SmallY> {
        if let Some(o) = OriginExpansion::new(self.n, level) {
            let o = SmallY::Residue(o);
            if self.overlap_ok(&o, level, 1e-10) {
                return Some(o);
            }
        }
        let l = SmallY::Laplace(LaplaceInversion::new(self.n, level)?);
        self.overlap_ok(&l, level, 1e-10).then_some(l)
    }

    /// Cross-checks a small-y evaluator against the power series where both
    /// converge.
    fn overlap_ok(&self, o: &SmallY, level: usize, tol: f64) -> bool {
        OVERLAP_POINTS.iter().all(|&y| {
            let (Ok(s), Ok(e)) = (series_eval(self.level(level), y), o.eval(y)) else {
                return false;
            };
            (s.value - e.value).abs() <= tol * s.value.abs()
                && (s.derivative - e.derivative).abs() <= tol * s.derivative.abs().max(s.value.abs())
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation order M.
    pub fn order(&self) -> usize {
        self.levels[0].len() - 1
    }

    /// γ_i(0..=M) for i in 1..=n−1.
    pub fn level(&self, i: usize) -> &[f64] {
        assert!(i >= 1 && i < self.n, "level {i} out of range for n={}", self.n);
        &self.levels[i - 1]
    }

    /// d_m = γ_{n−1}(m).
    pub fn d(&self) -> &[f64] {
        self.level(self.n - 1)
    }

    /// Whether G is available below y = 1/2 (always true for n = 2, where
    /// G ≡ 1).
    pub fn has_origin_expansion(&self) -> bool {
        self.origin.is_some() || self.n == 2
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let m = u32::try_from(self.order()).map_err(|_| Error::Overflow("table order".into()))?;
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&m.to_le_bytes())?;
        for level in &self.levels {
            for v in level {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 12];
        r.read_exact(&mut head)?;
        if &head[..4] != CACHE_MAGIC {
            return Err(Error::Parse("coefficient cache: bad magic".into()));
        }
        let n = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes")) as usize;
        let m = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
        if n < 2 {
            return Err(Error::Parse(format!("coefficient cache: n={n}")));
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let want = (n - 1) * (m + 1) * 8;
        if bytes.len() != want {
            return Err(Error::Parse(format!(
                "coefficient cache: expected {want} payload bytes, found {}",
                bytes.len()
            )));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let levels = values.chunks(m + 1).map(<[f64]>::to_vec).collect();
        Ok(Self::from_levels(n, levels))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            self.write_to(&mut f)?;
            f.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(fs::File::open(path)?))
    }

    /// Cached adaptive table: reuses `dir/gct-n{n}.bin` when its M satisfies
    /// the tail criterion of `cfg`, otherwise builds and rewrites it.
    pub fn load_or_build(n: usize, cfg: &GseriesConfig, dir: &Path) -> Result<Self> {
        cfg.validate(n)?;
        let path = cache_path(dir, n);
        if let Ok(t) = Self::load(&path) {
            if t.n == n && t.meets(cfg) {
                return Ok(t);
            }
        }
        let t = Self::build_adaptive(n, cfg)?;
        fs::create_dir_all(dir)?;
        t.save(&path)?;
        Ok(t)
    }

    fn meets(&self, cfg: &GseriesConfig) -> bool {
        let d = self.d();
        let x = 1.0 - cfg.y_min;
        let mut partial = 0.0;
        let mut xm = 1.0;
        let mut quiet = 0;
        for (m, &dm) in d.iter().enumerate() {
            partial += dm * xm;
            if tail_is_small(m, dm * xm, partial, cfg) {
                quiet += 1;
            } else {
                quiet = 0;
            }
            xm *= x;
        }
        quiet >= SUSTAIN
    }
}

fn tail_is_small(m: usize, term: f64, partial: f64, cfg: &GseriesConfig) -> bool {
    // term·(m+1)/y² bounds the remaining tail of both G and G′ once d_m decays
    (m as f64 + 1.0) * term <= cfg.tail_tol * cfg.y_min * cfg.y_min * partial
}

/// Cache file name used by [`CoeffTable::load_or_build`].
pub fn cache_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("gct-n{n}.bin"))
}

/// Fixed-order table, M+1 coefficients per level.
pub fn build_coeffs(n: usize, m: usize) -> Result<CoeffTable> {
    CoeffTable::build(n, m)
}

/// A value of G (or G₁) with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GEval {
    pub value: f64,
    pub derivative: f64,
    pub terms_used: usize,
    pub converged: bool,
}

fn check_y(func: &'static str, y: f64) -> Result<()> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::domain(func, format!("y must lie in (0,1], got {y}")));
    }
    Ok(())
}

fn series_eval(coef: &[f64], y: f64) -> Result<GEval> {
    series_eval_x(coef, y, 1.0 - y)
}

fn series_eval_x(coef: &[f64], y: f64, x: f64) -> Result<GEval> {
    let mut value = NeumaierSum::default();
    let mut deriv = NeumaierSum::default();
    let mut xm = 1.0; // x^m
    let mut xm1 = 0.0; // x^{m−1}
    let mut quiet = 0;
    for (m, &c) in coef.iter().enumerate() {
        let t = c * xm;
        let dt = m as f64 * c * xm1;
        value.add(t);
        deriv.add(dt);
        if t.abs() <= SERIES_REL * value.value().abs() && dt.abs() <= SERIES_REL * deriv.value().abs() {
            quiet += 1;
            if quiet >= SUSTAIN {
                return Ok(GEval {
                    value: value.value(),
                    derivative: -deriv.value(),
                    terms_used: m + 1,
                    converged: true,
                });
            }
        } else {
            quiet = 0;
        }
        xm1 = xm;
        xm *= x;
    }
    Err(Error::NonConvergence {
        context: format!(
            "power series at y={y}: partial sums G={:e}, G'={:e} after all table terms",
            value.value(),
            -deriv.value()
        ),
        iterations: coef.len(),
        estimate: value.value(),
    })
}

/// Power-series value Σ d_m(1−y)^m and derivative, guarded: fails with
/// NonConvergence when the table is too short for this y (near y = 0).
pub fn g_series(tbl: &CoeffTable, y: f64) -> Result<GEval> {
    check_y("g_series", y)?;
    series_eval(tbl.d(), y)
}

/// G(y) and G′(y) on all of (0,1]: power series from 1/2 up, origin
/// expansion below.
pub fn g_eval(tbl: &CoeffTable, y: f64) -> Result<GEval> {
    check_y("g_eval", y)?;
    dispatch(tbl.d(), tbl.origin.as_ref(), y, 1.0 - y)
}

/// [`g_eval`] with 1−y supplied by the caller, for y within rounding of 1.
pub fn g_eval_complement(tbl: &CoeffTable, y: f64, one_minus_y: f64) -> Result<GEval> {
    check_y("g_eval_complement", y)?;
    if !(one_minus_y >= 0.0 && one_minus_y <= 1.0) {
        return Err(Error::domain("g_eval_complement", format!("1-y must lie in [0,1], got {one_minus_y}")));
    }
    dispatch(tbl.d(), tbl.origin.as_ref(), y, one_minus_y)
}

/// G₁(y) = Σ γ_{n−2}(m)(1−y)^m and its derivative; needs n ≥ 3.
pub fn g1_eval(tbl: &CoeffTable, y: f64) -> Result<GEval> {
    check_y("g1_eval", y)?;
    if tbl.n < 3 {
        return Err(Error::Precondition("G1 needs n >= 3".into()));
    }
    dispatch(tbl.level(tbl.n - 2), tbl.origin1.as_ref(), y, 1.0 - y)
}

fn dispatch(coef: &[f64], origin: Option<&SmallY>, y: f64, x: f64) -> Result<GEval> {
    match origin {
        Some(o) if y < ORIGIN_SPLIT => o.eval(y),
        _ => series_eval_x(coef, y, x),
    }
}

fn check_alpha(func: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(func, format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// ln K(α) = Σ_{i=1}^{n−1} [ln Γ(α+i/n) − ln Γ(α) − ln Γ(i/n)], the
/// normaliser of the density of Y.
pub fn log_k(n: usize, alpha: f64) -> Result<f64> {
    check_alpha("log_k", alpha)?;
    if n < 2 {
        return Err(Error::domain("log_k", format!("n must be >= 2, got {n}")));
    }
    Ok(log_beta_product_inv(n, n - 1, alpha))
}

/// ln K₁(α), the normaliser of the density of Y₁ (first n−2 factors).
pub fn log_k1(n: usize, alpha: f64) -> Result<f64> {
    check_alpha("log_k1", alpha)?;
    if n < 3 {
        return Err(Error::domain("log_k1", format!("n must be >= 3, got {n}")));
    }
    Ok(log_beta_product_inv(n, n - 2, alpha))
}

fn log_beta_product_inv(n: usize, factors: usize, alpha: f64) -> f64 {
    let lga = ln_gamma(alpha);
    let nf = n as f64;
    let mut acc = NeumaierSum::default();
    for i in 1..=factors {
        let b = i as f64 / nf;
        acc.add(ln_gamma(alpha + b) - lga - ln_gamma(b));
    }
    acc.value()
}

fn check_table(tbl: &CoeffTable, n: usize) -> Result<()> {
    if tbl.n != n {
        return Err(Error::Config(format!("coefficient table is for n={}, not n={n}", tbl.n)));
    }
    Ok(())
}

/// Density of Y at y.
pub fn density_y(n: usize, alpha: f64, y: f64, tbl: &CoeffTable) -> Result<f64> {
    check_table(tbl, n)?;
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain("density_y", format!("y must lie in (0,1), got {y}")));
    }
    let g = g_eval(tbl, y)?;
    let c = (n as f64 - 3.0) / 2.0;
    Ok((log_k(n, alpha)? + (alpha - 1.0) * y.ln() + c * (-y).ln_1p() + g.value.ln()).exp())
}

/// Density of Y₁ at y (n ≥ 3).
pub fn density_y1(n: usize, alpha: f64, y: f64, tbl: &CoeffTable) -> Result<f64> {
    check_table(tbl, n)?;
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain("density_y1", format!("y must lie in (0,1), got {y}")));
    }
    let g = g1_eval(tbl, y)?;
    let nf = n as f64;
    let c = (nf - 1.0) * (nf - 2.0) / (2.0 * nf) - 1.0;
    Ok((log_k1(n, alpha)? + (alpha - 1.0) * y.ln() + c * (-y).ln_1p() + g.value.ln()).exp())
}

fn quad_tol() -> Tolerance {
    Tolerance::quadrature().with_rel(1e-13).with_abs(0.0)
}

/// ∫₀¹ f_Y(y) dy by quadrature, split at y = 1/2: the upper part carries
/// the (1−y)^{(n−3)/2} endpoint factor, the lower part is integrated in
/// t = −ln y on [ln 2, ∞).
pub fn normalization_integral(tbl: &CoeffTable, alpha: f64) -> Result<f64> {
    check_alpha("normalization_integral", alpha)?;
    let n = tbl.n;
    let lk = log_k(n, alpha)?;
    let c = (n as f64 - 3.0) / 2.0;
    let mut err = None;
    let upper = integrate_upper_power(
        |y| match g_eval(tbl, y) {
            Ok(g) => (lk + (alpha - 1.0) * y.ln()).exp() * g.value,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        ORIGIN_SPLIT,
        c,
        quad_tol(),
    );
    if let Some(e) = err.take() {
        return Err(e);
    }
    let upper = upper?;
    let lower = integrate_log_tail(
        |t| {
            let y = (-t).exp();
            if y == 0.0 {
                return 0.0;
            }
            match g_eval(tbl, y) {
                Ok(g) => (lk - alpha * t + c * (-y).ln_1p() + g.value.ln()).exp(),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        ORIGIN_SPLIT,
        quad_tol(),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(upper + lower?)
}

/// ∫_{t_r}^∞ φ(t) dt with t_r = −ln y_r, mapped onto (0,1) by
/// t = t_r + u/(1−u).
fn integrate_log_tail<F: FnMut(f64) -> f64>(mut phi: F, y_r: f64, tol: Tolerance) -> Result<f64> {
    let t_r = -y_r.ln();
    integrate(
        |u| {
            let w = 1.0 - u;
            let t = t_r + u / w;
            let v = phi(t);
            if v == 0.0 {
                0.0
            } else {
                v / (w * w)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Σ_m Γ(m+(n−1)/2)/Γ(α+m+(n−1)/2)·d_m, which equals 1/(Γ(α)K(α)).
///
/// The terms decay only like m^{−1−α}, so the table head is summed
/// directly and the remainder Σ_{m>M} is added as
/// Γ(α)^{−1}∫ y^{α−1}(1−y)^{(n−3)/2}[G(y) − G_M(y)] dy, which vanishes to
/// rounding for y ≥ 1/2.
pub fn unbiasedness_sum(tbl: &CoeffTable, alpha: f64) -> Result<f64> {
    check_alpha("unbiasedness_sum", alpha)?;
    let n = tbl.n;
    let shift = (n as f64 - 1.0) / 2.0;
    let d = tbl.d();
    let head: NeumaierSum = d
        .iter()
        .enumerate()
        .map(|(m, &dm)| {
            let mf = m as f64;
            dm * (ln_gamma(mf + shift) - ln_gamma(alpha + mf + shift)).exp()
        })
        .collect();
    if n == 2 {
        return Ok(head.value());
    }
    let origin = tbl.origin.as_ref().ok_or_else(|| Error::NonConvergence {
        context: format!("unbiasedness sum for n={n}: no small-y evaluator for the tail"),
        iterations: d.len(),
        estimate: head.value(),
    })?;
    let c = (n as f64 - 3.0) / 2.0;
    let lg = ln_gamma(alpha);
    let mut err = None;
    let tail = integrate_log_tail(
        |t| {
            let y = (-t).exp();
            if y == 0.0 {
                return 0.0;
            }
            let full = match origin.eval(y) {
                Ok(g) => g.value,
                Err(e) => {
                    err.get_or_insert(e);
                    return f64::NAN;
                }
            };
            let x = 1.0 - y;
            let partial = d.iter().rev().fold(0.0, |acc, &dm| acc * x + dm);
            (-alpha * t - lg + c * (-y).ln_1p()).exp() * (full - partial)
        },
        ORIGIN_SPLIT,
        // the tail is small; rounding in G − G_M sets an absolute floor
        Tolerance::quadrature().with_rel(1e-10).with_abs(1e-14 * head.value()),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(head.value() + tail?)
}

/// Expansion of H(y) = (1−y)^{c}G(y) about y = 0, where G is level L of the
/// recursion and c = Σ_{i≤L} i/n − 1.
///
/// With w = −ln y, H is the inverse Laplace transform of
/// Π_{i=1}^{L} B(t, i/n), whose poles at t = −k all have order L. Summing
/// residues gives h(w) = Σ_k e^{−kw} P_k(w) with P_k a polynomial of degree
/// L−1; each P_k comes from the Taylor series of the regular part of the
/// transform at the pole.
#[derive(Debug, Clone)]
pub struct OriginExpansion {
    order: usize,
    c: f64,
    // per pole k: log scale and Taylor coefficients e_0..e_{L−1} (e_0 = 1)
    log_scale: Vec<f64>,
    coef: Vec<Vec<f64>>,
}

impl OriginExpansion {
    /// Expansion for level `order` (1 ≤ order ≤ n−1) of the n-table.
    pub fn new(n: usize, order: usize) -> Option<Self> {
        if order == 0 || order >= n {
            return None;
        }
        let nf = n as f64;
        let big_l = order;
        let b: Vec<f64> = (1..=big_l).map(|i| i as f64 / nf).collect();
        let c = b.iter().sum::<f64>() - 1.0;
        let lf = big_l as f64;
        // Near t = −k + ε the transform is ε^{−L} e^{r_k} exp(A_k(ε)) P_k(ε) with
        //   A_k = L lnΓ(1+ε) − Σ_i [lnΓ(1+b_i+ε) − lnΓ(1+b_i)] − L Σ_{q≤k} ln(1−ε/q)
        //   P_k = Π_i (1+ε/b_i) Π_{q≤k} Π_i (1 − ε/(q−b_i)).
        // The factors with small radius stay polynomial; A_k has radius 1.
        let mut base = vec![0.0; big_l];
        if big_l > 1 {
            base[1] = -lf * EULER_GAMMA - b.iter().map(|&bi| psi(1.0 + bi)).sum::<f64>();
        }
        for (j, slot) in base.iter_mut().enumerate().skip(2) {
            let jf = j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let zs: f64 = b.iter().map(|&bi| hurwitz_zeta(jf, 1.0 + bi)).sum();
            *slot = sign * (lf * hurwitz_zeta(jf, 1.0) - zs) / jf;
        }
        let mut poly = vec![0.0; big_l];
        poly[0] = 1.0;
        for &bi in &b {
            mul_linear(&mut poly, 1.0 / bi);
        }
        let mut log_scale = Vec::with_capacity(ORIGIN_TERMS);
        let mut coef = Vec::with_capacity(ORIGIN_TERMS);
        let mut r0 = 0.0;
        let mut harm = vec![0.0; big_l];
        let mut a = vec![0.0; big_l];
        let mut ea = vec![0.0; big_l];
        for k in 0..ORIGIN_TERMS {
            if k > 0 {
                let q = k as f64;
                for &bi in &b {
                    r0 += (-bi / q).ln_1p();
                    mul_linear(&mut poly, -1.0 / (q - bi));
                }
                let mut qp = 1.0;
                for (j, slot) in harm.iter_mut().enumerate().skip(1) {
                    qp /= q;
                    *slot += qp / j as f64;
                }
            }
            for j in 1..big_l {
                a[j] = base[j] + lf * harm[j];
            }
            ea[0] = 1.0;
            for j in 1..big_l {
                let mut s = 0.0;
                for i in 1..=j {
                    s += i as f64 * a[i] * ea[j - i];
                }
                ea[j] = s / j as f64;
            }
            let e: Vec<f64> = (0..big_l)
                .map(|j| (0..=j).map(|i| ea[i] * poly[j - i]).sum())
                .collect();
            if !r0.is_finite() || e.iter().any(|v| !v.is_finite()) {
                return None;
            }
            log_scale.push(r0);
            coef.push(e);
        }
        Some(OriginExpansion { order: big_l, c, log_scale, coef })
    }

    /// h(w) and h′(w).
    fn h(&self, w: f64) -> Result<(f64, f64, usize)> {
        let l = self.order;
        // powers w^j/j! for j = 0..L−1
        let mut wp = vec![1.0; l];
        for j in 1..l {
            wp[j] = wp[j - 1] * w / j as f64;
        }
        let mut value = NeumaierSum::default();
        let mut deriv = NeumaierSum::default();
        let mut quiet = 0;
        for (k, (ls, e)) in self.log_scale.iter().zip(&self.coef).enumerate() {
            let scale = (ls - k as f64 * w).exp();
            let mut p = 0.0;
            let mut dp = 0.0;
            for j in 0..l {
                p += e[j] * wp[l - 1 - j];
                if j + 1 < l {
                    dp += e[j] * wp[l - 2 - j];
                }
            }
            let t = scale * p;
            let dt = scale * (dp - k as f64 * p);
            value.add(t);
            deriv.add(dt);
            if k > 0 && t.abs() <= 1e-17 * value.value().abs() && dt.abs() <= 1e-17 * deriv.value().abs().max(value.value().abs()) {
                quiet += 1;
                if quiet >= SUSTAIN {
                    return Ok((value.value(), deriv.value(), k + 1));
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NonConvergence {
            context: format!("origin expansion at w={w}"),
            iterations: self.coef.len(),
            estimate: value.value(),
        })
    }

    /// G and G′ at y from the expansion.
    pub fn eval(&self, y: f64) -> Result<GEval> {
        check_y("OriginExpansion::eval", y)?;
        let w = -y.ln();
        let (h, dh, used) = self.h(w)?;
        // H(y) = h(w), H′(y) = −h′(w)/y, G = H(1−y)^{−c}
        let one_minus = 1.0 - y;
        let scale = (-self.c * (-y).ln_1p()).exp();
        let big_h_prime = -dh / y;
        let value = h * scale;
        let derivative = big_h_prime * scale + self.c * value / one_minus;
        Ok(GEval { value, derivative, terms_used: used, converged: true })
    }

    /// h′(w)/h(w) = −y·H′(y)/H(y) at w = −ln y.
    pub fn log_derivative(&self, y: f64) -> Result<f64> {
        check_y("OriginExpansion::log_derivative", y)?;
        let (h, dh, _) = self.h(-y.ln())?;
        Ok(dh / h)
    }
}

/// Evaluator of G below the split point.
#[derive(Debug, Clone)]
pub enum SmallY {
    Residue(OriginExpansion),
    Laplace(LaplaceInversion),
}

impl SmallY {
    pub fn eval(&self, y: f64) -> Result<GEval> {
        match self {
            SmallY::Residue(o) => o.eval(y),
            SmallY::Laplace(l) => l.eval(y),
        }
    }

    /// −y·H′(y)/H(y).
    pub fn log_derivative(&self, y: f64) -> Result<f64> {
        match self {
            SmallY::Residue(o) => o.log_derivative(y),
            SmallY::Laplace(l) => l.log_derivative(y),
        }
    }
}

/// h(w) = H(e^{−w}) by numerical Bromwich inversion of
/// F(t) = Π_{i=1}^{L} B(t, i/n) along the vertical line through the real
/// saddle point of F(t)e^{tw}.
///
/// Slower than [`OriginExpansion`] but free of its cancellation, which
/// grows quickly with L. F decays like |Im t|^{−Σ i/n}; below a total
/// exponent of 4 the oscillating tail is too long to integrate to double
/// precision, and those small orders are left to the residue expansion.
#[derive(Debug, Clone)]
pub struct LaplaceInversion {
    b: Vec<f64>,
    ln_gamma_b: f64,
    c: f64,
}

impl LaplaceInversion {
    pub fn new(n: usize, order: usize) -> Option<Self> {
        if order < 2 || order >= n {
            return None;
        }
        let b: Vec<f64> = (1..=order).map(|i| i as f64 / n as f64).collect();
        let c = b.iter().sum::<f64>() - 1.0;
        if c < 3.0 {
            // tail too heavy to resolve to double precision
            return None;
        }
        let ln_gamma_b = b.iter().map(|&bi| ln_gamma(bi)).sum();
        Some(LaplaceInversion { b, ln_gamma_b, c })
    }

    fn ln_transform(&self, t: Complex64) -> Complex64 {
        let lg = ln_gamma_complex(t);
        let mut acc = lg * self.b.len() as f64 + self.ln_gamma_b;
        for &bi in &self.b {
            acc -= ln_gamma_complex(t + bi);
        }
        acc
    }

    /// σ > 0 solving Σ_i [ψ(σ+b_i) − ψ(σ)] − k/σ = w, the saddle of
    /// F(t)t^k e^{tw} on the real axis.
    fn saddle(&self, w: f64, k: f64) -> f64 {
        let phi = |s: f64| self.b.iter().map(|&bi| psi(s + bi) - psi(s)).sum::<f64>() - k / s;
        let (mut lo, mut hi) = ((1e-12f64).ln(), (1e12f64).ln());
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi(mid.exp()) > w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    }

    /// Inverse transform of F(t)t^k at w and, if asked, of F(t)t^{k+1}.
    fn invert(&self, w: f64, k: f64, with_derivative: bool) -> Result<(f64, f64)> {
        let sigma = self.saddle(w, k);
        let curv: f64 = self.b.iter().map(|&bi| psi1(sigma) - psi1(sigma + bi)).sum::<f64>() - k / (sigma * sigma);
        let width = 1.0 / curv.sqrt();
        let ln_kernel = |t: Complex64| self.ln_transform(t) + k * t.ln() + t * w;
        let peak = ln_kernel(Complex64::new(sigma, 0.0)).re;
        let kernel = |tau: f64| {
            let t = Complex64::new(sigma, tau);
            ((ln_kernel(t) - peak).exp(), t)
        };
        // |F(t)t^k| falls off like |τ|^{−(decay)}
        let decay = self.c + 1.0 - k;
        // the peak is normalised to 1, so both integrals are O(width) and
        // O(width·σ); chunks double in length until the tail bound drops
        // below the absolute floor
        let tol_v = Tolerance::quadrature().with_rel(1e-13).with_abs(2e-14 * width);
        let tol_d = tol_v.with_abs(2e-14 * width * sigma.max(1.0));
        let (mut value, mut deriv) = (NeumaierSum::default(), NeumaierSum::default());
        let (mut lo, mut hi) = (0.0, 4.0 * width);
        for chunk in 0..LAPLACE_CHUNKS {
            value.add(integrate(|tau| kernel(tau).0.re, lo, hi, tol_v)?);
            if with_derivative {
                deriv.add(integrate(
                    |tau| {
                        let (z, t) = kernel(tau);
                        (z * t).re
                    },
                    lo,
                    hi,
                    tol_d,
                )?);
            }
            let (z, t) = kernel(hi);
            let tail_v = z.norm() * hi / (decay - 1.0);
            let tail_d = if with_derivative { (z * t).norm() * hi / (decay - 2.0) } else { 0.0 };
            if tail_v <= tol_v.abs && tail_d <= tol_d.abs {
                let scale = peak.exp() / PI;
                return Ok((value.value() * scale, deriv.value() * scale));
            }
            if chunk + 1 == LAPLACE_CHUNKS {
                return Err(Error::NonConvergence {
                    context: format!("Laplace inversion at w={w}: tail bound {tail_v:e} at tau={hi:e}"),
                    iterations: LAPLACE_CHUNKS,
                    estimate: value.value() * peak.exp() / PI,
                });
            }
            lo = hi;
            hi *= 2.0;
        }
        unreachable!("loop returns on its last chunk")
    }

    fn h(&self, w: f64) -> Result<(f64, f64)> {
        self.invert(w, 0.0, true)
    }

    /// ∫_y^1 x^{−1}H(x) dx, which is ∫_0^{−log y} h(s) ds: the inverse
    /// transform of F(t)/t.
    pub fn integral_h_over_x(&self, y: f64) -> Result<f64> {
        check_y("LaplaceInversion::integral_h_over_x", y)?;
        Ok(self.invert(-y.ln(), -1.0, false)?.0)
    }

    pub fn eval(&self, y: f64) -> Result<GEval> {
        check_y("LaplaceInversion::eval", y)?;
        let (h, dh) = self.h(-y.ln())?;
        let scale = (-self.c * (-y).ln_1p()).exp();
        let value = h * scale;
        let derivative = -dh / y * scale + self.c * value / (1.0 - y);
        Ok(GEval { value, derivative, terms_used: 0, converged: true })
    }

    pub fn log_derivative(&self, y: f64) -> Result<f64> {
        check_y("LaplaceInversion::log_derivative", y)?;
        let (h, dh) = self.h(-y.ln())?;
        Ok(dh / h)
    }
}

/// In place p(ε) ← p(ε)·(1 + sε), truncated to the current length.
fn mul_linear(p: &mut [f64], s: f64) {
    for j in (1..p.len()).rev() {
        p[j] += s * p[j - 1];
    }
}

impl CoeffTable {
    /// −y·H′(y)/H(y) with H(y) = (1−y)^{(n−3)/2}G(y), given y and 1−y.
    /// Below y = 1/2 this comes straight from the small-y evaluator without
    /// forming G.
    pub fn neg_y_log_derivative_h(&self, y: f64, one_minus_y: f64) -> Result<f64> {
        if y < ORIGIN_SPLIT {
            if let Some(o) = &self.origin {
                return o.log_derivative(y);
            }
        }
        let g = g_eval_complement(self, y, one_minus_y)?;
        let c = (self.n as f64 - 3.0) / 2.0;
        Ok(c * y / one_minus_y - y * g.derivative / g.value)
    }

    /// H(y) = (1−y)^{(n−3)/2}G(y).
    pub fn h_value(&self, y: f64, one_minus_y: f64) -> Result<f64> {
        let g = g_eval_complement(self, y, one_minus_y)?;
        let c = (self.n as f64 - 3.0) / 2.0;
        Ok(g.value * one_minus_y.powf(c))
    }

    /// ∫_y^1 x^{−1}H(x) dx for y in (0, 1].
    ///
    /// Above y = 1/2 the (1−x)^{(n−3)/2} factor is integrated out through
    /// the endpoint substitution. Below, the Laplace evaluator inverts the
    /// transform of the integral directly; otherwise the integral is taken
    /// in s = −log x, where it becomes ∫ H(e^{−s}) ds.
    pub fn integral_h_over_x(&self, y: f64, one_minus_y: f64) -> Result<f64> {
        check_y("integral_h_over_x", y)?;
        if one_minus_y == 0.0 {
            return Ok(0.0);
        }
        if y < ORIGIN_SPLIT {
            if let Some(SmallY::Laplace(l)) = &self.origin {
                return l.integral_h_over_x(y);
            }
        }
        self.integral_h_over_x_quadrature(y)
    }

    fn integral_h_over_x_quadrature(&self, y: f64) -> Result<f64> {
        let c = (self.n as f64 - 3.0) / 2.0;
        let tol = Tolerance::quadrature().with_rel(1e-13).with_abs(0.0);
        let mut err = None;
        let upper = integrate_upper_power(
            |x| match g_eval(self, x) {
                Ok(g) => g.value / x,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            y.max(ORIGIN_SPLIT),
            c,
            tol,
        );
        if let Some(e) = err.take() {
            return Err(e);
        }
        let mut total = upper?;
        if y < ORIGIN_SPLIT {
            let lower = integrate(
                |s| match self.h_value((-s).exp(), -(-s).exp_m1()) {
                    Ok(h) => h,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                std::f64::consts::LN_2,
                -y.ln(),
                tol,
            );
            if let Some(e) = err {
                return Err(e);
            }
            total += lower?;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_beta;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn n3_closed_form(m: usize) -> f64 {
        // (3m)!/(3^m m!)^3 via log-gamma
        let mf = m as f64;
        (ln_gamma(3.0 * mf + 1.0) - 3.0 * (mf * 3f64.ln() + ln_gamma(mf + 1.0))).exp()
    }

    #[test]
    fn laplace_integral_matches_quadrature() {
        for n in [13, 20] {
            let t = CoeffTable::for_sample_size(n).unwrap();
            assert!(matches!(t.origin, Some(SmallY::Laplace(_))));
            for y in [0.45, 0.1, 1e-3] {
                let fast = t.integral_h_over_x(y, 1.0 - y).unwrap();
                let slow = t.integral_h_over_x_quadrature(y).unwrap();
                assert!(rel(fast, slow) < 1e-10, "n={n} y={y}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn n2_is_kronecker() {
        let t = build_coeffs(2, 10).unwrap();
        assert_eq!(t.d()[0], 1.0);
        assert!(t.d()[1..].iter().all(|&v| v == 0.0));
        let g = g_eval(&t, 0.3).unwrap();
        assert_eq!((g.value, g.derivative), (1.0, 0.0));
        let g = g_eval(&t, 1e-9).unwrap();
        assert_eq!(g.value, 1.0);
    }

    #[test]
    fn n3_matches_closed_form_times_constant() {
        let t = build_coeffs(3, 200).unwrap();
        let scale = 2.0 * PI / 3f64.sqrt();
        for m in 0..=200 {
            assert!(rel(t.d()[m], scale * n3_closed_form(m)) < 1e-10, "m={m}");
        }
    }

    #[test]
    fn n4_leading_coefficient() {
        // d_0 = Γ(1/4)Γ(1/2)Γ(3/4)·Γ(1/4)/Γ(3/4)·... frozen from a 30-digit evaluation
        let t = build_coeffs(4, 0).unwrap();
        assert!(rel(t.d()[0], 8.885_765_876_316_732) < 1e-14);
    }

    #[test]
    fn first_level_and_positivity() {
        let t = build_coeffs(6, 80).unwrap();
        assert_eq!(t.level(1)[0], 1.0);
        assert!(t.level(1)[1..].iter().all(|&v| v == 0.0));
        for i in 1..6 {
            assert!(t.level(i).iter().all(|&v| v >= 0.0));
        }
        assert!(t.d().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn build_rejects_bad_config() {
        assert!(matches!(build_coeffs(1, 5), Err(Error::Config(_))));
        assert!(matches!(build_coeffs(65, 5), Err(Error::Config(_))));
        assert!(matches!(build_coeffs(4, 20_001), Err(Error::Config(_))));
    }

    #[test]
    fn series_matches_direct_n3_sum() {
        let t = build_coeffs(3, 200).unwrap();
        let g = g_series(&t, 0.5).unwrap();
        let scale = 2.0 * PI / 3f64.sqrt();
        let direct: f64 = (0..200).map(|m| scale * n3_closed_form(m) * 0.5f64.powi(m as i32)).sum();
        assert!(rel(g.value, direct) < 1e-13);
        let g1 = g_series(&t, 1.0 - 1e-12).unwrap();
        assert!(rel(g1.value, scale) < 1e-11);
    }

    #[test]
    fn series_guard_near_zero() {
        let t = build_coeffs(4, 100).unwrap();
        match g_series(&t, 0.01) {
            Err(Error::NonConvergence { iterations, estimate, .. }) => {
                assert_eq!(iterations, 101);
                assert!(estimate > 0.0);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
        assert!(g_series(&t, 0.0).is_err());
    }

    // H(y) = (1−y)^{(n−3)/2} G(y), frozen from an mpmath Meijer-G evaluation
    const H_REF: [(usize, [f64; 3]); 3] = [
        (3, [4.206_546_315_976_363, 5.670_909_781_632_605, 7.913_072_070_612_178]),
        (4, [8.511_261_022_284_746, 20.795_228_243_560_343, 41.642_958_774_365_8]),
        (6, [20.015_609_314_555_324, 161.347_195_455_578_2, 655.024_345_587_188_3]),
    ];

    #[test]
    fn origin_expansion_matches_reference() {
        for (n, hs) in H_REF {
            let t = CoeffTable::for_sample_size(n).unwrap();
            assert!(t.has_origin_expansion(), "n={n}");
            for (y, want) in [0.5, 0.1, 0.01].into_iter().zip(hs) {
                let c = (n as f64 - 3.0) / 2.0;
                let g = g_eval(&t, y).unwrap();
                let h = g.value * (1.0 - y).powf(c);
                assert!(rel(h, want) < 1e-12, "n={n} y={y}: {h} vs {want}");
                let o = t.origin.as_ref().unwrap().eval(y).unwrap();
                assert!(rel(o.value * (1.0 - y).powf(c), want) < 1e-12);
            }
        }
    }

    #[test]
    fn small_y_evaluator_agrees_with_series() {
        for n in 3..=16 {
            let t = CoeffTable::for_sample_size(n).unwrap();
            let o = t.origin.as_ref().expect("small-y evaluator");
            for y in [0.05, 0.1, 0.3, 0.5] {
                let s = g_series(&t, y).unwrap();
                let e = o.eval(y).unwrap();
                assert!(rel(e.value, s.value) < 1e-10, "n={n} y={y}");
                assert!(rel(e.derivative, s.derivative) < 1e-10, "n={n} y={y}");
            }
        }
    }

    #[test]
    fn g_is_decreasing_and_above_d0() {
        for n in 3..=6 {
            let t = CoeffTable::for_sample_size(n).unwrap();
            let d0 = t.d()[0];
            let mut prev = f64::INFINITY;
            for i in 1..=19 {
                let y = i as f64 * 0.05;
                let g = g_eval(&t, y).unwrap();
                assert!(g.value > d0 && g.value < prev, "n={n} y={y}");
                assert!(g.derivative < 0.0);
                prev = g.value;
            }
        }
    }

    #[test]
    fn log_k_examples() {
        for a in [0.3, 1.0, 4.5] {
            assert!((log_k(2, a).unwrap() + ln_beta(a, 0.5)).abs() < 1e-14);
        }
        // direct Γ products
        let direct = |n: usize, a: f64, m: usize| -> f64 {
            (1..=m)
                .map(|i| {
                    let b = i as f64 / n as f64;
                    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
                })
                .sum()
        };
        assert!((log_k(4, 1.0).unwrap() - direct(4, 1.0, 3)).abs() < 1e-14);
        assert!((log_k(3, 2.0).unwrap() - direct(3, 2.0, 2)).abs() < 1e-14);
        assert!((log_k1(3, 1.0).unwrap() - direct(3, 1.0, 1)).abs() < 1e-14);
        assert!((log_k1(4, 2.0).unwrap() - direct(4, 2.0, 2)).abs() < 1e-14);
        assert!(log_k(4, 0.0).is_err());
        assert!(log_k1(2, 1.0).is_err());
    }

    #[test]
    fn k1_relation() {
        let (n, a) = (5usize, 0.7);
        let lhs = log_k1(n, a).unwrap() - log_k(n, a).unwrap() - ln_gamma(a) - ln_gamma(0.8) + ln_gamma(a + 0.8);
        assert!(lhs.abs() < 1e-13);
    }

    #[test]
    fn density_examples() {
        let t2 = build_coeffs(2, 5).unwrap();
        let f = density_y(2, 1.0, 0.5, &t2).unwrap();
        assert!(rel(f, 0.5f64.powf(-0.5) / ln_beta(1.0, 0.5).exp()) < 1e-14);
        let t3 = CoeffTable::for_sample_size(3).unwrap();
        assert!(density_y(4, 1.0, 0.5, &t3).is_err());
        assert!(density_y(3, 2.0, 0.9, &t3).unwrap() > 0.0);
        assert!(density_y(3, 2.0, 1.0, &t3).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for n in [3, 4, 6] {
            let t = CoeffTable::for_sample_size(n).unwrap();
            for a in [0.5, 1.5] {
                let z = normalization_integral(&t, a).unwrap();
                assert!((z - 1.0).abs() < 1e-8, "n={n} a={a}: {z}");
            }
        }
    }

    #[test]
    fn y1_density_integrates_to_one() {
        let n = 5;
        let t = CoeffTable::for_sample_size(n).unwrap();
        let a = 1.3;
        let nf = n as f64;
        let c = (nf - 1.0) * (nf - 2.0) / (2.0 * nf) - 1.0;
        let lk1 = log_k1(n, a).unwrap();
        let upper = integrate_upper_power(
            |y| (lk1 + (a - 1.0) * y.ln()).exp() * g1_eval(&t, y).unwrap().value,
            0.5,
            c,
            quad_tol(),
        )
        .unwrap();
        let lower = integrate(|y| density_y1(n, a, y, &t).unwrap(), 0.0, 0.5, quad_tol()).unwrap();
        assert!((upper + lower - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbiasedness_identity() {
        for n in [4, 5] {
            let t = CoeffTable::for_sample_size(n).unwrap();
            for a in [0.5, 2.0] {
                let s = unbiasedness_sum(&t, a).unwrap();
                let want = (-ln_gamma(a) - log_k(n, a).unwrap()).exp();
                assert!(rel(s, want) < 1e-8, "n={n} a={a}: {s} vs {want}");
            }
        }
    }

    #[test]
    fn plain_series_sum_for_identity() {
        // n=4, α=2: terms fall off like log(m)/m³, so stopping on a 1e-8
        // term leaves a tail of roughly M/2 times that term
        use crate::numkit::sum_series;
        let t = CoeffTable::for_sample_size(4).unwrap();
        let d = t.d();
        let tol = Tolerance::series().with_rel(1e-8).with_max_iter(d.len());
        let s = sum_series(
            |m| {
                let mf = m as f64;
                d[m] * (ln_gamma(mf + 1.5) - ln_gamma(mf + 3.5)).exp()
            },
            tol,
        )
        .unwrap();
        let want = (-log_k(4, 2.0).unwrap()).exp();
        assert!(rel(s, want) < 1e-4, "{s} vs {want}");
    }

    #[test]
    fn cache_round_trip() {
        let t = CoeffTable::for_sample_size(5).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"GCT1");
        assert_eq!(buf.len(), 12 + 4 * (t.order() + 1) * 8);
        let back = CoeffTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.order(), t.order());
        assert_eq!(back.d(), t.d());
        assert!(CoeffTable::read_from(&buf[..20]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(CoeffTable::read_from(bad.as_slice()).is_err());
    }

    #[test]
    fn adaptive_order_respects_cap() {
        let cfg = GseriesConfig { m_max: 50, ..Default::default() };
        assert!(matches!(CoeffTable::build_adaptive(4, &cfg), Err(Error::NonConvergence { .. })));
    }

    // H(y) = (1−y)^{(n−3)/2}G(y)·(1−y)^{−(n−3)/2}, i.e. G(y), frozen from a
    // 50-digit Talbot inversion of Π B(t, i/n)
    #[test]
    fn laplace_inversion_matches_reference() {
        for (n, y, want) in [
            (12, 1e-3, 2_502_326.839_072_999_3),
            (32, 1e-3, 5_852_332_589_296.380_2),
            (32, 1e-12, 5.701_769_461_151_272_8e22),
            (64, 1e-12, 8.155_212_610_651_218_5e36),
        ] {
            let l = LaplaceInversion::new(n, n - 1).unwrap();
            let g = l.eval(y).unwrap();
            assert!(rel(g.value, want) < 1e-12, "n={n} y={y}: {}", g.value);
        }
    }

    #[test]
    fn every_size_gets_a_small_y_evaluator() {
        for n in [3, 7, 10, 11, 12, 13, 14, 17, 24, 40, 64] {
            let t = CoeffTable::for_sample_size(n).unwrap();
            assert!(t.has_origin_expansion(), "n={n}");
            let g = g_eval(&t, 1e-8).unwrap();
            assert!(g.value > 0.0 && g.derivative < 0.0, "n={n}");
            if n >= 4 {
                let g1 = g1_eval(&t, 1e-8).unwrap();
                assert!(g1.value > 0.0 && g1.derivative < 0.0, "n={n}");
            }
            // continuity across the split
            let below = g_eval(&t, ORIGIN_SPLIT * (1.0 - 1e-12)).unwrap();
            let above = g_eval(&t, ORIGIN_SPLIT).unwrap();
            assert!(rel(below.value, above.value) < 1e-10, "n={n}");
        }
    }
}
