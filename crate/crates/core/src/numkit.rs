//! Numerical workhorses: adaptive Gauss–Kronrod quadrature on a bounded
//! interval, Brent minimisation on a bracket, and a guarded series summer.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence controls shared by the numerical drivers.
///
/// `max_iter` is the subdivision depth for [`integrate`], the iteration cap
/// for [`minimize_scalar`] and the term cap for [`sum_series`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self> {
        if !(rel >= 0.0 && abs >= 0.0) || !(rel + abs > 0.0) || max_iter == 0 {
            return Err(Error::Config(format!(
                "tolerance needs rel, abs ≥ 0 with rel + abs > 0 and max_iter > 0 (got {rel}, {abs}, {max_iter})"
            )));
        }
        Ok(Tolerance { rel, abs, max_iter })
    }

    pub const fn series() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12, max_iter: 1_000_000 }
    }

    pub const fn minimize() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12, max_iter: 200 }
    }

    pub const fn quadrature() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12, max_iter: 60 }
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::domain(
            "integrate",
            format!("integrand not finite on [{lo}, {hi}]"),
        ));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Adaptive integral of `f` over `[lo, hi]`.
///
/// The interval is first mapped through x = lo + (hi−lo)(3u² − 2u³), which
/// turns an integrable endpoint power x^p into u^{2p+1} and leaves
/// polynomials polynomial. The mapped integrand is then handled by global
/// bisection driven by a 7/15-point Gauss–Kronrod pair. `f` is only ever
/// evaluated strictly inside the interval. Fails with
/// [`Error::NonConvergence`] once a panel would need splitting beyond
/// `tol.max_iter` levels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("integrate", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let mapped = |u: f64| {
        let w = 1.0 - u;
        let jac = 6.0 * u * w * width;
        if jac == 0.0 {
            return 0.0;
        }
        // evaluate from the nearer endpoint to keep resolution there
        let x = if u <= 0.5 {
            lo + width * u * u * (3.0 - 2.0 * u)
        } else {
            hi - width * w * w * (3.0 - 2.0 * w)
        };
        let x = x.clamp(lo, hi);
        if x == lo || x == hi {
            return 0.0;
        }
        f(x) * jac
    };
    integrate_bisect(mapped, 0.0, 1.0, tol)
        .map_err(|e| match e {
            Error::NonConvergence { iterations, estimate, .. } => Error::NonConvergence {
                context: format!("integrate on [{lo}, {hi}]"),
                iterations,
                estimate,
            },
            other => other,
        })
}

fn integrate_bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    let (v0, e0) = gauss_kronrod(&mut f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { lo, hi, value: v0, error: e0, depth: 0 });
    let mut total = v0;
    let mut total_err = e0;
    // loose cap on panels so a pathological integrand cannot eat memory
    let max_panels = 64 * tol.max_iter.max(1) + 2000;
    let mut splits = 0usize;
    loop {
        if total_err <= tol.target(total) {
            return Ok(heap.iter().map(|p| p.value).collect::<NeumaierSum>().value());
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= tol.max_iter || splits >= max_panels || mid <= worst.lo || mid >= worst.hi {
            return Err(Error::NonConvergence {
                context: String::new(),
                iterations: splits,
                estimate: total,
            });
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.lo, mid)?;
        let (v2, e2) = gauss_kronrod(&mut f, mid, worst.hi)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1, depth });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2, depth });
        splits += 1;
        if splits % 64 == 0 {
            // refresh running sums to shed accumulated rounding
            total = heap.iter().map(|p| p.value).collect::<NeumaierSum>().value();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// ∫_lo^1 g(x)(1−x)^p dx for p > −1, with the endpoint factor removed
/// analytically through u = (1−x)^{p+1}; `g` should be smooth near x = 1.
pub fn integrate_upper_power<F: FnMut(f64) -> f64>(
    mut g: F,
    lo: f64,
    p: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(p > -1.0) {
        return Err(Error::domain("integrate_upper_power", format!("exponent must exceed -1, got {p}")));
    }
    if !(lo < 1.0) {
        return Err(Error::domain("integrate_upper_power", format!("need lo < 1, got {lo}")));
    }
    let q = p + 1.0;
    let u_max = (1.0 - lo).powf(q);
    if u_max == 0.0 {
        return Ok(0.0);
    }
    let inv_q = 1.0 / q;
    let scaled = integrate(|u| g(1.0 - u.powf(inv_q)), 0.0, u_max, tol)?;
    Ok(scaled * inv_q)
}

/// Outcome of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinResult {
    pub argmin: f64,
    pub min_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent's golden-section/parabolic search for a local minimum in `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol.abs + tol.rel·|x|`. Among
/// evaluated points tying with the best value, the leftmost one is returned.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<MinResult> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("minimize_scalar", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for iter in 0..tol.max_iter {
        let xm = 0.5 * (a + b);
        let width_target = tol.abs + tol.rel * x.abs();
        if b - a <= width_target {
            let argmin = leftmost_tie([(x, fx), (w, fw), (v, fv)], a, b);
            return Ok(MinResult { argmin, min_value: fx, iterations: iter, converged: true });
        }
        let tol1 = 0.25 * width_target + 1e-3 * f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        let mut golden = true;
        if e.abs() > tol1 {
            // trial parabola through x, w, v
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::NonConvergence {
        context: format!("minimize_scalar on [{lo}, {hi}], bracket [{a}, {b}]"),
        iterations: tol.max_iter,
        estimate: x,
    })
}

fn leftmost_tie(points: [(f64, f64); 3], a: f64, b: f64) -> f64 {
    let best = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    points
        .iter()
        .filter(|p| p.1 == best && p.0 >= a && p.0 <= b)
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min)
        .min(points[0].0)
}

/// Σ_{m≥0} term(m), stopping at the first M for which
/// |term(M)| ≤ max(abs, rel·|S_M|) holds for five consecutive terms.
///
/// Running out of `tol.max_iter` terms is an error, never a silent
/// truncation.
pub fn sum_series<F: FnMut(usize) -> f64>(mut term: F, tol: Tolerance) -> Result<f64> {
    const SUSTAIN: usize = 5;
    let mut acc = NeumaierSum::default();
    let mut quiet = 0usize;
    for m in 0..tol.max_iter {
        let t = term(m);
        if !t.is_finite() {
            return Err(Error::domain("sum_series", format!("term {m} is not finite")));
        }
        acc.add(t);
        let s = acc.value();
        if t.abs() <= tol.target(s) {
            quiet += 1;
            if quiet >= SUSTAIN {
                return Ok(s);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        context: "sum_series".into(),
        iterations: tol.max_iter,
        estimate: acc.value(),
    })
}

/// Compensated (Kahan–Babuška–Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
