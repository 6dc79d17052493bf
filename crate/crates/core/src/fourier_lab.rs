//! Fourier transforms Φ̂(λ) = ∫ Φ(u) e^{-iλu} du and their decay envelopes.
//!
//! Two routes are available. The real-axis route integrates 2∫Φ(u)cos(λu)
//! directly; its absolute error cannot go below ~1e-16. The contour route
//! integrates along Im u = -y, with y chosen to minimise the peak of the
//! integrand, and keeps relative accuracy even when Φ̂(λ) is tiny.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, QuadResult};
use crate::roots::{bracket_root, golden_min};
use crate::test_functions::TestFunction;

/// Smallest accepted quadrature tolerance.
pub const MIN_TOL: f64 = 1e-14;
const SCAN_POINTS: usize = 2048;
/// Integrand values this many nats below the peak are dropped.
const LOG_CUTOFF: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    RealAxis,
    Contour,
}

/// A transform value with its error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub lambda: f64,
    pub value: f64,
    pub quad_err: f64,
    pub trunc_err: f64,
    /// ln(|value| + quad_err + trunc_err), kept separately so it survives underflow.
    pub ln_magnitude: f64,
    pub route: Route,
    /// Height y of the integration line Im u = -y (0 on the real axis).
    pub shift: f64,
}

impl FourierValue {
    pub fn total_err(&self) -> f64 {
        self.quad_err + self.trunc_err
    }
}

fn check_args(lambda: f64, tol: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(domain("lambda must be finite"));
    }
    if !(tol >= MIN_TOL) || !(tol <= 1.0) {
        return Err(domain(format!("tol must lie in [{MIN_TOL:e}, 1] (got {tol:e})")));
    }
    Ok(())
}

/// Φ̂(λ) by the contour route for λ ≠ 0 and the real-axis route at λ = 0.
pub fn fourier_transform(f: &TestFunction, lambda: f64, tol: f64) -> Result<FourierValue> {
    check_args(lambda, tol)?;
    let mut v = if lambda == 0.0 {
        transform_real_axis(f, 0.0, tol)?
    } else {
        transform_contour(f, lambda.abs(), tol)?
    };
    v.lambda = lambda;
    Ok(v)
}

/// Smallest U with -ln Φ(U) ≥ target.
fn cutoff(f: &TestFunction, target: f64) -> f64 {
    let mut hi = 1.0;
    while f.exponent_real(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f.exponent_real(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// 2∫₀^U Φ(u)cos(λu) du with panels no wider than π/(2|λ|+1).
pub fn transform_real_axis(f: &TestFunction, lambda: f64, tol: f64) -> Result<FourierValue> {
    check_args(lambda, tol)?;
    let lam = lambda.abs();
    let target = ((2.0 / tol).ln() + 2.0).max(40.0);
    let u = cutoff(f, target);
    // tail ∫_U^∞ e^{-G} ≤ e^{-G(U)}/G'(U) for convex increasing G
    let h = 1e-6 * u.max(1.0);
    let gp = (f.exponent_real(u + h) - f.exponent_real(u - h)) / (2.0 * h);
    let trunc_err = 2.0 * (-f.exponent_real(u)).exp() / gp;
    let width = std::f64::consts::PI / (2.0 * lam + 1.0);
    let panels = (u / width).ceil() as usize;
    let r: QuadResult<f64> = adaptive(|x| f.phi_real(x) * (lam * x).cos(), 0.0, u, panels, 0.1 * tol, 1e-15, 1 << 16);
    let value = 2.0 * r.value;
    let quad_err = 2.0 * r.err + 8.0 * f64::EPSILON * 2.0 * r.abs_integral;
    Ok(FourierValue {
        lambda,
        value,
        quad_err,
        trunc_err,
        ln_magnitude: (value.abs() + quad_err + trunc_err).ln(),
        route: Route::RealAxis,
        shift: 0.0,
    })
}

/// Log of the integrand e^{-G(x-iy) - iλx - λy}, real part only.
fn log_integrand(f: &TestFunction, lambda: f64, y: f64, x: f64) -> f64 {
    -f.exponent(Complex64::new(x, -y)).re - lambda * y
}

struct LineScan {
    xs: Vec<f64>,
    logs: Vec<f64>,
    peak: f64,
}

/// Samples Re E on [0, X], doubling X until the last quarter is negligible.
fn scan_line(f: &TestFunction, lambda: f64, y: f64) -> LineScan {
    let mut top = 8.0 + 2.0 * y;
    loop {
        let xs: Vec<f64> = (0..=SCAN_POINTS).map(|i| top * i as f64 / SCAN_POINTS as f64).collect();
        let logs: Vec<f64> = xs.iter().map(|&x| log_integrand(f, lambda, y, x)).collect();
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tail = logs[3 * SCAN_POINTS / 4..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let falling = logs[SCAN_POINTS] <= logs[SCAN_POINTS - 1];
        if (tail < peak - LOG_CUTOFF - 5.0 && falling) || top > 1e7 {
            return LineScan { xs, logs, peak };
        }
        top *= 2.0;
    }
}

/// Height of the integration line: minimises the peak log-modulus.
fn best_shift(f: &TestFunction, lambda: f64) -> f64 {
    let peak = |y: f64| scan_line(f, lambda, y).peak;
    let mut prev = (0.0, peak(0.0));
    let mut y = 0.5;
    let mut cur = (y, peak(y));
    let mut before = prev;
    while cur.1 < prev.1 && y < 1e6 {
        before = prev;
        prev = cur;
        y *= 2.0;
        cur = (y, peak(y));
    }
    let (lo, hi) = (before.0, cur.0);
    golden_min(peak, lo, hi, 1e-3 * (1.0 + hi)).0
}

/// Φ̂(λ) along the line Im u = -y; λ ≥ 0 assumed.
pub fn transform_contour(f: &TestFunction, lambda: f64, tol: f64) -> Result<FourierValue> {
    check_args(lambda, tol)?;
    let lam = lambda.abs();
    let y = best_shift(f, lam);
    let scan = scan_line(f, lam, y);
    let m = scan.peak;
    if !m.is_finite() {
        return Err(Error::Precision(format!("integrand not finite at lambda = {lambda}")));
    }
    let dx = scan.xs[1] - scan.xs[0];
    let keep: Vec<usize> = (0..scan.xs.len()).filter(|&i| scan.logs[i] >= m - LOG_CUTOFF).collect();
    let lo = scan.xs[keep[0].saturating_sub(1)];
    let hi = scan.xs[(keep[keep.len() - 1] + 1).min(scan.xs.len() - 1)];
    let l1_est: f64 = keep.iter().map(|&i| (scan.logs[i] - m).exp() * dx).sum();
    // dropped samples sit below e^{-LOG_CUTOFF}; twice for the two halves of the line
    let trunc_scaled = 2.0 * 2.0 * (-LOG_CUTOFF).exp() * scan.xs[scan.xs.len() - 1];
    let mut max_e: f64 = 0.0;
    let integrand = |x: f64| -> Complex64 {
        let e = -f.exponent(Complex64::new(x, -y)) - Complex64::new(lam * y, lam * x);
        (e - m).exp()
    };
    for &i in &keep {
        let x = scan.xs[i];
        let g = f.exponent_series(Complex64::new(x, -y));
        max_e = max_e.max(g.abs_sum + lam * (x + y));
    }
    let width = dx.min(std::f64::consts::PI / (lam + 1.0));
    let panels = (((hi - lo) / width).ceil() as usize).clamp(1, 1 << 15);
    let abs_tol = (0.25 * tol * (-m).exp()).max(1e-16 * l1_est);
    let r = adaptive(integrand, lo, hi, panels, abs_tol, 1e-15, 1 << 17);
    let scaled = 2.0 * r.value.re;
    let quad_scaled = 2.0 * r.err + 8.0 * f64::EPSILON * (1.0 + max_e) * 2.0 * r.abs_integral;
    let scale = m.exp();
    Ok(FourierValue {
        lambda,
        value: scaled * scale,
        quad_err: quad_scaled * scale,
        trunc_err: trunc_scaled * scale,
        ln_magnitude: m + (scaled.abs() + quad_scaled + trunc_scaled).ln(),
        route: Route::Contour,
        shift: y,
    })
}

/// Memo table of transforms for one family at one tolerance.
pub struct TransformCache {
    family: TestFunction,
    tol: f64,
    map: RwLock<HashMap<u64, FourierValue>>,
}

impl TransformCache {
    pub fn new(family: TestFunction, tol: f64) -> Self {
        TransformCache { family, tol, map: RwLock::new(HashMap::new()) }
    }

    pub fn family(&self) -> TestFunction {
        self.family
    }

    pub fn get(&self, lambda: f64) -> Result<FourierValue> {
        let key = lambda.to_bits();
        if let Some(v) = self.map.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        // computed outside the lock; a racing duplicate yields the same value
        let v = fourier_transform(&self.family, lambda, self.tol)?;
        self.map.write().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// Result of [`least_positive_root`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootEstimate {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub value_at_root: f64,
    pub err_at_root: f64,
    pub scan_step: f64,
}

/// Least positive zero of Φ̂ inside `hint`, with a scan of [0, hint.0] for earlier sign changes.
pub fn least_positive_root(f: &TestFunction, hint: (f64, f64)) -> Result<RootEstimate> {
    let (a, b) = hint;
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::Bracket { lo: a, hi: b, reason: "need 0 <= lo < hi".into() });
    }
    let tol = MIN_TOL;
    let eval = |x: f64| fourier_transform(f, x, tol);
    let fa = eval(a)?;
    let fb = eval(b)?;
    let sure = |v: &FourierValue| v.value.abs() > v.total_err();
    if !(sure(&fa) && sure(&fb)) || fa.value.signum() == fb.value.signum() {
        return Err(Error::Bracket { lo: a, hi: b, reason: "bracket invalid: no sign change".into() });
    }
    let mut failure = None;
    let (lo, hi) = bracket_root(
        |x| match eval(x) {
            Ok(v) => v.value,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        a,
        b,
        1e-11,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let root = 0.5 * (lo + hi);
    let at = eval(root)?;
    let step = 0.01;
    let n = (a / step).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let vals: Vec<Result<FourierValue>> = grid.par_iter().map(|&x| eval(x)).collect();
    let mut prev_sign = 0.0;
    for (x, v) in grid.iter().zip(vals) {
        let v = v?;
        if !sure(&v) {
            continue;
        }
        let s = v.value.signum();
        if prev_sign != 0.0 && s != prev_sign {
            return Err(Error::NotLeastRoot { root, earlier: *x });
        }
        prev_sign = s;
    }
    if prev_sign != 0.0 && prev_sign != fa.value.signum() {
        return Err(Error::NotLeastRoot { root, earlier: a });
    }
    Ok(RootEstimate { root, lo, hi, value_at_root: at.value, err_at_root: at.total_err(), scan_step: step })
}

/// Which explicit decay bound an envelope encodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// (5/√m) λ^{-β} exp(-λ^α sin(πκ)/α) for the power family.
    Power { m: u32 },
    /// exp(-λ F(λ)), F(u) = (3/5)(ln(u/q))^{q/p-1}, for the rational family.
    Rational { p: u32, q: u32 },
    /// exp(-(π/(1+δ)) λ ln λ) for the p/q = 1/2 member.
    HalfOrder { delta: f64 },
}

/// An explicit upper bound for |Φ̂(λ)| and the rate pair (F, φ) behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub family: TestFunction,
    pub kind: EnvelopeKind,
    pub lambda0: f64,
}

impl DecayEnvelope {
    /// The power-family bound; requires a power family.
    pub fn power(f: TestFunction) -> Result<Self> {
        match f {
            TestFunction::Power { m } => Ok(DecayEnvelope { family: f, kind: EnvelopeKind::Power { m }, lambda0: 0.0 }),
            _ => Err(domain("power envelope needs a power family")),
        }
    }

    pub fn rational(f: TestFunction) -> Result<Self> {
        match f {
            TestFunction::Rational { p, q } => {
                Ok(DecayEnvelope { family: f, kind: EnvelopeKind::Rational { p, q }, lambda0: q as f64 })
            }
            _ => Err(domain("rational envelope needs a rational family")),
        }
    }

    pub fn half_order(f: TestFunction, delta: f64) -> Result<Self> {
        if f != (TestFunction::Rational { p: 1, q: 2 }) {
            return Err(domain("half-order envelope needs rational:p=1,q=2"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(domain(format!("delta must be positive (got {delta})")));
        }
        Ok(DecayEnvelope { family: f, kind: EnvelopeKind::HalfOrder { delta }, lambda0: 1.0 })
    }

    /// Default envelope for a family: power bound, or the rational bound.
    pub fn default_for(f: TestFunction) -> Self {
        match f {
            TestFunction::Power { .. } => Self::power(f).expect("power"),
            TestFunction::Rational { .. } => Self::rational(f).expect("rational"),
        }
    }

    pub fn with_onset(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    /// Left end of the set where the bound is defined.
    pub fn domain_min(&self) -> f64 {
        match self.kind {
            EnvelopeKind::Power { .. } => 0.0,
            EnvelopeKind::Rational { q, .. } => q as f64,
            EnvelopeKind::HalfOrder { .. } => 1.0,
        }
    }

    fn power_exponents(m: u32) -> (f64, f64, f64) {
        let d = (2 * m - 1) as f64;
        (2.0 * m as f64 / d, (m - 1) as f64 / d, 1.0 / (2.0 * d))
    }

    /// ln of the bound at |λ|, or None outside the bound's domain.
    pub fn ln_bound(&self, lambda: f64) -> Option<f64> {
        let l = lambda.abs();
        if !(l > self.domain_min()) {
            return None;
        }
        Some(match self.kind {
            EnvelopeKind::Power { m } => {
                let (alpha, beta, kappa) = Self::power_exponents(m);
                (5.0 / (m as f64).sqrt()).ln() - beta * l.ln() - l.powf(alpha) / alpha * (std::f64::consts::PI * kappa).sin()
            }
            _ => -l * self.rate(l),
        })
    }

    /// The rate F(u).
    pub fn rate(&self, u: f64) -> f64 {
        match self.kind {
            EnvelopeKind::Power { m } => {
                let (alpha, _, kappa) = Self::power_exponents(m);
                let c0 = (std::f64::consts::PI * kappa).sin() / alpha;
                c0 * u.powf(1.0 / (2 * m - 1) as f64)
            }
            EnvelopeKind::Rational { p, q } => 0.6 * (u / q as f64).ln().powf(q as f64 / p as f64 - 1.0),
            EnvelopeKind::HalfOrder { delta } => std::f64::consts::PI * u.ln() / (1.0 + delta),
        }
    }

    /// ln φ(v), where φ is the inverse of F.
    pub fn ln_rate_inverse(&self, v: f64) -> f64 {
        match self.kind {
            EnvelopeKind::Power { m } => {
                let (alpha, _, kappa) = Self::power_exponents(m);
                let c0 = (std::f64::consts::PI * kappa).sin() / alpha;
                (2 * m - 1) as f64 * (v / c0).ln()
            }
            EnvelopeKind::Rational { p, q } => (q as f64).ln() + (5.0 * v / 3.0).powf(p as f64 / (q - p) as f64),
            EnvelopeKind::HalfOrder { delta } => (1.0 + delta) * v / std::f64::consts::PI,
        }
    }

    /// Derivative of ln φ(v).
    pub fn ln_rate_inverse_deriv(&self, v: f64) -> f64 {
        match self.kind {
            EnvelopeKind::Power { m } => (2 * m - 1) as f64 / v,
            EnvelopeKind::Rational { p, q } => {
                let e = p as f64 / (q - p) as f64;
                e * (5.0 / 3.0) * (5.0 * v / 3.0).powf(e - 1.0)
            }
            EnvelopeKind::HalfOrder { delta } => (1.0 + delta) / std::f64::consts::PI,
        }
    }

    /// φ(v); may overflow to infinity.
    pub fn rate_inverse(&self, v: f64) -> f64 {
        self.ln_rate_inverse(v).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayStatus {
    Pass,
    Fail,
    Skipped,
}

/// One grid point of a decay check; ratio = (|Φ̂| + errors)/bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub lambda: f64,
    pub transform_abs: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub status: DecayStatus,
    pub ln_transform_upper: f64,
    pub ln_envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub family: TestFunction,
    pub envelope: DecayEnvelope,
    pub points: Vec<DecayPoint>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Checks |Φ̂(λ)| + error ≤ bound at each grid point (compared as logarithms).
pub fn verify_decay(f: &TestFunction, env: &DecayEnvelope, grid: &[f64], tol: f64) -> Result<DecayReport> {
    if env.family != *f {
        return Err(domain(format!("envelope is for {} but family is {f}", env.family)));
    }
    let points: Vec<Result<DecayPoint>> = grid
        .par_iter()
        .map(|&lambda| {
            let ln_env = match env.ln_bound(lambda) {
                Some(b) if lambda.abs() >= env.lambda0 => b,
                _ => {
                    return Ok(DecayPoint {
                        lambda,
                        transform_abs: f64::NAN,
                        envelope: f64::NAN,
                        ratio: f64::NAN,
                        status: DecayStatus::Skipped,
                        ln_transform_upper: f64::NAN,
                        ln_envelope: f64::NAN,
                    })
                }
            };
            let v = fourier_transform(f, lambda, tol)?;
            let pass = v.ln_magnitude <= ln_env;
            Ok(DecayPoint {
                lambda,
                transform_abs: v.value.abs(),
                envelope: ln_env.exp(),
                ratio: (v.ln_magnitude - ln_env).exp(),
                status: if pass { DecayStatus::Pass } else { DecayStatus::Fail },
                ln_transform_upper: v.ln_magnitude,
                ln_envelope: ln_env,
            })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    let count = |s| points.iter().filter(|p| p.status == s).count();
    Ok(DecayReport {
        family: *f,
        envelope: *env,
        passed: count(DecayStatus::Pass),
        failed: count(DecayStatus::Fail),
        skipped: count(DecayStatus::Skipped),
        points,
    })
}

/// Smallest grid point from which the bound holds through the end of `grid`.
///
/// Returns None when the last grid point already fails.
pub fn calibrate_onset(f: &TestFunction, env: &DecayEnvelope, grid: &[f64], tol: f64) -> Result<Option<f64>> {
    let probe = env.with_onset(0.0);
    let report = verify_decay(f, &probe, grid, tol)?;
    let mut onset = None;
    for p in report.points.iter().rev() {
        match p.status {
            DecayStatus::Pass => onset = Some(p.lambda),
            DecayStatus::Fail => break,
            DecayStatus::Skipped => break,
        }
    }
    Ok(onset)
}

/// Φ̂ sampled on an equispaced grid over [0, lambda_max] with local 8-point Lagrange interpolation.
#[derive(Clone, Debug)]
pub struct TransformTable {
    step: f64,
    values: Vec<f64>,
    interp_err: f64,
}

impl TransformTable {
    pub fn build(f: &TestFunction, lambda_max: f64, step: f64, tol: f64) -> Result<Self> {
        if !(step > 0.0 && lambda_max > 0.0) {
            return Err(domain("table needs positive step and range"));
        }
        let n = (lambda_max / step).ceil() as usize + 6;
        let vals: Vec<Result<FourierValue>> =
            (0..=n).into_par_iter().map(|i| fourier_transform(f, i as f64 * step, tol)).collect();
        let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
        let max_value_err = vals.iter().map(|v| v.total_err()).fold(0.0, f64::max);
        let mut table = TransformTable { step, values: vals.iter().map(|v| v.value).collect(), interp_err: 0.0 };
        // interpolation error estimated from the 8- versus 6-point gap at cell midpoints
        let mut worst: f64 = 0.0;
        for i in 0..n - 6 {
            let x = (i as f64 + 0.5) * step;
            let (a, b) = table.interpolate_pair(x);
            worst = worst.max((a - b).abs());
        }
        table.interp_err = 2.0 * worst + max_value_err;
        Ok(table)
    }

    fn interpolate_pair(&self, lambda: f64) -> (f64, f64) {
        let x = lambda.abs() / self.step;
        let i = (x.floor() as usize).min(self.values.len() - 5);
        let lagrange = |first: isize, count: usize| -> f64 {
            let mut s = 0.0;
            for a in 0..count {
                let ja = first + a as isize;
                let mut w = 1.0;
                for b in 0..count {
                    if a != b {
                        let jb = first + b as isize;
                        w *= (x - jb as f64) / (ja - jb) as f64;
                    }
                }
                s += w * self.value_at(ja);
            }
            s
        };
        let i = i as isize;
        (lagrange(i - 3, 8), lagrange(i - 2, 6))
    }

    // Φ̂ is even, so negative grid indices mirror
    fn value_at(&self, j: isize) -> f64 {
        self.values[j.unsigned_abs()]
    }

    pub fn lambda_max(&self) -> f64 {
        (self.values.len() - 6) as f64 * self.step
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.interpolate_pair(lambda).0
    }

    /// Bound on |eval(λ) - Φ̂(λ)| over the table range.
    pub fn error_bound(&self) -> f64 {
        self.interp_err
    }
}
