//! Short Dirichlet polynomials over primes, their moments, large-value
//! detection, and a numerical check of the smoothed log-zeta identity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fourier_lab::{DecayEnvelope, TransformCache, TransformTable};
use crate::prime_tools::{prime_power_weights, sieve, PrimeTable};
use crate::quad::{adaptive, gauss_legendre, tanh_sinh};
use crate::roots::bracket_root;
use crate::test_functions::TestFunction;
use crate::zeta_eval::hardy_z;

/// Largest moment order accepted by [`moments`].
pub const MAX_K: u32 = 8;
const COEFF_TOL: f64 = 1e-12;

/// A₀(t) = Σ_{p≤X} a(p)/√p · cos(t ln p) with a(p) = Φ̂(ln p / τ).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirichletPoly {
    pub tau: f64,
    pub x: f64,
    pub primes: Vec<u64>,
    pub a: Vec<f64>,
    log_p: Vec<f64>,
    coef: Vec<f64>,
}

impl DirichletPoly {
    pub fn new(table: &PrimeTable, f: &TestFunction, tau: f64, x: f64) -> Result<Self> {
        Self::with_cache(table, &TransformCache::new(*f, COEFF_TOL), tau, x)
    }

    pub fn with_cache(table: &PrimeTable, cache: &TransformCache, tau: f64, x: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(domain(format!("tau must be positive (got {tau})")));
        }
        if !(x >= 2.0) {
            return Err(domain(format!("X must be at least 2 (got {x})")));
        }
        if x > table.limit() as f64 {
            return Err(domain(format!("X = {x} exceeds sieve limit {}", table.limit())));
        }
        let primes: Vec<u64> = table.primes_up_to(x).iter().map(|&p| p as u64).collect();
        let log_p: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
        let a = log_p.iter().map(|l| cache.get(l / tau).map(|v| v.value)).collect::<Result<Vec<_>>>()?;
        let coef = a.iter().zip(&primes).map(|(a, &p)| a / (p as f64).sqrt()).collect();
        Ok(DirichletPoly { tau, x, primes, a, log_p, coef })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coef.iter().zip(&self.log_p).map(|(c, l)| c * (t * l).cos()).sum()
    }

    /// w_p = a(p)²/p.
    pub fn weights(&self) -> Vec<f64> {
        self.a.iter().zip(&self.primes).map(|(a, &p)| a * a / p as f64).collect()
    }

    /// Σ |a(p)|/√p, an upper bound for |A₀|.
    pub fn abs_coef_sum(&self) -> f64 {
        self.coef.iter().map(|c| c.abs()).sum()
    }
}

/// A₀(t) for a single t.
#[allow(non_snake_case)]
pub fn dirichlet_poly(table: &PrimeTable, f: &TestFunction, tau: f64, X: f64, t: f64) -> Result<f64> {
    Ok(DirichletPoly::new(table, f, tau, X)?.eval(t))
}

/// 𝔖_k = Σ over multisets of primes of (k!/Π m_i!)² Π w^{m_i}, via a generating function.
pub fn sigma_k(weights: &[f64], k: usize) -> f64 {
    let mut inv_fact2 = vec![1.0; k + 1];
    for m in 1..=k {
        inv_fact2[m] = inv_fact2[m - 1] / (m * m) as f64;
    }
    let mut c = vec![0.0; k + 1];
    c[0] = 1.0;
    for &w in weights {
        for deg in (1..=k).rev() {
            let mut wp = 1.0;
            let mut add = 0.0;
            for m in 1..=deg {
                wp *= w;
                add += wp * inv_fact2[m] * c[deg - m];
            }
            c[deg] += add;
        }
    }
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    kf * kf * c[k]
}

/// 𝔖_k for k ≤ 3 by listing multisets directly.
pub fn sigma_k_enumerated(weights: &[f64], k: usize) -> Result<f64> {
    let n = weights.len();
    let w = weights;
    Ok(match k {
        1 => w.iter().sum(),
        2 => {
            let mut s = 0.0;
            for i in 0..n {
                s += w[i] * w[i];
                for j in i + 1..n {
                    s += 4.0 * w[i] * w[j];
                }
            }
            s
        }
        3 => {
            let mut s = 0.0;
            for i in 0..n {
                for j in i..n {
                    for l in j..n {
                        let mult = if i == j && j == l {
                            1.0
                        } else if i == j || j == l {
                            9.0
                        } else {
                            36.0
                        };
                        s += mult * w[i] * w[j] * w[l];
                    }
                }
            }
            s
        }
        _ => return Err(domain("enumeration is implemented for k <= 3")),
    })
}

/// (k!)² e_k(w): the part of 𝔖_k coming from tuples of distinct primes.
pub fn sigma_k_distinct(weights: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &w in weights {
        for deg in (1..=k).rev() {
            e[deg] += w * e[deg - 1];
        }
    }
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    kf * kf * e[k]
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ∫_T^{T+H} W^{2k} and ∫ W^{2k+1} by composite Gauss-Legendre.
///
/// Returns (I, J, error estimate of I from a lower-order rule).
#[allow(non_snake_case)]
pub fn moment_integrals<W: Fn(f64) -> f64 + Sync>(w: W, T: f64, H: f64, k: u32, cell: f64, sub: usize) -> (f64, f64, f64) {
    let (x16, w16) = gauss_legendre(16);
    let (x10, w10) = gauss_legendre(10);
    let cells = (H / cell).ceil().max(1.0) as usize;
    let pieces = cells * sub.max(1);
    let h = H / pieces as f64;
    let parts: Vec<(f64, f64, f64)> = (0..pieces)
        .into_par_iter()
        .map(|i| {
            let a = T + i as f64 * h;
            let c = a + 0.5 * h;
            let mut i16 = 0.0;
            let mut j16 = 0.0;
            for (x, wt) in x16.iter().zip(&w16) {
                let v = w(c + 0.5 * h * x);
                let p = v.powi(2 * k as i32);
                i16 += wt * p;
                j16 += wt * p * v;
            }
            let mut i10 = 0.0;
            for (x, wt) in x10.iter().zip(&w10) {
                i10 += wt * w(c + 0.5 * h * x).powi(2 * k as i32);
            }
            (0.5 * h * i16, 0.5 * h * j16, 0.5 * h * (i16 - i10).abs())
        })
        .collect();
    parts.iter().fold((0.0, 0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1, s.2 + p.2))
}

/// Moments of A₀ over [T, T+H] and the derived detection level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MomentReport {
    pub family: Option<TestFunction>,
    pub tau: f64,
    pub k: u32,
    pub X: f64,
    pub T: f64,
    pub H: f64,
    pub grid_step: f64,
    pub I_k: f64,
    pub J_k: f64,
    pub quad_err: f64,
    pub sigma_k: f64,
    pub sigma_k_distinct: f64,
    pub diag: f64,
    pub M: f64,
    pub even_condition: bool,
    pub odd_condition: bool,
    pub detected_t: Option<f64>,
}

impl MomentReport {
    /// Both moment conditions of the detection lemma at level M.
    pub fn conditions_hold(&self) -> bool {
        self.even_condition && self.odd_condition
    }

    /// Re-evaluates the two conditions for a different level.
    pub fn with_level(mut self, m: f64) -> Self {
        let k = self.k as i32;
        self.M = m;
        self.even_condition = self.I_k > self.H * m.powi(2 * k);
        self.odd_condition = self.J_k.abs() <= 0.5 * self.H * m.powi(2 * k + 1);
        self.detected_t = None;
        self
    }
}

fn default_level(i_k: f64, h: f64, k: u32) -> f64 {
    (i_k / h).powf(1.0 / (2 * k) as f64) * (1.0 - 1e-6)
}

/// Moments of a generic real function; used for fixtures with known moments.
#[allow(non_snake_case)]
pub fn moments_of<W: Fn(f64) -> f64 + Sync>(w: W, T: f64, H: f64, k: u32, cell: f64, max_freq: f64) -> Result<MomentReport> {
    if !(H > 0.0) {
        return Err(domain(format!("H must be positive (got {H})")));
    }
    if k == 0 || k > MAX_K {
        return Err(domain(format!("k must lie in 1..={MAX_K} (got {k})")));
    }
    let sub = ((2 * k + 1) as f64 * max_freq * cell / std::f64::consts::PI).ceil() as usize + 1;
    let (i_k, j_k, err) = moment_integrals(w, T, H, k, cell, sub);
    let report = MomentReport {
        family: None,
        tau: f64::NAN,
        k,
        X: f64::NAN,
        T,
        H,
        grid_step: cell,
        I_k: i_k,
        J_k: j_k,
        quad_err: err,
        sigma_k: f64::NAN,
        sigma_k_distinct: f64::NAN,
        diag: f64::NAN,
        M: 0.0,
        even_condition: false,
        odd_condition: false,
        detected_t: None,
    };
    Ok(report.with_level(default_level(i_k, H, k)))
}

/// Moments of A₀ built from Φ̂ at ln p/τ for p ≤ X.
#[allow(non_snake_case, clippy::too_many_arguments)]
pub fn moments(
    table: &PrimeTable,
    f: &TestFunction,
    tau: f64,
    X: f64,
    T: f64,
    H: f64,
    k: u32,
    grid_step: f64,
) -> Result<MomentReport> {
    let poly = DirichletPoly::new(table, f, tau, X)?;
    moments_for(&poly, Some(*f), T, H, k, grid_step)
}

#[allow(non_snake_case)]
pub fn moments_for(poly: &DirichletPoly, family: Option<TestFunction>, T: f64, H: f64, k: u32, grid_step: f64) -> Result<MomentReport> {
    if k == 0 || k > MAX_K {
        return Err(domain(format!("k must lie in 1..={MAX_K} (got {k})")));
    }
    let ln_x = poly.x.ln();
    let max_step = std::f64::consts::PI / (2.0 * ln_x);
    if !(grid_step > 0.0 && grid_step <= max_step) {
        return Err(domain(format!("grid_step must lie in (0, π/(2 ln X)] = (0, {max_step:.6}] (got {grid_step})")));
    }
    let mut report = moments_of(|t| poly.eval(t), T, H, k, grid_step, ln_x)?;
    let w = poly.weights();
    let s = sigma_k(&w, k as usize);
    report.family = family;
    report.tau = poly.tau;
    report.X = poly.x;
    report.sigma_k = s;
    report.sigma_k_distinct = sigma_k_distinct(&w, k as usize);
    report.diag = 0.25f64.powi(k as i32) * binomial(2 * k as u64, k as u64) * H * s;
    Ok(report)
}

/// Grid samples (t, A₀(t)) on [T, T+H].
#[allow(non_snake_case)]
pub fn sample_grid<W: Fn(f64) -> f64 + Sync>(w: W, T: f64, H: f64, step: f64) -> Vec<(f64, f64)> {
    let n = (H / step).ceil() as usize;
    (0..=n).into_par_iter().map(|i| {
        let t = (T + i as f64 * step).min(T + H);
        (t, w(t))
    }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStatus {
    Detected,
    ConditionsNotSatisfied,
    NotRealizedOnGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub status: DetectionStatus,
    pub t: Option<f64>,
    pub value: Option<f64>,
    pub threshold: f64,
}

/// The largest sample, provided the moment conditions hold and it exceeds M/2.
pub fn tsang_detect(report: &MomentReport, samples: &[(f64, f64)]) -> Detection {
    let threshold = 0.5 * report.M;
    if !report.conditions_hold() {
        return Detection { status: DetectionStatus::ConditionsNotSatisfied, t: None, value: None, threshold };
    }
    let best = samples
        .iter()
        .filter(|(t, _)| *t >= report.T && *t <= report.T + report.H)
        .fold(None, |acc: Option<(f64, f64)>, &(t, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((t, v)),
        });
    match best {
        Some((t, v)) if v > threshold => Detection { status: DetectionStatus::Detected, t: Some(t), value: Some(v), threshold },
        Some((t, v)) => Detection { status: DetectionStatus::NotRealizedOnGrid, t: Some(t), value: Some(v), threshold },
        None => Detection { status: DetectionStatus::NotRealizedOnGrid, t: None, value: None, threshold },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Terms of the error budget of a convolution check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub window_tail: f64,
    pub lhs_quadrature: f64,
    pub zeta_error: f64,
    pub prime_sum_tail: f64,
    pub interpolation: f64,
    pub b_quadrature: f64,
    pub rounding: f64,
}

impl Budget {
    pub fn total(&self) -> f64 {
        self.window_tail + self.lhs_quadrature + self.zeta_error + self.prime_sum_tail + self.interpolation + self.b_quadrature + self.rounding
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ConvolutionCheck {
    pub family: TestFunction,
    pub t: f64,
    pub tau: f64,
    pub window: f64,
    pub tol: f64,
    pub lhs: f64,
    pub rhs_A: f64,
    pub rhs_B: f64,
    pub residual: f64,
    pub budget: f64,
    pub terms: Budget,
    /// Half-width actually integrated; the rest of the window is covered by `terms.window_tail`.
    pub integrated_half_width: f64,
    pub prime_cutoff: u64,
    pub zeros_in_window: usize,
    pub status: CheckStatus,
}

/// Bound on ∫_{|u|>U} Φ(τu) |ln|ζ(1/2+i(t+u))|| du from the growth envelope.
fn window_tail(f: &TestFunction, tau: f64, t: f64, u: f64, window: f64) -> f64 {
    let gp = f.growth_pair();
    let x = tau * u;
    if x < gp.u0 || gp.big_g_prime(x) <= 0.0 {
        return f64::INFINITY;
    }
    4.0 * (t + window + 3.0).ln() * (-gp.big_g(x)).exp() / (tau * gp.big_g_prime(x))
}

/// (1/τ)∫_v^∞ e^{x/2} B(x/τ) dx for the decay bound B, or None if undefined at v.
fn prime_tail(env: &DecayEnvelope, tau: f64, v: f64) -> Option<f64> {
    let lb = |x: f64| env.ln_bound(x / tau);
    let g0 = lb(v)? + 0.5 * v;
    // the integrand must already be decreasing at v
    let h = 1e-4 * v.max(1.0);
    let g1 = lb(v + h)? + 0.5 * (v + h);
    if g1 >= g0 {
        return None;
    }
    let r = adaptive(|x: f64| lb(x).map_or(0.0, |b| (b + 0.5 * x - g0).exp()), v, v + 400.0, 64, 1e-14, 1e-10, 4096);
    Some(r.value * g0.exp() / tau)
}

/// Compares ∫Φ(τu) ln|ζ(1/2+i(t+u))| du over |u| ≤ window with A(t) - B(t).
pub fn convolution_check(f: &TestFunction, tau: f64, t: f64, window: f64, tol: f64) -> Result<ConvolutionCheck> {
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be at least 1 (got {tau})")));
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(domain(format!("window must be positive (got {window})")));
    }
    if !(t >= window + 10.0 && t.is_finite()) {
        return Err(domain(format!("t must be at least window + 10 = {} (got {t})", window + 10.0)));
    }
    if !(1e-10..1.0).contains(&tol) {
        return Err(domain(format!("tol must lie in [1e-10, 1) (got {tol})")));
    }
    let env = DecayEnvelope::default_for(*f);

    // --- prime-power sum ---
    let mut v = tau * env.domain_min().max(1.0) + 0.25;
    let trunc = loop {
        if let Some(tail) = prime_tail(&env, tau, v) {
            if tail < 0.25 * tol {
                break tail;
            }
        }
        v += 0.25;
        if v > (crate::prime_tools::MAX_LIMIT as f64).ln() {
            return Err(Error::Range(format!("prime cutoff for tol {tol:e} exceeds the sieve range")));
        }
    };
    let n_cut = v.exp().ceil() as u64;
    let table = sieve(n_cut.max(2))?;
    let coeffs = TransformTable::build(f, v / tau + 0.1, 1.0 / 64.0, 1e-13)?;
    let powers = prime_power_weights(&table, n_cut)?;
    let mut a_sum = 0.0;
    let mut a_abs = 0.0;
    let mut weight_sum = 0.0;
    for &(n, l1) in &powers {
        let ln_n = (n as f64).ln();
        let w = l1 / (n as f64).sqrt();
        let term = w * coeffs.eval(ln_n / tau) * (t * ln_n).cos();
        a_sum += term;
        a_abs += term.abs();
        weight_sum += w;
    }
    let rhs_a = a_sum / tau;
    let interpolation = coeffs.error_bound() * weight_sum / tau;

    // --- B(t) correction ---
    let b = adaptive(
        |u: f64| f.phi_complex(Complex64::new(-t * tau, -u * tau)).re,
        0.0,
        0.5,
        4,
        1e-16,
        1e-14,
        4096,
    );
    let rhs_b = 2.0 * std::f64::consts::PI * b.value;
    let b_err = 2.0 * std::f64::consts::PI * (b.err + 4.0 * f64::EPSILON * b.abs_integral);

    // --- windowed integral ---
    let mut u = window;
    let mut tail = 0.0;
    let mut probe = 0.05;
    while probe < window {
        let bound = window_tail(f, tau, t, probe, window);
        if bound < tol / 16.0 {
            u = probe;
            tail = bound;
            break;
        }
        probe += 0.05;
    }
    let (lo, hi) = (t - u, t + u);
    let z = |x: f64| hardy_z(x).map(|s| s.z_value).unwrap_or(f64::NAN);
    let step = 0.01;
    let n = ((hi - lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
    let zs: Vec<f64> = grid.par_iter().map(|&x| z(x)).collect();
    let mut cuts = vec![lo];
    for i in 0..n {
        if zs[i] == 0.0 {
            cuts.push(grid[i]);
        } else if zs[i].signum() != zs[i + 1].signum() && zs[i + 1] != 0.0 {
            let (a, b) = bracket_root(z, grid[i], grid[i + 1], 1e-13 * t)?;
            cuts.push(0.5 * (a + b));
        }
    }
    let zeros = cuts.len() - 1;
    cuts.push(hi);
    cuts.dedup();
    let pieces: Vec<(f64, f64, f64)> = cuts
        .par_windows(2)
        .map(|w| {
            let r = tanh_sinh(
                |x, _, _| {
                    let zv = z(x).abs();
                    if zv == 0.0 {
                        0.0
                    } else {
                        f.phi_real(tau * (x - t)) * zv.ln()
                    }
                },
                w[0],
                w[1],
                1e-12,
            );
            (r.value, r.err, r.abs_integral)
        })
        .collect();
    let lhs: f64 = pieces.iter().map(|p| p.0).sum();
    let lhs_quad: f64 = pieces.iter().map(|p| p.1 + 8.0 * f64::EPSILON * p.2).sum();

    // error of ln|Z| from the evaluator, folded through the weight
    let (gx, gw) = gauss_legendre(8);
    let zeta_error: f64 = grid
        .par_windows(2)
        .map(|c| {
            let mid = 0.5 * (c[0] + c[1]);
            let half = 0.5 * (c[1] - c[0]);
            gx.iter()
                .zip(&gw)
                .map(|(x, w)| {
                    let s = mid + half * x;
                    let zs = hardy_z(s).expect("in range");
                    w * half * f.phi_real(tau * (s - t)) * zs.err / zs.abs_zeta.max(1e-6)
                })
                .sum::<f64>()
        })
        .sum();

    let rounding = 16.0 * f64::EPSILON * (a_abs * (1.0 + t * v) / tau + lhs.abs());
    let terms = Budget {
        window_tail: tail,
        lhs_quadrature: lhs_quad,
        zeta_error,
        prime_sum_tail: trunc,
        interpolation,
        b_quadrature: b_err,
        rounding,
    };
    let budget = terms.total();
    let residual = (lhs - (rhs_a - rhs_b)).abs();
    let status = if !budget.is_finite() || budget > 0.5 * lhs.abs() {
        CheckStatus::Inconclusive
    } else if residual <= budget {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(ConvolutionCheck {
        family: *f,
        t,
        tau,
        window,
        tol,
        lhs,
        rhs_A: rhs_a,
        rhs_B: rhs_b,
        residual,
        budget,
        terms,
        integrated_half_width: u,
        prime_cutoff: n_cut,
        zeros_in_window: zeros,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_agrees_with_enumeration() {
        let w = [0.3, 0.1, 0.05, 0.02, 0.011];
        for k in 1..=3 {
            let a = sigma_k(&w, k);
            let b = sigma_k_enumerated(&w, k).unwrap();
            assert!((a - b).abs() < 1e-14 * b, "{k}: {a} {b}");
            assert!(a >= sigma_k_distinct(&w, k));
        }
    }

    #[test]
    fn cos_fixture_moments() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let r = moments_of(|t: f64| t.cos(), 0.0, two_pi, 1, 0.1, 1.0).unwrap();
        assert!((r.I_k - std::f64::consts::PI).abs() < 1e-13);
        assert!(r.J_k.abs() < 1e-13);
        let r = r.with_level(0.7);
        assert!(r.conditions_hold());
        let samples = sample_grid(|t: f64| t.cos(), 0.0, two_pi, 0.01);
        let d = tsang_detect(&r, &samples);
        assert_eq!(d.status, DetectionStatus::Detected);
        assert_eq!(d.value, Some(1.0));
        let d = tsang_detect(&r.clone().with_level(0.9), &samples);
        assert_eq!(d.status, DetectionStatus::ConditionsNotSatisfied);
    }

    #[test]
    fn rejects_bad_arguments() {
        let table = sieve(100).unwrap();
        let g = TestFunction::gaussian();
        assert!(moments(&table, &g, 2.0, 50.0, 0.0, 10.0, 9, 0.1).is_err());
        assert!(moments(&table, &g, 2.0, 50.0, 0.0, 10.0, 1, 1.0).is_err());
        assert!(dirichlet_poly(&table, &g, 2.0, 200.0, 0.0).is_err());
        assert!(convolution_check(&g, 2.0, 35.0, 30.0, 1e-3).is_err());
    }
}
