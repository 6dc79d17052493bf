//! Parameter equations and closed-form lower bounds for max ln|ζ(1/2+it)|.
//!
//! Heights are carried as ln H (or ln ln H): the interesting H overflow f64.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fourier_lab::{DecayEnvelope, FourierValue, TransformCache, MIN_TOL};
use crate::prime_tools::PrimeTable;
use crate::test_functions::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// ατ + ln φ(τ/2+1) = ln ln H.
    Full,
    /// ατ/2 + ln φ(τ/2+1) = ln ln H, for rates with ln φ(v) ≤ v/2.
    Half,
}

impl Mode {
    fn weight(self) -> f64 {
        match self {
            Mode::Full => 1.0,
            Mode::Half => 0.5,
        }
    }
}

/// A height H, stored as ln H.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Height {
    pub ln_h: f64,
}

impl Height {
    pub fn from_h(h: f64) -> Result<Self> {
        if !(h > 1.0 && h.is_finite()) {
            return Err(domain(format!("H must exceed 1 (got {h})")));
        }
        Ok(Height { ln_h: h.ln() })
    }

    pub fn from_ln(ln_h: f64) -> Result<Self> {
        if !(ln_h > 0.0 && ln_h.is_finite()) {
            return Err(domain(format!("ln H must be positive (got {ln_h})")));
        }
        Ok(Height { ln_h })
    }

    pub fn from_lnln(lnln_h: f64) -> Result<Self> {
        if !lnln_h.is_finite() || lnln_h > 700.0 {
            return Err(domain(format!("ln ln H must be finite and at most 700 (got {lnln_h})")));
        }
        Ok(Height { ln_h: lnln_h.exp() })
    }

    pub fn lnln(&self) -> f64 {
        self.ln_h.ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSolution {
    pub tau: f64,
    pub residual: f64,
    pub iterations: u32,
}

fn lhs(env: &DecayEnvelope, alpha: f64, mode: Mode, tau: f64) -> f64 {
    mode.weight() * alpha * tau + env.ln_rate_inverse(0.5 * tau + 1.0)
}

/// Root τ of c·ατ + ln φ(τ/2+1) = ln ln H by bisection and Newton polish.
pub fn solve_tau(env: &DecayEnvelope, alpha: f64, h: Height, mode: Mode) -> Result<TauSolution> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("alpha must be positive (got {alpha})")));
    }
    let target = h.lnln();
    if lhs(env, alpha, mode, 0.0) >= target {
        return Err(Error::Unsolvable(format!(
            "H below solvability threshold: ln ln H = {target} but the left side is already {} at tau = 0",
            lhs(env, alpha, mode, 0.0)
        )));
    }
    let mut lo = 0.0;
    let mut hi = 2.0 * target / alpha;
    while lhs(env, alpha, mode, hi) < target {
        hi *= 2.0;
    }
    let mut iterations = 0;
    while hi - lo > 1e-9 * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if lhs(env, alpha, mode, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..4 {
        let r = lhs(env, alpha, mode, tau) - target;
        let d = mode.weight() * alpha + 0.5 * env.ln_rate_inverse_deriv(0.5 * tau + 1.0);
        let next = tau - r / d;
        if !(next > lo - 1e-6 && next < hi + 1e-6) {
            break;
        }
        tau = next;
        iterations += 1;
    }
    let residual = (lhs(env, alpha, mode, tau) - target).abs();
    Ok(TauSolution { tau, residual, iterations })
}

/// Sampled checks of the structural conditions on φ and on (X, k).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideConditions {
    pub phi_increasing: bool,
    pub ln_v_below_ln_phi: bool,
    pub ln_phi_below_exp: bool,
    /// ln φ(v) ≤ v/2; only required in half mode.
    pub ln_phi_below_half_v: Option<bool>,
    pub k_at_least_7: bool,
    /// X^{3k} ≤ H^{3/4} (full) or X^{15k/4} ≤ H^{15/16} (half).
    pub x_power_bound: bool,
    pub v_min: f64,
    pub v_max: f64,
}

impl SideConditions {
    pub fn all(&self) -> bool {
        self.phi_increasing
            && self.ln_v_below_ln_phi
            && self.ln_phi_below_exp
            && self.ln_phi_below_half_v.unwrap_or(true)
            && self.k_at_least_7
            && self.x_power_bound
    }
}

fn side_conditions(env: &DecayEnvelope, alpha: f64, tau: f64, mode: Mode, k: u64, ln_x: f64, h: Height) -> SideConditions {
    let v0 = 0.5 * tau + 1.0;
    let v1 = 4.0 * v0;
    let n = 64;
    let vs: Vec<f64> = (0..=n).map(|i| v0 + (v1 - v0) * i as f64 / n as f64).collect();
    let lp: Vec<f64> = vs.iter().map(|&v| env.ln_rate_inverse(v)).collect();
    let (num, den) = match mode {
        Mode::Full => (3.0, 0.75),
        Mode::Half => (15.0 / 4.0, 15.0 / 16.0),
    };
    SideConditions {
        phi_increasing: lp.windows(2).all(|w| w[1] > w[0]),
        ln_v_below_ln_phi: vs.iter().zip(&lp).all(|(v, l)| v.ln() <= *l),
        ln_phi_below_exp: vs.iter().zip(&lp).all(|(v, l)| *l <= (0.5 * alpha * v).exp()),
        ln_phi_below_half_v: match mode {
            Mode::Full => None,
            Mode::Half => Some(vs.iter().zip(&lp).all(|(v, l)| *l <= 0.5 * v)),
        },
        k_at_least_7: k >= 7,
        x_power_bound: num * k as f64 * ln_x <= den * h.ln_h,
        v_min: v0,
        v_max: v1,
    }
}

/// Memo of transform values, one table per family.
#[derive(Default)]
pub struct BoundsEngine {
    caches: RwLock<HashMap<TestFunction, Arc<TransformCache>>>,
}

impl BoundsEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transform(&self, f: &TestFunction, lambda: f64) -> Result<FourierValue> {
        let cache = {
            let read = self.caches.read().expect("cache lock");
            read.get(f).cloned()
        };
        let cache = match cache {
            Some(c) => c,
            None => {
                let mut w = self.caches.write().expect("cache lock");
                w.entry(*f).or_insert_with(|| Arc::new(TransformCache::new(*f, MIN_TOL))).clone()
            }
        };
        cache.get(lambda)
    }

    /// Φ̂′(λ) by central differences at h = 1e-5 and 5e-6; returns (coarse, fine).
    pub fn derivative(&self, f: &TestFunction, lambda: f64) -> Result<(f64, f64)> {
        let d = |h: f64| -> Result<f64> {
            Ok((self.transform(f, lambda + h)?.value - self.transform(f, lambda - h)?.value) / (2.0 * h))
        };
        Ok((d(1e-5)?, d(5e-6)?))
    }
}

/// Solved parameters of the general bound for one (Φ, α, H, mode).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub family: TestFunction,
    pub envelope: DecayEnvelope,
    pub alpha: f64,
    pub kappa: f64,
    pub kappa_rule: String,
    pub tau: f64,
    pub tau_residual: f64,
    pub mode: Mode,
    pub ln_x: f64,
    pub k: u64,
    pub m_level: f64,
    pub mu: f64,
    pub ln_mu: f64,
    pub ln_h: f64,
    pub lnln_h: f64,
    pub phi_hat_alpha: f64,
    pub phi_hat_0: f64,
    pub side_conditions: Option<SideConditions>,
    pub valid: bool,
    pub reasons: Vec<String>,
}

fn floor_k(ln_num: f64, den: f64) -> Result<u64> {
    let ln_k = ln_num - den.ln();
    if ln_k > 62.0 * std::f64::consts::LN_2 {
        return Err(Error::Range(format!("k = e^{ln_k:.3} overflows u64")));
    }
    Ok(ln_k.exp().floor() as u64)
}

/// Solves for τ and fills in κ, X, k, M and μ* (full) or μ** (half).
pub fn theorem_a_bound(engine: &BoundsEngine, env: &DecayEnvelope, alpha: f64, h: Height, mode: Mode) -> Result<BoundParams> {
    let f = env.family;
    let (kappa, rule) = match mode {
        Mode::Full => ((4.0 / alpha).max(61.0), "kappa = max(61, 4/alpha)"),
        Mode::Half => ((4.0 / alpha).max(0.5), "kappa = max(0.5, 4/alpha)"),
    };
    let phi0 = engine.transform(&f, 0.0)?.value;
    let pa = engine.transform(&f, alpha)?;
    let mut params = BoundParams {
        family: f,
        envelope: *env,
        alpha,
        kappa,
        kappa_rule: rule.to_string(),
        tau: f64::NAN,
        tau_residual: f64::NAN,
        mode,
        ln_x: f64::NAN,
        k: 0,
        m_level: f64::NAN,
        mu: f64::NAN,
        ln_mu: f64::NAN,
        ln_h: h.ln_h,
        lnln_h: h.lnln(),
        phi_hat_alpha: pa.value,
        phi_hat_0: phi0,
        side_conditions: None,
        valid: false,
        reasons: Vec::new(),
    };
    let sol = match solve_tau(env, alpha, h, mode) {
        Ok(s) => s,
        Err(Error::Unsolvable(msg)) => {
            params.reasons.push(msg);
            return Ok(params);
        }
        Err(e) => return Err(e),
    };
    let tau = sol.tau;
    params.tau = tau;
    params.tau_residual = sol.residual;
    params.ln_x = tau * env.rate_inverse(0.5 * tau + 1.0);
    let c = mode.weight();
    params.k = floor_k(c * alpha * tau, alpha * kappa * tau)?;
    let k = params.k as f64;
    if !(pa.value > pa.total_err()) {
        params.reasons.push(format!("alpha at or beyond root: transform at alpha is {:e}", pa.value));
    }
    let ratio = pa.value / phi0;
    match mode {
        Mode::Full => {
            params.m_level = 0.5 * pa.value * (k * kappa.ln() / (std::f64::consts::E * alpha * tau)).sqrt();
            params.ln_mu = (ratio / (10.0 * alpha)).ln() + 0.5 * (kappa.ln() / kappa).ln() + 0.5 * alpha * tau - tau.ln();
        }
        Mode::Half => {
            params.m_level = pa.value * (2.0 * k / (3.0 * std::f64::consts::E)).sqrt();
            params.ln_mu = (ratio / (6.0 * (alpha * kappa).sqrt())).ln() + 0.25 * alpha * tau - 0.5 * tau.ln();
        }
    }
    params.mu = params.ln_mu.exp();
    let sc = side_conditions(env, alpha, tau, mode, params.k, params.ln_x, h);
    if !sc.all() {
        params.reasons.push(format!("side conditions fail on v in [{:.3}, {:.3}]: {sc:?}", sc.v_min, sc.v_max));
    }
    params.side_conditions = Some(sc);
    if sol.residual > 1e-9 {
        params.reasons.push(format!("tau residual {:e} above 1e-9", sol.residual));
    }
    params.valid = params.reasons.is_empty();
    Ok(params)
}

/// Checks Σ_{ϖ_{k-1}<p≤e^{ατ}} 1/p against ln κ/(ατ) (full) or 2/3 (half).
///
/// Returns (sum, threshold).
pub fn prime_chain(table: &PrimeTable, params: &BoundParams) -> Result<(f64, f64)> {
    let upper = (params.alpha * params.tau).exp();
    let s = table.tail_recip(params.k as usize, upper)?;
    let threshold = match params.mode {
        Mode::Full => params.kappa.ln() / (params.alpha * params.tau),
        Mode::Half => 2.0 / 3.0,
    };
    Ok((s, threshold))
}

/// Which κ the corollary bound uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaPreset {
    /// max(32, 5/ϱ), as stated with the bound.
    Stated,
    /// max(62, 5/ϱ), as produced at the end of the derivation.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryParams {
    pub family: TestFunction,
    pub rho: f64,
    pub mode: Mode,
    pub preset: Option<KappaPreset>,
    pub kappa: f64,
    pub tau: f64,
    pub tau_residual: f64,
    pub alpha_effective: f64,
    pub derivative: f64,
    pub derivative_fine: f64,
    pub phi_hat_0: f64,
    pub mu: f64,
    pub ln_mu: f64,
    pub lnln_h: f64,
}

/// Bound at the least root ϱ of Φ̂, using |Φ̂′(ϱ)| in place of Φ̂(α).
pub fn corollary_bound(
    engine: &BoundsEngine,
    env: &DecayEnvelope,
    rho: f64,
    h: Height,
    mode: Mode,
    preset: KappaPreset,
) -> Result<CorollaryParams> {
    if !(rho > 0.0) {
        return Err(domain(format!("rho must be positive (got {rho})")));
    }
    let f = env.family;
    let sol = solve_tau(env, rho, h, mode)?;
    let tau = sol.tau;
    let (d, d_fine) = engine.derivative(&f, rho)?;
    let phi0 = engine.transform(&f, 0.0)?.value;
    let (kappa, ln_mu, preset) = match mode {
        Mode::Full => {
            let floor = match preset {
                KappaPreset::Stated => 32.0,
                KappaPreset::Derived => 62.0,
            };
            let kappa = (5.0 / rho).max(floor);
            let ln_mu = (1.0 / (5.0 * std::f64::consts::E * rho)).ln()
                + 0.5 * (kappa.ln() / kappa).ln()
                + (d.abs() / phi0).ln()
                + 0.5 * rho * tau
                - 2.0 * tau.ln();
            (kappa, ln_mu, Some(preset))
        }
        Mode::Half => {
            let kappa = (0.5 * rho).max(4.0);
            let ln_mu = (1.0 / (5.0 * (std::f64::consts::E * kappa).sqrt())).ln() + (d.abs() / phi0).ln() + 0.25 * rho * tau
                - 1.5 * tau.ln();
            (kappa, ln_mu, None)
        }
    };
    Ok(CorollaryParams {
        family: f,
        rho,
        mode,
        preset,
        kappa,
        tau,
        tau_residual: sol.residual,
        alpha_effective: rho - 2.0 / tau,
        derivative: d,
        derivative_fine: d_fine,
        phi_hat_0: phi0,
        mu: ln_mu.exp(),
        ln_mu,
        lnln_h: h.lnln(),
    })
}

/// 1/(2 + 1/(πϱ)).
pub fn gamma_from_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(domain(format!("rho must be positive (got {rho})")));
    }
    Ok(1.0 / (2.0 + 1.0 / (std::f64::consts::PI * rho)))
}

/// Per-theorem inputs of the closed-form bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum TheoremInput {
    /// exp(0.05 √ln H / (2m ln ln H)^m).
    PowerWeight { m: u32 },
    /// exp(√ln H · e^{-c (ln ln H)^{1-ε/2}}) with caller-supplied c.
    RationalWeight { epsilon: f64, c: f64 },
    /// exp((ln H)^{γ-ε}).
    HalfOrderWeight { epsilon: f64, gamma: f64 },
    /// exp(e^{(ln ln H)^{ε/2}}/2).
    HalfCondition { epsilon: f64 },
}

impl TheoremInput {
    pub fn number(&self) -> u8 {
        match self {
            TheoremInput::PowerWeight { .. } => 1,
            TheoremInput::RationalWeight { .. } => 2,
            TheoremInput::HalfOrderWeight { .. } => 3,
            TheoremInput::HalfCondition { .. } => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub input: TheoremInput,
    pub ln_h: f64,
    /// Lower bound for max |ζ(1/2+it)|; may be +inf when it overflows.
    pub value: f64,
    pub ln_value: f64,
    /// The bound assumes RH and a non-effective starting height.
    pub conditional: bool,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(domain(format!("epsilon must lie in (0, 0.1] (got {eps})")));
    }
    Ok(())
}

/// Evaluates one of the four closed-form bounds at height H (ln ln H ≥ 1).
pub fn theorem_bound(input: TheoremInput, h: Height) -> Result<TheoremBound> {
    let ll = h.lnln();
    if !(ll >= 1.0 - 1e-12) {
        return Err(domain(format!("ln ln H must be at least 1 (got {ll})")));
    }
    let l = h.ln_h;
    let ln_value = match input {
        TheoremInput::PowerWeight { m } => {
            if m < 1 {
                return Err(domain("m must be at least 1"));
            }
            0.05 * l.sqrt() / (2.0 * m as f64 * ll).powi(m as i32)
        }
        TheoremInput::RationalWeight { epsilon, c } => {
            check_epsilon(epsilon)?;
            if !(c > 0.0 && c.is_finite()) {
                return Err(domain(format!("c must be positive (got {c})")));
            }
            l.sqrt() * (-c * ll.powf(1.0 - 0.5 * epsilon)).exp()
        }
        TheoremInput::HalfOrderWeight { epsilon, gamma } => {
            check_epsilon(epsilon)?;
            if !(gamma > epsilon && gamma < 1.0) {
                return Err(domain(format!("gamma must lie in (epsilon, 1) (got {gamma})")));
            }
            l.powf(gamma - epsilon)
        }
        TheoremInput::HalfCondition { epsilon } => {
            check_epsilon(epsilon)?;
            0.5 * ll.powf(0.5 * epsilon).exp()
        }
    };
    Ok(TheoremBound { input, ln_h: l, value: ln_value.exp(), ln_value, conditional: true })
}

/// Picks the α on `alphas` with the largest valid μ.
pub fn best_alpha(engine: &BoundsEngine, env: &DecayEnvelope, h: Height, mode: Mode, alphas: &[f64]) -> Result<Option<BoundParams>> {
    let mut best: Option<BoundParams> = None;
    for &a in alphas {
        let p = theorem_a_bound(engine, env, a, h, mode)?;
        if p.valid && best.as_ref().is_none_or(|b| p.ln_mu > b.ln_mu) {
            best = Some(p);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma_from_rho(2.376892345).unwrap() - 0.46862145).abs() < 1e-8);
        assert!((gamma_from_rho(1.0 / std::f64::consts::PI).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((gamma_from_rho(1e12).unwrap() - 0.5).abs() < 1e-12);
        assert!(gamma_from_rho(0.0).is_err());
    }

    #[test]
    fn gaussian_tau_example() {
        // φ(v) = 2v: τ + ln(τ + 2) = 10
        let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
        let s = solve_tau(&env, 1.0, Height::from_lnln(10.0).unwrap(), Mode::Full).unwrap();
        assert!(s.residual <= 1e-9);
        assert!((s.tau - 7.7252721285199).abs() < 1e-8, "{}", s.tau);
    }

    #[test]
    fn unsolvable_height() {
        let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
        let e = solve_tau(&env, 1.0, Height::from_lnln(0.5).unwrap(), Mode::Full).unwrap_err();
        assert!(matches!(e, Error::Unsolvable(_)));
    }

    #[test]
    fn closed_form_bounds() {
        let h = Height::from_ln(100.0).unwrap();
        let b = theorem_bound(TheoremInput::PowerWeight { m: 1 }, h).unwrap();
        assert!((b.value - (0.5 / (2.0 * 100f64.ln())).exp()).abs() < 1e-12);
        assert!((b.value - 1.0558).abs() < 1e-4);
        let b = theorem_bound(TheoremInput::HalfCondition { epsilon: 0.1 }, Height::from_lnln(1.0).unwrap()).unwrap();
        assert!((b.value - (0.5 * std::f64::consts::E).exp()).abs() < 1e-12);
        assert!((b.value - 3.892848).abs() < 1e-6);
        assert!(theorem_bound(TheoremInput::HalfCondition { epsilon: 0.1000001 }, h).is_err());
        assert!(theorem_bound(TheoremInput::PowerWeight { m: 1 }, Height::from_lnln(0.5).unwrap()).is_err());
        let b = theorem_bound(TheoremInput::HalfOrderWeight { epsilon: 0.01, gamma: 0.46862145 }, h).unwrap();
        assert!((b.ln_value - 100f64.powf(0.45862145)).abs() < 1e-9);
        let b = theorem_bound(TheoremInput::RationalWeight { epsilon: 0.05, c: 1.0 }, h).unwrap();
        assert!((b.ln_value - 10.0 * (-(100f64.ln()).powf(0.975)).exp()).abs() < 1e-12);
    }
}
