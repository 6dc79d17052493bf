//! The two families of even weights Φ = exp(-G) and their growth envelopes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const MAX_TERMS: usize = 10_000;

/// An admissible weight Φ.
///
/// `Power { m }` is exp(-u^{2m}/2m); `Rational { p, q }` is exp(-G_r) with
/// G_r(z) = q Σ_n z^{2np}/(2nq)!, r = p/q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    Power { m: u32 },
    Rational { p: u32, q: u32 },
}

/// A series value with the sum of term moduli, for rounding estimates.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    pub abs_sum: f64,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl TestFunction {
    pub fn power(m: u32) -> Result<Self> {
        if !(1..=40).contains(&m) {
            return Err(domain(format!("power family needs 1 <= m <= 40 (got {m})")));
        }
        Ok(TestFunction::Power { m })
    }

    pub fn rational(p: u32, q: u32) -> Result<Self> {
        if p < 1 || p >= q || q > 40 {
            return Err(domain(format!("rational family needs 1 <= p < q <= 40 (got {p}/{q})")));
        }
        if gcd(p, q) != 1 {
            return Err(domain(format!("rational family needs gcd(p, q) = 1 (got {p}/{q})")));
        }
        Ok(TestFunction::Rational { p, q })
    }

    /// The Gaussian exp(-u²/2).
    pub fn gaussian() -> Self {
        TestFunction::Power { m: 1 }
    }

    /// -ln Φ(z) as a complex number.
    pub fn exponent(&self, z: Complex64) -> Complex64 {
        self.exponent_series(z).value
    }

    /// -ln Φ(z) together with the modulus sum of its series terms.
    pub fn exponent_series(&self, z: Complex64) -> SeriesValue {
        match *self {
            TestFunction::Power { m } => {
                let v = z.powu(2 * m) / (2 * m) as f64;
                SeriesValue { value: v, abs_sum: v.norm() }
            }
            TestFunction::Rational { p, q } => rational_series(z, p, q),
        }
    }

    /// -ln Φ(u) on the real axis; +inf when Φ underflows past f64 range.
    pub fn exponent_real(&self, u: f64) -> f64 {
        match *self {
            TestFunction::Power { m } => u.abs().powi(2 * m as i32) / (2 * m) as f64,
            TestFunction::Rational { p, q } => rational_series(Complex64::new(u, 0.0), p, q).value.re,
        }
    }

    pub fn phi_real(&self, u: f64) -> f64 {
        let g = self.exponent_real(u);
        if g.is_finite() {
            (-g).exp()
        } else {
            0.0
        }
    }

    pub fn phi_complex(&self, z: Complex64) -> Complex64 {
        let g = self.exponent(z);
        if !g.re.is_finite() && g.re > 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (-g).exp()
    }

    /// Σ_{k<q} cosh(ε^k u^{p/q}), ε = e^{iπ/q}; the closed form of G_r for u ≥ 0.
    pub fn cosh_sum(&self, u: f64) -> Option<f64> {
        match *self {
            TestFunction::Power { .. } => None,
            TestFunction::Rational { p, q } => {
                let w = u.powf(p as f64 / q as f64);
                let s: f64 = (0..q)
                    .map(|k| (Complex64::from_polar(w, std::f64::consts::PI * k as f64 / q as f64)).cosh().re)
                    .sum();
                Some(s)
            }
        }
    }

    pub fn growth_pair(&self) -> GrowthPair {
        let mut pair = GrowthPair { family: *self, u0: 0.0 };
        pair.u0 = pair.scan_onset(400.0, 4000);
        pair
    }
}

fn rational_series(z: Complex64, p: u32, q: u32) -> SeriesValue {
    let w = z.powu(2 * p);
    let wn = w.norm();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    let mut max_term: f64 = 1.0;
    for n in 1..MAX_TERMS {
        let lo = (2 * (n - 1) * q as usize) as f64;
        let mut den = 1.0;
        for j in 1..=2 * q as usize {
            den *= lo + j as f64;
        }
        term = term * w / den;
        let tn = term.norm();
        sum += term;
        abs_sum += tn;
        max_term = max_term.max(tn);
        if !abs_sum.is_finite() {
            return SeriesValue { value: Complex64::new(f64::INFINITY, 0.0), abs_sum };
        }
        // the terms decrease from here on once the ratio drops below one
        if wn < den && tn < 1e-18 * max_term {
            break;
        }
    }
    SeriesValue { value: sum * q as f64, abs_sum: abs_sum * q as f64 }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Power { m } => write!(f, "power:m={m}"),
            TestFunction::Rational { p, q } => write!(f, "rational:p={p},q={q}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognised family '{s}' (expected power:m=N or rational:p=N,q=N)"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let mut fields = std::collections::BTreeMap::new();
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u32 = v.trim().parse().map_err(|_| bad())?;
            fields.insert(k.trim().to_string(), v);
        }
        match (kind.trim(), fields.len()) {
            ("power", 1) => TestFunction::power(*fields.get("m").ok_or_else(bad)?),
            ("rational", 2) => TestFunction::rational(*fields.get("p").ok_or_else(bad)?, *fields.get("q").ok_or_else(bad)?),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(f: TestFunction) -> String {
        f.to_string()
    }
}

/// Lower growth envelope G with inverse g, so that Φ(u) ≤ e^{-G(|u|)} for |u| ≥ u0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthPair {
    pub family: TestFunction,
    pub u0: f64,
}

impl GrowthPair {
    pub fn big_g(&self, u: f64) -> f64 {
        match self.family {
            TestFunction::Power { m } => u.powi(2 * m as i32) / (2 * m) as f64,
            TestFunction::Rational { p, q } => 0.5 * u.powf(p as f64 / q as f64).exp() - 1.0,
        }
    }

    pub fn big_g_prime(&self, u: f64) -> f64 {
        match self.family {
            TestFunction::Power { m } => u.powi(2 * m as i32 - 1),
            TestFunction::Rational { p, q } => {
                let r = p as f64 / q as f64;
                0.5 * u.powf(r).exp() * r * u.powf(r - 1.0)
            }
        }
    }

    /// Inverse of G.
    pub fn g(&self, v: f64) -> f64 {
        match self.family {
            TestFunction::Power { m } => (2.0 * m as f64 * v).powf(1.0 / (2 * m) as f64),
            TestFunction::Rational { p, q } => (2.0 * v + 2.0).ln().powf(q as f64 / p as f64),
        }
    }

    /// Whether -ln Φ(u) ≥ G(u) holds at u, up to the rounding of the series.
    pub fn holds_at(&self, u: f64) -> bool {
        let s = self.family.exponent_series(Complex64::new(u, 0.0));
        if !s.value.re.is_finite() {
            return true;
        }
        let g = self.big_g(u);
        s.value.re >= g - 4.0 * f64::EPSILON * (s.abs_sum + g.abs())
    }

    /// Smallest grid point of [0, top] from which the envelope holds to the end.
    fn scan_onset(&self, top: f64, n: usize) -> f64 {
        let mut onset = 0.0;
        for i in 0..=n {
            let u = top * i as f64 / n as f64;
            if !self.holds_at(u) {
                onset = top * (i + 1) as f64 / n as f64;
            }
        }
        onset
    }
}
