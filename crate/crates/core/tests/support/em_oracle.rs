//! Euler-Maclaurin evaluation of Z(t) with double-double phases.
//!
//! Used only as a reference: slow, but independent of the Riemann-Siegel path.

use num_complex::Complex64;
use zetalab::dd::{self, Dd};

fn theta(t: f64) -> Dd {
    // Stirling series for arg Γ(1/4 + it/2) - (t/2) ln π, summed from the tail
    let coeffs = [
        1.0 / 48.0,
        7.0 / 5760.0,
        31.0 / 80640.0,
        127.0 / 430080.0,
        511.0 / 1216512.0,
        2047.0 * 691.0 / 2730.0 / 540672.0,
    ];
    let mut c = 0.0;
    for (k, a) in coeffs.iter().enumerate().rev() {
        c += a / t.powi(2 * k as i32 + 1);
    }
    let td = Dd::from(t);
    let half = td.mul_f64(0.5);
    half * (td / dd::TWO_PI).ln() - half - dd::PI.mul_f64(0.125) + Dd::from(c + 0.5 * (-std::f64::consts::PI * t).exp().atan())
}

/// B_{2k}/(2k)! from ζ(2k).
fn bernoulli_ratio(k: usize) -> f64 {
    let m = 2 * k as i32;
    let big = 200.0f64;
    let mf = m as f64;
    let head: f64 = (1..200).map(|n| (n as f64).powi(-m)).sum();
    let tail = big.powi(1 - m) / (mf - 1.0) + 0.5 * big.powi(-m) + mf * big.powi(-m - 1) / 12.0
        - mf * (mf + 1.0) * (mf + 2.0) * big.powi(-m - 3) / 720.0;
    let zeta = head + tail;
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * zeta / (2.0 * std::f64::consts::PI).powi(m)
}

/// Returns (Z(t), error bound) for 10 ≤ t ≤ 1e4.
pub fn z_oracle(t: f64) -> (f64, f64) {
    let td = Dd::from(t);
    let th = theta(t);
    let n = (t / std::f64::consts::PI).ceil() as usize + 20;
    let mut z = 0.0;
    let mut comp = 0.0;
    for k in 1..n {
        let ph = (th - td * Dd::from(k as f64).ln()).rem_two_pi();
        let term = ph.cos() / (k as f64).sqrt();
        // Kahan summation
        let y = term - comp;
        let s = z + y;
        comp = (s - z) - y;
        z = s;
    }
    let nf = n as f64;
    let s = Complex64::new(0.5, t);
    let ph = (th - td * Dd::from(nf).ln()).rem_two_pi();
    // e^{iθ} N^{-s}
    let base = Complex64::from_polar(1.0 / nf.sqrt(), ph);
    let mut tail = base * nf / (s - 1.0) + 0.5 * base;
    let mut poch = s;
    let mut npow = base / nf;
    let mut rem = 0.0;
    for k in 1..=60 {
        let term = bernoulli_ratio(k) * poch * npow;
        tail += term;
        let j = 2.0 * k as f64;
        poch *= (s + j - 1.0) * (s + j);
        npow /= nf * nf;
        rem = (bernoulli_ratio(k + 1) * poch * npow).norm() * nf / (2.0 * k as f64 + 1.5);
        if rem < 1e-20 {
            break;
        }
    }
    (z + tail.re, rem + 1e-14)
}
