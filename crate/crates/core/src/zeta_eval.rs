//! Hardy's Z-function on the critical line and interval maxima of |ζ(1/2+it)|.

mod psi_table;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::roots::golden_min;
use psi_table::PSI_EVEN;

/// Heights at or above this use the Riemann-Siegel formula.
pub const RS_THRESHOLD: f64 = 30.0;
/// Largest height accepted by [`hardy_z`].
pub const MAX_HEIGHT: f64 = 1e12;

/// One evaluation of Z(t) with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaSample {
    pub t: f64,
    pub z_value: f64,
    pub abs_zeta: f64,
    pub err: f64,
}

/// Maximum of |ζ(1/2+it)| over [T, T+H].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ScanResult {
    pub T: f64,
    pub H: f64,
    pub argmax_t: f64,
    pub max_abs_zeta: f64,
    pub grid_step: f64,
    pub refined: bool,
}

// (2^{2k-1}-1)|B_{2k}| / (2k(2k-1) 2^{2k}), k = 1..7
const THETA_COEFFS: [f64; 7] = [
    1.0 / 48.0,
    7.0 / 5760.0,
    31.0 / 80640.0,
    127.0 / 430080.0,
    511.0 / 1216512.0,
    (2047.0 * 691.0 / 2730.0) / (12.0 * 11.0 * 4096.0),
    (8191.0 * 7.0 / 6.0) / (14.0 * 13.0 * 16384.0),
];

/// Riemann-Siegel theta function θ(t) for t ≥ 10 via its asymptotic series.
pub fn rs_theta(t: f64) -> Result<f64> {
    if !(t >= 10.0) || !t.is_finite() {
        return Err(domain(format!(
            "rs_theta needs t >= 10 (got {t}); use hardy_z for the Euler-Maclaurin path"
        )));
    }
    Ok(theta_dd(t).to_f64())
}

/// θ(t) in double-double; accurate for t ≥ 10.
pub(crate) fn theta_dd(t: f64) -> Dd {
    let td = Dd::from(t);
    let half = td.mul_f64(0.5);
    let main = half * (td / dd::TWO_PI).ln() - half - dd::PI.mul_f64(0.125);
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let mut pw = inv;
    let mut corr = 0.0;
    for c in THETA_COEFFS {
        corr += c * pw;
        pw *= inv2;
    }
    corr += 0.5 * (-std::f64::consts::PI * t).exp().atan();
    main + Dd::from(corr)
}

// Stirling coefficients B_{2k}/(2k(2k-1))
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// Principal-branch-continuous ln Γ(z) for Re z > 0.
fn ln_gamma(z: Complex64) -> Complex64 {
    let shift = 10;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        acc += (z + k as f64).ln();
    }
    let w = z + shift as f64;
    let mut s = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln();
    let w2 = w * w;
    let mut p = w;
    for c in STIRLING {
        s += c / p;
        p *= w2;
    }
    s - acc
}

/// θ(t) from ln Γ, valid for all t ≥ 0.
fn theta_gamma(t: f64) -> f64 {
    ln_gamma(Complex64::new(0.25, 0.5 * t)).im - 0.5 * t * std::f64::consts::PI.ln()
}

const BERNOULLI: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

/// ζ(1/2+it) by Euler-Maclaurin with N = 30 and twelve correction terms.
fn zeta_em(t: f64) -> (Complex64, f64) {
    let s = Complex64::new(0.5, t);
    let n = 30usize;
    let nf = n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += (-s * (k as f64).ln()).exp();
    }
    let n_s = (-s * nf.ln()).exp();
    sum += n_s * nf / (s - 1.0) + 0.5 * n_s;
    // running s(s+1)...(s+2k-2) and (2k)!
    let mut poch = s;
    let mut fact = 2.0;
    let mut npow = n_s / nf;
    let kmax = 12;
    for k in 1..=kmax {
        sum += BERNOULLI[k - 1] / fact * poch * npow;
        let j = 2 * k as u32;
        poch *= (s + (j - 1) as f64) * (s + j as f64);
        fact *= ((j + 1) * (j + 2)) as f64;
        npow /= nf * nf;
    }
    // poch now holds s(s+1)...(s+2K), fact = (2K+2)!
    let rem = poch.norm() * BERNOULLI[kmax].abs() / fact * npow.norm() * nf / (0.5 + 2.0 * kmax as f64 + 1.0);
    (sum, rem + 1e-14)
}

/// Ψ and its first 12 derivatives at p = 1/2 + x.
fn psi_derivs(x: f64) -> [f64; 13] {
    let mut out = [0.0; 13];
    let x2 = x * x;
    for (d, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in (0..PSI_EVEN.len()).rev() {
            let e = 2 * j;
            if e < d {
                break;
            }
            let mut ff = 1.0;
            for i in 0..d {
                ff *= (e - i) as f64;
            }
            let pw = e - d;
            // pw has the parity of d
            let xp = if pw % 2 == 0 { x2.powi((pw / 2) as i32) } else { x * x2.powi((pw / 2) as i32) };
            acc += PSI_EVEN[j] * ff * xp;
        }
        *slot = acc;
    }
    out
}

fn rs_corrections(p: f64) -> [f64; 5] {
    let d = psi_derivs(p - 0.5);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let pi4 = pi2 * pi2;
    let pi6 = pi4 * pi2;
    let pi8 = pi4 * pi4;
    [
        d[0],
        -d[3] / (96.0 * pi2),
        d[2] / (64.0 * pi2) + d[6] / (18432.0 * pi4),
        -d[1] / (64.0 * pi2) - d[5] / (3840.0 * pi4) - d[9] / (5308416.0 * pi6),
        d[0] / (128.0 * pi2)
            + 19.0 * d[4] / (24576.0 * pi4)
            + 11.0 * d[8] / (5898240.0 * pi6)
            + d[12] / (2038431744.0 * pi8),
    ]
}

fn z_riemann_siegel(t: f64) -> (f64, f64) {
    let a = (t / (2.0 * std::f64::consts::PI)).sqrt();
    let n = a.floor() as u64;
    let p = a - n as f64;
    let theta = theta_dd(t);
    let td = Dd::from(t);
    let mut sum = 0.0;
    let mut abs = 0.0;
    for k in 1..=n {
        let phase = (theta - td * Dd::from(k as f64).ln()).rem_two_pi();
        let w = 1.0 / (k as f64).sqrt();
        sum += w * phase.cos();
        abs += w;
    }
    let c = rs_corrections(p);
    let mut corr = 0.0;
    let mut ap = 1.0;
    for ck in c {
        corr += ck * ap;
        ap /= a;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let z = 2.0 * sum + sign * corr / a.sqrt();
    let err = 0.05 * t.powf(-2.75) + 4.0 * f64::EPSILON * (2.0 * abs + 1.0) + 1e-15;
    (z, err)
}

/// Z(t) with error bound; Z is even, so negative t is mapped to |t|.
pub fn hardy_z(t: f64) -> Result<ZetaSample> {
    if !t.is_finite() {
        return Err(domain("t must be finite"));
    }
    let ta = t.abs();
    if ta > MAX_HEIGHT {
        return Err(Error::Precision(format!("t = {t} exceeds {MAX_HEIGHT:e}; precision not guaranteed")));
    }
    let (z, err) = if ta >= RS_THRESHOLD {
        z_riemann_siegel(ta)
    } else {
        let (zeta, rem) = zeta_em(ta);
        let th = theta_gamma(ta);
        let z = (Complex64::from_polar(1.0, th) * zeta).re;
        (z, rem + 1e-14)
    };
    Ok(ZetaSample { t, z_value: z, abs_zeta: z.abs(), err })
}

fn abs_z(t: f64) -> f64 {
    hardy_z(t).map(|s| s.abs_zeta).unwrap_or(f64::NAN)
}

/// Grid step used by [`scan_max`] on [T, T+H].
pub fn scan_step(t0: f64, h: f64) -> f64 {
    let top = (t0 + h).max(std::f64::consts::E);
    0.05f64.min(2.0 * std::f64::consts::PI / top.ln())
}

/// Maximum of |ζ(1/2+it)| on [T, T+H]: grid scan plus golden-section refinement.
///
/// `target_err` is the width in t to which each candidate peak is refined.
#[allow(non_snake_case)]
pub fn scan_max(T: f64, H: f64, target_err: f64) -> Result<ScanResult> {
    if !(H > 0.0) || !H.is_finite() {
        return Err(domain(format!("H must be positive (got {H})")));
    }
    if !(T >= 0.0) || !T.is_finite() {
        return Err(domain(format!("T must be non-negative (got {T})")));
    }
    if !(target_err > 0.0) {
        return Err(domain(format!("target_err must be positive (got {target_err})")));
    }
    if T + H > MAX_HEIGHT {
        return Err(Error::Precision(format!("T+H exceeds {MAX_HEIGHT:e}")));
    }
    let step = scan_step(T, H);
    // grid anchored at T so nested windows share their points
    let n = (H / step).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|i| T + i as f64 * step).collect();
    if T + H - ts[n] > 1e-12 * (1.0 + T) {
        ts.push(T + H);
    }
    let vals: Vec<f64> = ts.par_iter().map(|&t| abs_z(t)).collect();
    let (mut best_i, mut best) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let last = ts.len() - 1;
    let candidates: Vec<usize> = (0..=last)
        .filter(|&i| {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i == last || vals[i] >= vals[i + 1];
            left && right && vals[i] >= 0.95 * best
        })
        .collect();
    let refined: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&i| {
            let lo = ts[i.saturating_sub(1)];
            let hi = ts[(i + 1).min(last)];
            let (tm, v) = golden_min(|t| -abs_z(t), lo, hi, target_err);
            (tm, -v)
        })
        .collect();
    let mut argmax = ts[best_i];
    let mut is_refined = false;
    for (tm, v) in refined {
        if v > best {
            best = v;
            argmax = tm;
            is_refined = true;
        }
    }
    Ok(ScanResult { T, H, argmax_t: argmax, max_abs_zeta: best, grid_step: step, refined: is_refined })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_reference_values() {
        assert!((rs_theta(100.0).unwrap() - 87.97216523178721962).abs() < 1e-12);
        assert!((rs_theta(10.0).unwrap() + 3.0670743962898952917).abs() < 1e-10);
        assert!(rs_theta(17.845).unwrap() < 0.0 && rs_theta(17.846).unwrap() > 0.0);
        assert!(rs_theta(9.9).is_err());
    }

    #[test]
    fn theta_paths_agree() {
        for t in [10.0, 12.5, 20.0, 29.0] {
            assert!((theta_gamma(t) - rs_theta(t).unwrap()).abs() < 1e-12, "{t}");
        }
        assert!((theta_gamma(3.0) + 2.9945646960108252362).abs() < 1e-13);
    }

    #[test]
    fn psi_table_matches_closed_form() {
        for p in [0.0, 0.1, 0.37, 0.5, 0.93] {
            let direct = (2.0 * std::f64::consts::PI * (p * p - p - 1.0 / 16.0)).cos()
                / (2.0 * std::f64::consts::PI * p).cos();
            if (2.0 * std::f64::consts::PI * p).cos().abs() > 1e-3 {
                assert!((psi_derivs(p - 0.5)[0] - direct).abs() < 1e-13, "{p}");
            }
        }
    }

    #[test]
    fn z_reference_values() {
        let cases = [
            (0.0, -1.4603545088095868129),
            (5.0, -0.73886342827526476436),
            (10.0, -1.5491945461810223891),
            (20.0, 1.1478424121851972776),
            (29.9, 0.74427612669566104996),
            (30.0, 0.59602851923988495532),
            (50.0, -0.34073500595502498275),
            (100.0, 2.692697056664463475),
            (300.0, -0.77298701299230422726),
            (1000.0, 0.99779463752158661399),
            (2000.0, 0.79079741830981604418),
            (5000.0, -0.80425723635293984958),
            (10000.0, -0.34139472423120855918),
        ];
        for (t, z) in cases {
            let s = hardy_z(t).unwrap();
            assert!((s.z_value - z).abs() <= s.err, "t={t}: {} vs {z}, err {}", s.z_value, s.err);
        }
    }

    #[test]
    fn zeros_and_symmetry() {
        for t in [14.1347251417, 21.0220396388, 25.0108575801] {
            assert!(hardy_z(t).unwrap().abs_zeta < 1e-6);
        }
        let a = hardy_z(123.4).unwrap();
        let b = hardy_z(-123.4).unwrap();
        assert_eq!(a.abs_zeta, b.abs_zeta);
        assert!(hardy_z(2e12).is_err());
    }

    #[test]
    fn scan_small_windows() {
        let r = scan_max(14.0, 0.2, 1e-9).unwrap();
        assert!(r.argmax_t == 14.0 || r.argmax_t == 14.2);
        assert!(scan_max(0.0, 0.0, 1e-6).is_err());
    }
}
