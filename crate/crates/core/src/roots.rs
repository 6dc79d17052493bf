//! Scalar root finding and one-dimensional minimisation.

use crate::error::{Error, Result};

/// Bisection followed by secant steps; returns a bracket of width ≤ `tol`.
pub fn bracket_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, lo));
    }
    if fhi == 0.0 {
        return Ok((hi, hi));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket { lo, hi, reason: "no sign change".into() });
    }
    let mut fhi = fhi;
    let mut iter = 0;
    while hi - lo > tol && iter < 400 {
        iter += 1;
        // secant (false position) every other step, bisection otherwise
        let mid = if iter % 2 == 0 {
            let s = hi - fhi * (hi - lo) / (fhi - flo);
            let margin = 0.01 * (hi - lo);
            s.clamp(lo + margin, hi - margin)
        } else {
            0.5 * (lo + hi)
        };
        let fm = f(mid);
        if fm == 0.0 {
            return Ok((mid, mid));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    Ok((lo, hi))
}

/// Golden-section search for a minimum of a unimodal function on [a, b].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
