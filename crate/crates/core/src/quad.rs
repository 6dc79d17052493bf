//! Quadrature rules: adaptive Gauss-Kronrod, tanh-sinh and Gauss-Legendre.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integral estimate with an error estimate and the integral of |f|.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuadResult<T> {
    pub value: T,
    pub err: f64,
    pub abs_integral: f64,
}

pub trait Scalar:
    Copy + Default + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// One 15-point Kronrod panel; the error is |K15 - G7|.
pub fn gk15<T: Scalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> QuadResult<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.modulus() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        let s = f1 + f2;
        k = k + s * WGK[j];
        abs += (f1.modulus() + f2.modulus()) * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    QuadResult { value: k * h, err: ((k - g) * h).modulus(), abs_integral: abs * h.abs() }
}

/// Adaptive GK15 over [a, b] starting from `panels` equal panels.
///
/// Panels are bisected, worst first, until the summed error falls below
/// `max(abs_tol, rel_tol * |I|)` or `max_panels` is reached.
pub fn adaptive<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult<T> {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut list: Vec<(f64, f64, QuadResult<T>)> = (0..panels)
        .map(|i| {
            let lo = a + w * i as f64;
            let hi = if i + 1 == panels { b } else { lo + w };
            (lo, hi, gk15(&mut f, lo, hi))
        })
        .collect();
    loop {
        let total: T = list.iter().fold(T::default(), |s, p| s + p.2.value);
        let err: f64 = list.iter().map(|p| p.2.err).sum();
        let abs: f64 = list.iter().map(|p| p.2.abs_integral).sum();
        if err <= abs_tol.max(rel_tol * total.modulus()) || list.len() >= max_panels {
            return QuadResult { value: total, err, abs_integral: abs };
        }
        // split every panel carrying more than its share of the error
        let share = err / list.len() as f64;
        let mut next = Vec::with_capacity(list.len() * 2);
        let mut split_any = false;
        for (lo, hi, r) in list {
            if r.err >= share && next.len() + 2 <= max_panels * 2 && (hi - lo) > 1e-13 * (1.0 + lo.abs()) {
                let mid = 0.5 * (lo + hi);
                next.push((lo, mid, gk15(&mut f, lo, mid)));
                next.push((mid, hi, gk15(&mut f, mid, hi)));
                split_any = true;
            } else {
                next.push((lo, hi, r));
            }
        }
        list = next;
        if !split_any {
            let total: T = list.iter().fold(T::default(), |s, p| s + p.2.value);
            let err: f64 = list.iter().map(|p| p.2.err).sum();
            let abs: f64 = list.iter().map(|p| p.2.abs_integral).sum();
            return QuadResult { value: total, err, abs_integral: abs };
        }
    }
}

/// Tanh-sinh quadrature on [a, b]; copes with integrable endpoint singularities.
///
/// `f` receives the abscissa together with its distances to a and b, so
/// integrands singular at an endpoint can avoid cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> QuadResult<f64> {
    let half = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let min_gap = 4.0 * f64::EPSILON * (a.abs().max(b.abs()) + 1.0);
    let eval = |f: &mut F, s: f64| -> (f64, f64) {
        let u = std::f64::consts::FRAC_PI_2 * s.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - tanh|u| computed without cancellation
        let comp = 2.0 * e / (1.0 + e);
        let w = std::f64::consts::FRAC_PI_2 * s.cosh() / (u.cosh() * u.cosh());
        let d = half * comp;
        if d < min_gap || w == 0.0 {
            return (0.0, 0.0);
        }
        let (x, da, db) = if s < 0.0 { (a + d, d, b - a - d) } else { (b - d, b - a - d, d) };
        let v = if s == 0.0 { f(c, half, half) } else { f(x, da, db) };
        (w * v, w * v.abs())
    };
    let s_max = 3.5;
    let mut h = 0.5;
    let mut sum = 0.0;
    let mut abs = 0.0;
    let mut k = 0;
    while (k as f64) * h <= s_max {
        let s = k as f64 * h;
        let (v, av) = eval(&mut f, s);
        sum += v;
        abs += av;
        if k > 0 {
            let (v, av) = eval(&mut f, -s);
            sum += v;
            abs += av;
        }
        k += 1;
    }
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    for _level in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= s_max {
            let s = k as f64 * h;
            let (v1, a1) = eval(&mut f, s);
            let (v2, a2) = eval(&mut f, -s);
            sum += v1 + v2;
            abs += a1 + a2;
            k += 2;
        }
        let cur = sum * h * half;
        err = (cur - prev).abs();
        prev = cur;
        if err <= rel_tol * cur.abs().max(abs * h * half * 1e-3) && _level >= 2 {
            break;
        }
    }
    QuadResult { value: prev, err, abs_integral: abs * h * half }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}
