mod support;

use proptest::prelude::*;
use support::em_oracle::z_oracle;
use zetalab::zeta_eval::{hardy_z, scan_max};

#[test]
fn oracle_matches_frozen_values() {
    for (t, z) in [(100.0, 2.692_697_056_664_463_7), (1000.0, 0.997_794_637_521_586_6), (5000.0, -0.804_257_236_352_939_9)] {
        let (v, e) = z_oracle(t);
        assert!((v - z).abs() < e, "t={t}: {v} vs {z}");
    }
}

#[test]
fn riemann_siegel_within_reported_error() {
    // dense near the switch-over, where the remainder is largest
    let mut t = 10.0;
    while t < 10_000.0 {
        let s = hardy_z(t).unwrap();
        let (v, e) = z_oracle(t);
        assert!((s.z_value - v).abs() <= s.err + e, "t={t}: {} vs {v} (err {})", s.z_value, s.err);
        t += if t < 200.0 { 0.173 } else { 37.3 };
    }
}

#[test]
fn scan_matches_dense_grid() {
    for (t0, h) in [(0.0, 20.0), (100.0, 10.0)] {
        let r = scan_max(t0, h, 1e-8).unwrap();
        let step = r.grid_step / 10.0;
        let n = (h / step) as usize;
        let dense = (0..=n).map(|i| hardy_z(t0 + i as f64 * step).unwrap().abs_zeta).fold(0.0, f64::max);
        assert!(r.max_abs_zeta >= dense - 1e-4 && r.max_abs_zeta <= dense + 1e-4, "{r:?} vs {dense}");
        assert!(r.argmax_t >= t0 && r.argmax_t <= t0 + h);
    }
}

#[test]
fn nested_windows_are_monotone() {
    let a = scan_max(200.0, 5.0, 1e-9).unwrap();
    let b = scan_max(200.0, 10.0, 1e-9).unwrap();
    assert!(b.max_abs_zeta >= a.max_abs_zeta);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn z_is_even(t in 0.0f64..2000.0) {
        prop_assert_eq!(hardy_z(t).unwrap().abs_zeta, hardy_z(-t).unwrap().abs_zeta);
    }

    #[test]
    fn abs_zeta_is_modulus(t in 0.0f64..1e5) {
        let s = hardy_z(t).unwrap();
        prop_assert_eq!(s.abs_zeta, s.z_value.abs());
        prop_assert!(s.err > 0.0 && s.err.is_finite());
    }
}

