use zetalab::bounds_engine::*;
use zetalab::fourier_lab::{least_positive_root, DecayEnvelope};
use zetalab::prime_tools::sieve;
use zetalab::test_functions::TestFunction;
use zetalab::Error;

fn families() -> Vec<DecayEnvelope> {
    let half = TestFunction::rational(1, 2).unwrap();
    vec![
        DecayEnvelope::power(TestFunction::gaussian()).unwrap(),
        DecayEnvelope::power(TestFunction::power(2).unwrap()).unwrap(),
        DecayEnvelope::rational(TestFunction::rational(1, 3).unwrap()).unwrap(),
        DecayEnvelope::rational(TestFunction::rational(2, 5).unwrap()).unwrap(),
        DecayEnvelope::half_order(half, 0.1).unwrap(),
    ]
}

#[test]
fn tau_sweep_residual_and_monotone() {
    for env in families() {
        for alpha in [0.5, 1.0, 2.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..100 {
                let ll = 8.0 + 0.5 * i as f64;
                match solve_tau(&env, alpha, Height::from_lnln(ll).unwrap(), Mode::Full) {
                    Ok(s) => {
                        assert!(s.residual <= 1e-9, "{env:?} {alpha} {ll} {}", s.residual);
                        assert!(s.tau > prev);
                        prev = s.tau;
                    }
                    Err(Error::Unsolvable(_)) => assert!(prev.is_infinite()),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn rational_one_third_concrete_equation() {
    let env = DecayEnvelope::rational(TestFunction::rational(1, 3).unwrap()).unwrap();
    let s = solve_tau(&env, 1.0, Height::from_lnln(20.0).unwrap(), Mode::Full).unwrap();
    let t = s.tau;
    let direct = t + (5.0 / 3.0 * (t / 2.0 + 1.0)).powf(0.5) + 3f64.ln() - 20.0;
    assert!(direct.abs() <= 1e-9, "{direct}");
}

#[test]
fn gaussian_half_mode_small_height() {
    // At H = e^100 the parameters are far too small for k >= 7; μ** is still positive.
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
    let p = theorem_a_bound(&engine, &env, 1.0, Height::from_ln(100.0).unwrap(), Mode::Half).unwrap();
    assert!(p.mu > 0.0 && p.mu.is_finite());
    assert!(p.tau_residual <= 1e-9);
    assert!(p.k < 7);
    assert!(!p.valid);
    let sc = p.side_conditions.unwrap();
    assert!(!sc.k_at_least_7);
    // ln(2v) <= v/2 also fails this low (v = τ/2 + 1 ≈ 3.6).
    assert!(sc.ln_phi_below_half_v == Some(false));

    let p = theorem_a_bound(&engine, &env, 1.0, Height::from_lnln(14.0).unwrap(), Mode::Half).unwrap();
    assert!(p.k >= 7, "{}", p.k);
    assert!(p.valid, "{:?}", p.reasons);
}

#[test]
fn full_mode_mu_increasing_and_x_power() {
    let engine = BoundsEngine::new();
    for env in families() {
        let mut prev = 0.0;
        for i in 0..20 {
            let ll = 16.0 + i as f64;
            let p = theorem_a_bound(&engine, &env, 1.0, Height::from_lnln(ll).unwrap(), Mode::Full).unwrap();
            assert!(p.mu > prev, "{env:?} {ll}");
            prev = p.mu;
            let sc = p.side_conditions.unwrap();
            assert!(sc.x_power_bound);
            assert!(3.0 * p.k as f64 * p.ln_x <= 0.75 * p.ln_h);
            assert!(sc.phi_increasing && sc.ln_v_below_ln_phi && sc.ln_phi_below_exp, "{env:?} {sc:?}");
        }
    }
}

#[test]
fn alpha_beyond_root_is_invalid() {
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::half_order(TestFunction::rational(1, 2).unwrap(), 0.1).unwrap();
    let p = theorem_a_bound(&engine, &env, 2.5, Height::from_lnln(20.0).unwrap(), Mode::Full).unwrap();
    assert!(!p.valid);
    assert!(p.reasons.iter().any(|r| r.contains("alpha at or beyond root")));
    let p = theorem_a_bound(&engine, &env, 1.0, Height::from_lnln(0.2).unwrap(), Mode::Full).unwrap();
    assert!(p.reasons.iter().any(|r| r.contains("H below solvability threshold")));
}

#[test]
fn prime_chain_desk_scale() {
    let table = sieve(200_000).unwrap();
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
    let mut checked = 0;
    for ll in [11.5, 12.0, 12.5] {
        for mode in [Mode::Full, Mode::Half] {
            let p = theorem_a_bound(&engine, &env, 1.0, Height::from_lnln(ll).unwrap(), mode).unwrap();
            if p.k < 7 || (p.alpha * p.tau).exp() > 2e5 {
                continue;
            }
            let (s, thr) = prime_chain(&table, &p).unwrap();
            assert!(s > thr, "{mode:?} {ll}: {s} <= {thr}");
            checked += 1;
        }
    }
    assert!(checked >= 2, "{checked}");
}

#[test]
fn corollary_presets_and_derivative() {
    let f = TestFunction::rational(1, 2).unwrap();
    let rho = least_positive_root(&f, (2.3, 2.45)).unwrap().root;
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::half_order(f, 0.1).unwrap();
    let h = Height::from_lnln(30.0).unwrap();
    let a = corollary_bound(&engine, &env, rho, h, Mode::Full, KappaPreset::Stated).unwrap();
    let b = corollary_bound(&engine, &env, rho, h, Mode::Full, KappaPreset::Derived).unwrap();
    assert!(a.derivative < 0.0);
    assert!((a.derivative - a.derivative_fine).abs() < 1e-3 * a.derivative.abs());
    assert!((a.kappa - 32.0).abs() < 1e-12 && (b.kappa - 62.0).abs() < 1e-12);
    assert!(a.mu > b.mu);
    assert!((a.alpha_effective - (rho - 2.0 / a.tau)).abs() < 1e-15);
    let expected = (1.0 / (5.0 * std::f64::consts::E * rho)) * (32f64.ln() / 32.0).sqrt() * a.derivative.abs() / a.phi_hat_0
        * (0.5 * rho * a.tau).exp()
        / (a.tau * a.tau);
    assert!((a.mu - expected).abs() <= 1e-12 * expected);
    let c = corollary_bound(&engine, &env, rho, h, Mode::Half, KappaPreset::Stated).unwrap();
    assert!((c.kappa - 4.0).abs() < 1e-12 && c.mu > 0.0);
}

#[test]
fn best_alpha_picks_valid() {
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
    let alphas: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();
    let best = best_alpha(&engine, &env, Height::from_lnln(20.0).unwrap(), Mode::Full, &alphas).unwrap().unwrap();
    assert!(best.valid);
    for &a in &alphas {
        let p = theorem_a_bound(&engine, &env, a, Height::from_lnln(20.0).unwrap(), Mode::Full).unwrap();
        if p.valid {
            assert!(p.ln_mu <= best.ln_mu);
        }
    }
}

#[test]
fn params_serialize() {
    let engine = BoundsEngine::new();
    let env = DecayEnvelope::power(TestFunction::gaussian()).unwrap();
    let p = theorem_a_bound(&engine, &env, 1.0, Height::from_lnln(15.0).unwrap(), Mode::Full).unwrap();
    let json = serde_json::to_string(&p).unwrap();
    assert!(json.contains("\"kappa_rule\""));
}
