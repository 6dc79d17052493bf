use proptest::prelude::*;
use zetalab::prime_tools::{lambda1, prime_power, sieve};

fn is_prime_trial(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[test]
fn sieve_matches_trial_division_to_a_million() {
    let t = sieve(1_000_000).unwrap();
    assert_eq!(t.primes().len(), 78498);
    let trial: Vec<u32> = (2..=1_000_000).filter(|&n| is_prime_trial(n)).collect();
    assert_eq!(t.primes(), &trial[..]);
}

#[test]
fn segments_join_cleanly() {
    // limits straddling a segment edge
    for limit in [(1u64 << 20) - 1, 1 << 20, (1 << 20) + 1, 3 << 20] {
        let t = sieve(limit).unwrap();
        let last = *t.primes().last().unwrap() as u64;
        assert!(last <= limit);
        assert!(t.primes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t.count(limit as f64), t.primes().len());
    }
    assert_eq!(sieve(3 << 20).unwrap().count(1_000_000.0), 78498);
}

#[test]
fn mertens_band_and_prefix_monotone() {
    let t = sieve(10_000_000).unwrap();
    let mut prev = 0.0;
    for i in 0..=120 {
        let x = 10f64 * 10f64.powf(6.0 * i as f64 / 120.0);
        let th = t.mertens_theta(x).unwrap();
        assert!(th > -0.5 && th < 1.0, "x={x}: {th}");
        let s = t.sum_recip(x);
        assert!(s >= prev);
        prev = s;
    }
}

#[test]
fn cache_roundtrip() {
    let dir = std::env::temp_dir().join(format!("zetalab-cache-{}", std::process::id()));
    let a = zetalab::prime_tools::PrimeTable::load_or_build(100_000, &dir).unwrap();
    let b = zetalab::prime_tools::PrimeTable::load_or_build(100_000, &dir).unwrap();
    assert_eq!(a.primes(), b.primes());
    assert_eq!(a.sum_recip(1e5), b.sum_recip(1e5));
    std::fs::remove_dir_all(dir).ok();
}

proptest! {
    #[test]
    fn lambda1_in_unit_interval(n in 2u64..10_000_000) {
        let v = lambda1(n).unwrap().lambda1;
        prop_assert!((0.0..=1.0).contains(&v));
        if let Some((p, k)) = prime_power(n) {
            prop_assert_eq!(p.pow(k), n);
            prop_assert_eq!(v, 1.0 / k as f64);
        } else {
            prop_assert_eq!(v, 0.0);
        }
    }
}
