//! Prime tables from a segmented sieve, Mertens sums and Λ₁(n).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Mertens' constant in Σ_{p≤x} 1/p = ln ln x + 𝔪 + o(1).
pub const MERTENS: f64 = 0.2614972128476427837554268386;
pub const MAX_LIMIT: u64 = 1_000_000_000;
const SEGMENT: usize = 1 << 20;

/// All primes up to `limit` with prefix sums of their reciprocals.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
    prefix_recip: Vec<f64>,
}

fn small_primes(n: usize) -> Vec<u32> {
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes ≤ limit by a segmented sieve of Eratosthenes.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if !(2..=MAX_LIMIT).contains(&limit) {
        return Err(domain(format!("sieve limit must lie in [2, {MAX_LIMIT}] (got {limit})")));
    }
    let root = (limit as f64).sqrt() as usize + 1;
    let base = small_primes(root);
    let mut primes: Vec<u32> = Vec::new();
    let mut flags = vec![true; SEGMENT];
    let mut lo: u64 = 2;
    while lo <= limit {
        let hi = (lo + SEGMENT as u64 - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        flags[..len].fill(true);
        for &p in &base {
            let p = p as u64;
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j <= hi {
                flags[(j - lo) as usize] = false;
                j += p;
            }
        }
        primes.extend((0..len).filter(|&i| flags[i]).map(|i| (lo + i as u64) as u32));
        lo = hi + 1;
    }
    Ok(PrimeTable::from_primes(limit, primes))
}

impl PrimeTable {
    fn from_primes(limit: u64, primes: Vec<u32>) -> Self {
        // Neumaier summation keeps the long prefix sums accurate
        let mut prefix = Vec::with_capacity(primes.len());
        let mut sum = 0.0f64;
        let mut c = 0.0f64;
        for &p in &primes {
            let x = 1.0 / p as f64;
            let t = sum + x;
            if sum.abs() >= x.abs() {
                c += (sum - t) + x;
            } else {
                c += (x - t) + sum;
            }
            sum = t;
            prefix.push(sum + c);
        }
        PrimeTable { limit, primes, prefix_recip: prefix }
    }

    /// Loads `primes-<limit>.bin` from `dir`, or sieves and stores it there.
    pub fn load_or_build(limit: u64, dir: &Path) -> Result<Self> {
        let path = dir.join(format!("primes-{limit}.bin"));
        if let Ok(mut file) = fs::File::open(&path) {
            let mut bytes = Vec::new();
            file.read_to_end(&mut bytes).map_err(|e| Error::Io(e.to_string()))?;
            if bytes.len() % 4 == 0 {
                let primes: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
                return Ok(PrimeTable::from_primes(limit, primes));
            }
        }
        let table = sieve(limit)?;
        fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
        let mut file = fs::File::create(&path).map_err(|e| Error::Io(e.to_string()))?;
        let bytes: Vec<u8> = table.primes.iter().flat_map(|p| p.to_le_bytes()).collect();
        file.write_all(&bytes).map_err(|e| Error::Io(e.to_string()))?;
        Ok(table)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Number of primes ≤ x.
    pub fn count(&self, x: f64) -> usize {
        if x < 2.0 {
            return 0;
        }
        let xi = x.floor().min(u32::MAX as f64) as u32;
        self.primes.partition_point(|&p| p <= xi)
    }

    /// Primes ≤ x.
    pub fn primes_up_to(&self, x: f64) -> &[u32] {
        &self.primes[..self.count(x)]
    }

    /// Σ_{p≤x} 1/p.
    pub fn sum_recip(&self, x: f64) -> f64 {
        match self.count(x) {
            0 => 0.0,
            n => self.prefix_recip[n - 1],
        }
    }

    /// The n-th prime ϖ_n (1-based), if inside the table.
    pub fn nth(&self, n: usize) -> Option<u32> {
        if n == 0 {
            None
        } else {
            self.primes.get(n - 1).copied()
        }
    }

    /// Σ 1/p over ϖ_{k-1} < p ≤ upper (ϖ₀ taken as 1).
    pub fn tail_recip(&self, k: usize, upper: f64) -> Result<f64> {
        if upper > self.limit as f64 {
            return Err(domain(format!("upper end {upper} exceeds sieve limit {}", self.limit)));
        }
        let start = if k <= 1 {
            0.0
        } else {
            self.nth(k - 1).ok_or_else(|| domain(format!("prime index {} exceeds table", k - 1)))? as f64
        };
        Ok((self.sum_recip(upper) - self.sum_recip(start)).max(0.0))
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= 2.0) {
            return Err(domain(format!("x must be at least 2 (got {x})")));
        }
        if x > self.limit as f64 {
            return Err(domain(format!("x = {x} exceeds sieve limit {}", self.limit)));
        }
        Ok(())
    }

    /// θ(x) = (Σ_{p≤x} 1/p - ln ln x - 𝔪) ln²x.
    pub fn mertens_theta(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let l = x.ln();
        Ok((self.sum_recip(x) - l.ln() - MERTENS) * l * l)
    }

    /// ϖ_n against n(ln n + ln ln n), n ≥ 6.
    pub fn check_prime_upper(&self, n: usize) -> Result<PrimeUpperReport> {
        if n < 6 {
            return Err(domain(format!("bound is stated for n >= 6 (got {n})")));
        }
        let p = self.nth(n).ok_or_else(|| domain(format!("prime index {n} exceeds sieve limit {}", self.limit)))?;
        let nf = n as f64;
        let bound = nf * (nf.ln() + nf.ln().ln());
        Ok(PrimeUpperReport { n, prime: p as u64, bound, pass: (p as f64) < bound })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeUpperReport {
    pub n: usize,
    pub prime: u64,
    pub bound: f64,
    pub pass: bool,
}

/// Λ₁(n) = Λ(n)/ln n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MangoldtValue {
    pub n: u64,
    pub lambda1: f64,
}

/// Returns (p, k) when n = p^k.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut m = n;
            let mut k = 0;
            while m.is_multiple_of(d) {
                m /= d;
                k += 1;
            }
            return if m == 1 { Some((d, k)) } else { None };
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Some((n, 1))
}

pub fn lambda1(n: u64) -> Result<MangoldtValue> {
    if n < 2 {
        return Err(domain(format!("Λ₁(n) needs n >= 2 (got {n})")));
    }
    let v = prime_power(n).map_or(0.0, |(_, k)| 1.0 / k as f64);
    Ok(MangoldtValue { n, lambda1: v })
}

/// All prime powers p^k ≤ n with their Λ₁ weights 1/k, sorted by value.
pub fn prime_power_weights(table: &PrimeTable, n: u64) -> Result<Vec<(u64, f64)>> {
    if n > table.limit {
        return Err(domain(format!("{n} exceeds sieve limit {}", table.limit)));
    }
    let mut out = Vec::with_capacity(table.count(n as f64) + 64);
    for &p in table.primes_up_to(n as f64) {
        let p = p as u64;
        let mut q = p;
        let mut k = 1;
        loop {
            out.push((q, 1.0 / k as f64));
            match q.checked_mul(p) {
                Some(next) if next <= n => {
                    q = next;
                    k += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|e| e.0);
    Ok(out)
}
