//! Least-prime-factor sieve and the arithmetic built on it.

mod almost;
pub mod cache;
mod lambda;
mod vaughan;

pub use almost::{almost_primes, qualify_mask, PrMode};
pub use lambda::{
    lambda_r_divisor_sum, lambda_r_exact, lambda_r_table, lambda_tables, LambdaValue, LogPoly,
    Monomial,
};
pub use vaughan::{
    dyadic_blocks, dyadic_decomposition, random_cases, random_two_term_cases, vaughan_terms,
    vaughan_terms_exact, vaughan_two_term, DyadicBlock, DyadicDecomposition, ExactVaughanTerms,
    LambdaContext, VaughanCase, VaughanParams, VaughanTerms,
};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sieving proceeds in independent segments of this many entries.
pub const SEGMENT_LEN: usize = 1 << 22;

/// Largest limit accepted by [`FactorSieve::new`]; least prime factors are
/// stored as `u32`.
pub const DEFAULT_MAX_LIMIT: usize = 1 << 31;

/// Prime factorization `Π p_i^{a_i}` with primes ascending.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, a)| p.pow(a))
            .product()
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, a)| a).sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a == 1)
    }

    pub fn mobius(&self) -> i32 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, a) in &self.factors {
            let base = out.len();
            let mut pk = 1u64;
            for _ in 0..a {
                pk *= p;
                for i in 0..base {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Trial-division factorization; independent of any sieve.
pub fn trial_factorize(mut n: u64) -> Factorization {
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut a = 0;
            while n % d == 0 {
                n /= d;
                a += 1;
            }
            factors.push((d, a));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    Factorization { factors }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticFunctions {
    pub factorization: Factorization,
    pub omega: u32,
    pub big_omega: u32,
    pub mobius: i32,
}

#[derive(Clone, Debug)]
pub struct FactorSieve {
    lpf: Vec<u32>,
}

fn small_primes(limit: usize) -> Vec<u32> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

impl FactorSieve {
    pub fn new(limit: usize) -> Result<Self> {
        Self::with_max(limit, DEFAULT_MAX_LIMIT)
    }

    /// Builds the table for `0..=limit`, rejecting limits above `max`.
    pub fn with_max(limit: usize, max: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::validation(format!("sieve limit must be at least 2, got {limit}")));
        }
        if limit > max {
            return Err(Error::validation(format!(
                "sieve limit {limit} exceeds the configured maximum {max}"
            )));
        }
        let base = small_primes(limit.isqrt());
        let mut lpf = vec![0u32; limit + 1];
        lpf.par_chunks_mut(SEGMENT_LEN)
            .enumerate()
            .for_each(|(seg, chunk)| {
                let lo = seg * SEGMENT_LEN;
                let hi = lo + chunk.len();
                for &p in &base {
                    let p = p as usize;
                    let start = (p * p).max(lo.div_ceil(p) * p);
                    if start >= hi {
                        continue;
                    }
                    let mut m = start;
                    while m < hi {
                        if chunk[m - lo] == 0 {
                            chunk[m - lo] = p as u32;
                        }
                        m += p;
                    }
                }
                for (i, v) in chunk.iter_mut().enumerate() {
                    if *v == 0 {
                        *v = (lo + i) as u32;
                    }
                }
            });
        lpf[0] = 0;
        lpf[1] = 1;
        Ok(Self { lpf })
    }

    /// Rebuilds a sieve from a stored table, checking its shape.
    pub fn from_raw(lpf: Vec<u32>) -> Result<Self> {
        if lpf.len() < 3 || lpf[0] != 0 || lpf[1] != 1 || lpf[2] != 2 {
            return Err(Error::validation("malformed least-prime-factor table"));
        }
        Ok(Self { lpf })
    }

    pub fn raw(&self) -> &[u32] {
        &self.lpf
    }

    pub fn limit(&self) -> usize {
        self.lpf.len() - 1
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n as usize > self.limit() {
            return Err(Error::precision(
                format!("{n} outside sieve range 1..={}", self.limit()),
                self.limit() as u64,
            ));
        }
        Ok(n as usize)
    }

    pub fn lpf(&self, n: u64) -> u64 {
        self.lpf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.lpf[n as usize] as u64 == n
    }

    /// Factorization by repeated division by the least prime factor. Panics
    /// outside `1..=limit`; use [`Self::arithmetic_functions`] for a checked
    /// query.
    pub fn factorize(&self, n: u64) -> Factorization {
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.lpf[m] as usize;
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            factors.push((p as u64, a));
        }
        Factorization { factors }
    }

    pub fn arithmetic_functions(&self, n: u64) -> Result<ArithmeticFunctions> {
        self.check(n)?;
        let factorization = self.factorize(n);
        Ok(ArithmeticFunctions {
            omega: factorization.omega(),
            big_omega: factorization.big_omega(),
            mobius: factorization.mobius(),
            factorization,
        })
    }

    /// `ω(n)` for `0 ≤ n ≤ x` (with `ω(0) = ω(1) = 0`).
    pub fn omega_table(&self, x: usize) -> Vec<u8> {
        let mut t = vec![0u8; x + 1];
        for n in 2..=x {
            let p = self.lpf[n] as usize;
            let m = n / p;
            t[n] = t[m] + u8::from(m % p != 0 || m == 1);
        }
        t
    }

    /// `Ω(n)` for `0 ≤ n ≤ x`.
    pub fn big_omega_table(&self, x: usize) -> Vec<u8> {
        let mut t = vec![0u8; x + 1];
        for n in 2..=x {
            t[n] = t[n / self.lpf[n] as usize] + 1;
        }
        t
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..self.lpf.len())
            .filter(|&n| self.lpf[n] as usize == n)
            .map(|n| n as u64)
    }
}
