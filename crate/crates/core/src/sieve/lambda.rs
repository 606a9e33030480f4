//! Generalized von Mangoldt functions `Λ_r = μ * log^r`.
//!
//! Two representations are provided. Floating tables come from the
//! recurrence `Λ_{r+1} = Λ_r log + Λ_r * Λ`, which never produces a nonzero
//! value where `ω(n) > r`. The exact form expands the defining divisor sum
//! into integer combinations of monomials `Π (log p)^e`, so structural zeros
//! are certified by exact cancellation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::{FactorSieve, Factorization};
use crate::error::{Error, Result};

/// Product `Π (log p_i)^{e_i}` stored as `(p_i, e_i)` with primes ascending.
pub type Monomial = Vec<(u64, u32)>;

/// Integer combination of log-prime monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogPoly {
    terms: BTreeMap<Monomial, i128>,
}

impl LogPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, i128> {
        &self.terms
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: i128) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &LogPoly, scale: i128) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn eval(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| {
                c as f64
                    * m.iter()
                        .map(|&(p, e)| (p as f64).ln().powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// `(Σ a_i log p_i)^r` expanded by the multinomial theorem.
    pub fn log_power(factors: &[(u64, u32)], r: u32) -> LogPoly {
        let mut out = LogPoly::zero();
        let live: Vec<(u64, u32)> = factors.iter().copied().filter(|&(_, a)| a > 0).collect();
        if live.is_empty() {
            return out;
        }
        let mut ks = vec![0u32; live.len()];
        compositions(r, 0, &mut ks, &mut |ks| {
            let mut coeff = multinomial(r, ks);
            let mut mono = Vec::new();
            for (&(p, a), &k) in live.iter().zip(ks) {
                if k > 0 {
                    coeff *= (a as i128).pow(k);
                    mono.push((p, k));
                }
            }
            out.add_term(mono, coeff);
        });
        out
    }
}

fn compositions(remaining: u32, idx: usize, ks: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if idx + 1 == ks.len() {
        ks[idx] = remaining;
        f(ks);
        return;
    }
    for k in 0..=remaining {
        ks[idx] = k;
        compositions(remaining - k, idx + 1, ks, f);
    }
}

fn multinomial(r: u32, ks: &[u32]) -> i128 {
    let fact = |n: u32| (1..=n as i128).product::<i128>();
    ks.iter().fold(fact(r), |acc, &k| acc / fact(k))
}

/// `Λ_r(n)` in floating and exact symbolic form.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaValue {
    pub float: f64,
    pub exact: LogPoly,
}

/// Exact `Λ_r(n) = Σ_{d|n} μ(d) log^r(n/d)`, summing over the squarefree
/// divisors `d` of `n` given by its factorization.
pub fn lambda_r_exact(r: u32, fact: &Factorization) -> LambdaValue {
    let w = fact.factors.len();
    let mut exact = LogPoly::zero();
    if r == 0 {
        // log^0 = 1, so Λ_0 is the identity for Dirichlet convolution
        if w == 0 {
            exact.add_term(Vec::new(), 1);
        }
    } else {
        for subset in 0u32..(1 << w) {
            let reduced: Vec<(u64, u32)> = fact
                .factors
                .iter()
                .enumerate()
                .map(|(i, &(p, a))| (p, a - ((subset >> i) & 1)))
                .collect();
            let sign = if subset.count_ones() % 2 == 0 { 1 } else { -1 };
            exact.add_scaled(&LogPoly::log_power(&reduced, r), sign);
        }
    }
    LambdaValue {
        float: exact.eval(),
        exact,
    }
}

/// Direct floating evaluation of the divisor sum, with no structural
/// knowledge of the support; used as an independent reference.
pub fn lambda_r_divisor_sum(r: u32, fact: &Factorization) -> f64 {
    let n = fact.value() as f64;
    let w = fact.factors.len();
    (0u32..(1 << w))
        .map(|subset| {
            let d: f64 = fact
                .factors
                .iter()
                .enumerate()
                .filter(|(i, _)| (subset >> i) & 1 == 1)
                .map(|(_, &(p, _))| p as f64)
                .product();
            let sign = if subset.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sign * (n / d).ln().powi(r as i32)
        })
        .sum()
}

/// Tables of `Λ_1 .. Λ_{r_max}` on `0..=x` (index 0 unused, `Λ_r(1) = 0`).
pub fn lambda_tables(r_max: u32, x: usize, sieve: &FactorSieve) -> Result<Vec<Vec<f64>>> {
    if r_max == 0 {
        return Err(Error::validation("order r must be at least 1"));
    }
    if x > sieve.limit() {
        return Err(Error::precision(
            format!("lambda table up to {x} exceeds sieve limit"),
            sieve.limit() as u64,
        ));
    }
    let r_max = r_max as usize;
    let mut tables = vec![vec![0.0f64; x + 1]; r_max];
    let mut prime_powers: Vec<(usize, f64)> = Vec::new();
    for n in 2..=x {
        let fact = sieve.factorize(n as u64);
        if fact.factors.len() == 1 {
            tables[0][n] = (fact.factors[0].0 as f64).ln();
        }
        // divisors p^k of n paired with log p
        prime_powers.clear();
        for &(p, a) in &fact.factors {
            let lp = (p as f64).ln();
            let mut pk = 1usize;
            for _ in 0..a {
                pk *= p as usize;
                prime_powers.push((pk, lp));
            }
        }
        let ln_n = (n as f64).ln();
        for r in 1..r_max {
            if fact.factors.len() > r + 1 {
                continue;
            }
            let prev = &tables[r - 1];
            let mut v = prev[n] * ln_n;
            for &(pk, lp) in &prime_powers {
                v += prev[n / pk] * lp;
            }
            tables[r][n] = v;
        }
    }
    Ok(tables)
}

/// `Λ_r(n)` for `0 ≤ n ≤ x` by the support-aware recurrence.
pub fn lambda_r_table(r: u32, x: usize, sieve: &FactorSieve) -> Result<Vec<f64>> {
    let mut tables = lambda_tables(r, x, sieve)?;
    Ok(tables.pop().expect("r >= 1"))
}
