//! The generalized Vaughan identity for `Λ_r` and its dyadic decomposition.
//!
//! For cut-offs `Q, R ≥ 1` and every `n ≥ 1`,
//!
//! ```text
//! Λ_r(n) = S1 - S2 + S3 + S4
//! S1 = Σ_{d|n, d≤R} μ(d) log^r(n/d)
//! S2 = Σ_{lm|n, m≤R, l≤Q} μ(m) Λ_r(l)
//! S3 = Σ_{lm|n, l≤Q} μ(m) Λ_r(l)
//! S4 = Σ_{lm|n, m>R, l>Q} μ(m) Λ_r(l)
//! ```
//!
//! where `lm | n` ranges over pairs whose product divides `n`. When
//! `Q < n ≤ QR` both `S3` and `S4` vanish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lambda::{lambda_r_exact, lambda_tables, LogPoly};
use super::{FactorSieve, Factorization};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaughanParams {
    q_bound: f64,
    r_bound: f64,
}

impl VaughanParams {
    pub fn new(q_bound: f64, r_bound: f64) -> Result<Self> {
        if !(q_bound >= 1.0 && r_bound >= 1.0 && q_bound.is_finite() && r_bound.is_finite()) {
            return Err(Error::validation(format!(
                "Vaughan cut-offs must satisfy Q, R >= 1 (got Q = {q_bound}, R = {r_bound})"
            )));
        }
        Ok(Self { q_bound, r_bound })
    }

    /// `Q = X^{9/13}`, `R = X^{4/13}`, with `R` rounded so that `QR ≥ X`.
    pub fn defaults(x: f64) -> Result<Self> {
        if !(x > 1.0) {
            return Err(Error::validation(format!("X must exceed 1, got {x}")));
        }
        let q = x.powf(9.0 / 13.0);
        let mut r = x / q;
        while q * r < x {
            r = r.next_up();
        }
        Self::new(q, r)
    }

    pub fn q(&self) -> f64 {
        self.q_bound
    }

    pub fn r(&self) -> f64 {
        self.r_bound
    }

    /// `X = QR`.
    pub fn x(&self) -> f64 {
        self.q_bound * self.r_bound
    }

    /// Upper end `X^{1/26}` of the `M` range used when balancing the bilinear
    /// bounds.
    pub fn m_cap(&self) -> f64 {
        self.x().powf(1.0 / 26.0)
    }

    /// `Q < n ≤ QR`.
    pub fn in_two_term_range(&self, n: u64) -> bool {
        let n = n as f64;
        n > self.q_bound && n <= self.x()
    }
}

/// Sieve plus `Λ_1 .. Λ_{r_max}` tables sharing one limit.
#[derive(Clone, Debug)]
pub struct LambdaContext {
    sieve: FactorSieve,
    tables: Vec<Vec<f64>>,
}

impl LambdaContext {
    pub fn new(limit: usize, r_max: u32) -> Result<Self> {
        Self::from_sieve(FactorSieve::new(limit)?, r_max)
    }

    pub fn from_sieve(sieve: FactorSieve, r_max: u32) -> Result<Self> {
        let tables = lambda_tables(r_max, sieve.limit(), &sieve)?;
        Ok(Self { sieve, tables })
    }

    pub fn sieve(&self) -> &FactorSieve {
        &self.sieve
    }

    pub fn limit(&self) -> usize {
        self.sieve.limit()
    }

    pub fn r_max(&self) -> u32 {
        self.tables.len() as u32
    }

    pub fn table(&self, r: u32) -> &[f64] {
        &self.tables[r as usize - 1]
    }

    pub fn lambda(&self, r: u32, n: u64) -> f64 {
        self.tables[r as usize - 1][n as usize]
    }

    fn check(&self, n: u64, r: u32) -> Result<Factorization> {
        if r == 0 || r > self.r_max() {
            return Err(Error::validation(format!(
                "order r = {r} outside 1..={}",
                self.r_max()
            )));
        }
        if n == 0 || n as usize > self.limit() {
            return Err(Error::precision(
                format!("n = {n} outside 1..={}", self.limit()),
                self.limit() as u64,
            ));
        }
        Ok(self.sieve.factorize(n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaughanTerms {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl VaughanTerms {
    pub fn reassembled(&self) -> f64 {
        self.s1 - self.s2 + self.s3 + self.s4
    }
}

/// Squarefree divisors of the number with the given factorization, as
/// `(value, μ)`.
fn squarefree_divisors(fact: &[(u64, u32)]) -> Vec<(u64, i64)> {
    let primes: Vec<u64> = fact.iter().filter(|&&(_, a)| a > 0).map(|&(p, _)| p).collect();
    (0u32..(1 << primes.len()))
        .map(|s| {
            let d: u64 = primes
                .iter()
                .enumerate()
                .filter(|(i, _)| (s >> i) & 1 == 1)
                .map(|(_, &p)| p)
                .product();
            (d, if s.count_ones() % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

/// All divisors `l` of `n` together with the exponent vector of `n/l`.
fn divisor_pairs(fact: &Factorization) -> Vec<(u64, Factorization, Vec<(u64, u32)>)> {
    let mut out = vec![(1u64, Vec::<(u64, u32)>::new())];
    for &(p, a) in &fact.factors {
        let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
        for (v, exps) in &out {
            let mut pk = 1u64;
            for k in 0..=a {
                let mut e = exps.clone();
                e.push((p, k));
                next.push((v * pk, e));
                pk *= p;
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(l, exps)| {
            let lf = Factorization {
                factors: exps.iter().copied().filter(|&(_, k)| k > 0).collect(),
            };
            let rest = exps
                .iter()
                .zip(&fact.factors)
                .map(|(&(p, k), &(_, a))| (p, a - k))
                .collect();
            (l, lf, rest)
        })
        .collect()
}

/// Möbius sums over `m | k`: `(Σ μ(m), Σ_{m≤R} μ(m))`.
fn mobius_sums(rest: &[(u64, u32)], r_bound: f64) -> (i64, i64) {
    let mut all = 0;
    let mut small = 0;
    for (m, mu) in squarefree_divisors(rest) {
        all += mu;
        if m as f64 <= r_bound {
            small += mu;
        }
    }
    (all, small)
}

/// The four sums of the identity, in floating point.
pub fn vaughan_terms(
    n: u64,
    r: u32,
    params: &VaughanParams,
    ctx: &LambdaContext,
) -> Result<VaughanTerms> {
    let fact = ctx.check(n, r)?;
    let mut t = VaughanTerms {
        s1: 0.0,
        s2: 0.0,
        s3: 0.0,
        s4: 0.0,
    };
    for (d, mu) in squarefree_divisors(&fact.factors) {
        if d as f64 <= params.r() {
            t.s1 += mu as f64 * ((n / d) as f64).ln().powi(r as i32);
        }
    }
    for (l, _, rest) in divisor_pairs(&fact) {
        let lam = ctx.lambda(r, l);
        if lam == 0.0 {
            continue;
        }
        let (all, small) = mobius_sums(&rest, params.r());
        if l as f64 <= params.q() {
            t.s2 += lam * small as f64;
            t.s3 += lam * all as f64;
        } else {
            t.s4 += lam * (all - small) as f64;
        }
    }
    Ok(t)
}

/// Exact symbolic counterparts of [`VaughanTerms`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactVaughanTerms {
    pub s1: LogPoly,
    pub s2: LogPoly,
    pub s3: LogPoly,
    pub s4: LogPoly,
}

impl ExactVaughanTerms {
    /// `S1 - S2 + S3 + S4 - Λ_r(n)`; empty exactly when the identity holds.
    pub fn residual(&self, lambda: &LogPoly) -> LogPoly {
        let mut out = self.s1.clone();
        out.add_scaled(&self.s2, -1);
        out.add_scaled(&self.s3, 1);
        out.add_scaled(&self.s4, 1);
        out.add_scaled(lambda, -1);
        out
    }
}

/// The four sums using exact `Λ_r` values and exact expansions of
/// `log^r(n/d)`.
pub fn vaughan_terms_exact(fact: &Factorization, r: u32, params: &VaughanParams) -> ExactVaughanTerms {
    let mut out = ExactVaughanTerms {
        s1: LogPoly::zero(),
        s2: LogPoly::zero(),
        s3: LogPoly::zero(),
        s4: LogPoly::zero(),
    };
    let primes: Vec<(u64, u32)> = fact.factors.clone();
    for s in 0u32..(1 << primes.len()) {
        let d: u64 = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| (s >> i) & 1 == 1)
            .map(|(_, &(p, _))| p)
            .product();
        if d as f64 > params.r() {
            continue;
        }
        let reduced: Vec<(u64, u32)> = primes
            .iter()
            .enumerate()
            .map(|(i, &(p, a))| (p, a - ((s >> i) & 1)))
            .collect();
        let mu = if s.count_ones() % 2 == 0 { 1 } else { -1 };
        out.s1.add_scaled(&LogPoly::log_power(&reduced, r), mu);
    }
    for (l, lf, rest) in divisor_pairs(fact) {
        let lam = lambda_r_exact(r, &lf).exact;
        if lam.is_zero() {
            continue;
        }
        let (all, small) = mobius_sums(&rest, params.r());
        if l as f64 <= params.q() {
            out.s2.add_scaled(&lam, small as i128);
            out.s3.add_scaled(&lam, all as i128);
        } else {
            out.s4.add_scaled(&lam, (all - small) as i128);
        }
    }
    out
}

/// `(S1, S2)` for `Q < n ≤ QR`, after confirming that `S3` and `S4` vanish.
pub fn vaughan_two_term(
    n: u64,
    r: u32,
    params: &VaughanParams,
    ctx: &LambdaContext,
) -> Result<(f64, f64)> {
    if !params.in_two_term_range(n) {
        return Err(Error::validation(format!(
            "two-term identity needs Q < n <= QR (n = {n}, Q = {}, QR = {})",
            params.q(),
            params.x()
        )));
    }
    let t = vaughan_terms(n, r, params, ctx)?;
    if t.s3 != 0.0 || t.s4 != 0.0 {
        return Err(Error::assertion(format!(
            "S3 = {}, S4 = {} should vanish for n = {n}",
            t.s3, t.s4
        )));
    }
    Ok((t.s1, t.s2))
}

/// Half-open interval `(lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicBlock {
    pub lower: f64,
    pub upper: f64,
}

impl DyadicBlock {
    pub fn contains(&self, v: f64) -> bool {
        v > self.lower && v <= self.upper
    }
}

/// `⌈log₂ bound⌉` blocks `(bound/2^{i+1}, bound/2^i]` covering `(0, bound]`;
/// the lowest block is extended down to 0 so that every integer in range is
/// covered exactly once.
pub fn dyadic_blocks(bound: f64) -> Vec<DyadicBlock> {
    let count = (bound.log2().ceil() as usize).max(1);
    (0..count)
        .map(|i| {
            let upper = bound / 2f64.powi(i as i32);
            let lower = if i + 1 == count { 0.0 } else { upper / 2.0 };
            DyadicBlock { lower, upper }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicDecomposition {
    /// `Λ*_R(n) = Σ_{d|n, d≤R} μ(d) log^r(n/d)`.
    pub lambda_star_r: f64,
    pub l_blocks: Vec<DyadicBlock>,
    pub m_blocks: Vec<DyadicBlock>,
    /// `grid[i][j] = Λ*_{LM}(n)` for `l ∈ l_blocks[i]`, `m ∈ m_blocks[j]`.
    pub grid: Vec<Vec<f64>>,
}

impl DyadicDecomposition {
    pub fn reassembled(&self) -> f64 {
        self.lambda_star_r - self.grid.iter().flatten().sum::<f64>()
    }
}

/// `Λ_r(n) = Λ*_R(n) - Σ_L Σ_M Λ*_{LM}(n)` for `Q < n ≤ QR`.
pub fn dyadic_decomposition(
    n: u64,
    r: u32,
    params: &VaughanParams,
    ctx: &LambdaContext,
) -> Result<DyadicDecomposition> {
    if !params.in_two_term_range(n) {
        return Err(Error::validation(format!(
            "dyadic decomposition needs Q < n <= QR (n = {n}, Q = {}, QR = {})",
            params.q(),
            params.x()
        )));
    }
    let fact = ctx.check(n, r)?;
    let l_blocks = dyadic_blocks(params.q());
    let m_blocks = dyadic_blocks(params.r());
    let mut grid = vec![vec![0.0; m_blocks.len()]; l_blocks.len()];
    let mut lambda_star_r = 0.0;
    for (d, mu) in squarefree_divisors(&fact.factors) {
        if d as f64 <= params.r() {
            lambda_star_r += mu as f64 * ((n / d) as f64).ln().powi(r as i32);
        }
    }
    for (l, _, rest) in divisor_pairs(&fact) {
        let lam = ctx.lambda(r, l);
        if lam == 0.0 {
            continue;
        }
        let Some(i) = l_blocks.iter().position(|b| b.contains(l as f64)) else {
            continue;
        };
        for (m, mu) in squarefree_divisors(&rest) {
            if let Some(j) = m_blocks.iter().position(|b| b.contains(m as f64)) {
                grid[i][j] += mu as f64 * lam;
            }
        }
    }
    Ok(DyadicDecomposition {
        lambda_star_r,
        l_blocks,
        m_blocks,
        grid,
    })
}

/// One randomized identity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaughanCase {
    pub n: u64,
    pub r: u32,
    pub params: VaughanParams,
}

/// Seeded cases with `n ≤ n_max`, `r ≤ r_max` and log-uniform `Q, R` in
/// `[1, n_max^{1.2}]`.
pub fn random_cases(seed: u64, count: usize, n_max: u64, r_max: u32) -> Vec<VaughanCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 1.2 * (n_max as f64).ln();
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=n_max);
            let r = rng.gen_range(1..=r_max);
            let q = (rng.gen::<f64>() * span).exp();
            let rr = (rng.gen::<f64>() * span).exp();
            VaughanCase {
                n,
                r,
                params: VaughanParams::new(q, rr).expect("cut-offs are at least 1"),
            }
        })
        .collect()
}

/// Seeded cases satisfying `Q < n ≤ QR`.
pub fn random_two_term_cases(seed: u64, count: usize, n_max: u64, r_max: u32) -> Vec<VaughanCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(3..=n_max);
        let r = rng.gen_range(1..=r_max);
        let nf = n as f64;
        let q = nf.powf(rng.gen_range(0.05..0.95));
        let rr = (nf / q) * nf.powf(rng.gen_range(0.0..0.25)) * (1.0 + 1e-9);
        let Ok(params) = VaughanParams::new(q, rr) else {
            continue;
        };
        if params.in_two_term_range(n) {
            out.push(VaughanCase { n, r, params });
        }
    }
    out
}
