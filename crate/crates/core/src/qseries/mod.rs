//! Dense truncated power series in `q` with exact integer coefficients.
//!
//! A [`QSeries`] of precision `N` stores the coefficients of `q^0 .. q^{N-1}`.
//! Every binary operation returns a series whose precision is the minimum of
//! the operand precisions, so callers must request enough terms up front.

mod ntt;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use ntt::MAX_LOG_LEN as MAX_NTT_LOG_LEN;

/// Below this output length the schoolbook product is used.
const SCHOOLBOOK_CUTOFF: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    coeffs: Vec<BigInt>,
}

impl QSeries {
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(precision: usize) -> Self {
        Self::from_coeffs(vec![BigInt::zero(); precision])
    }

    /// The constant series `1 + O(q^N)`.
    pub fn one(precision: usize) -> Self {
        let mut s = Self::zero(precision);
        if precision > 0 {
            s.coeffs[0] = BigInt::one();
        }
        s
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Number of nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn truncate(&self, precision: usize) -> Self {
        Self::from_coeffs(self.coeffs[..precision.min(self.precision())].to_vec())
    }

    /// Multiplies by `q^k`, keeping the precision.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.precision();
        let mut out = vec![BigInt::zero(); n];
        for i in k..n {
            out[i] = self.coeffs[i - k].clone();
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Greatest common divisor of all coefficients (zero for the zero series).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| if c.is_zero() { g } else { g.gcd(c) })
    }

    /// Exact division of every coefficient; fails if any division leaves a
    /// remainder.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.precision());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(Self::from_coeffs(out))
    }

    /// Reference `O(N^2)` product.
    pub fn mul_schoolbook(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Product against an operand with few nonzero terms. Terms of the sparse
    /// operand are grouped by value so that each output coefficient costs one
    /// big multiplication per distinct value and plain additions otherwise.
    fn mul_sparse(sparse: &Self, dense: &Self, n: usize) -> Self {
        let mut groups: BTreeMap<BigInt, Vec<usize>> = BTreeMap::new();
        for (i, c) in sparse.coeffs[..n].iter().enumerate() {
            if !c.is_zero() {
                groups.entry(c.clone()).or_default().push(i);
            }
        }
        let groups: Vec<(BigInt, Vec<usize>)> = groups.into_iter().collect();
        let dense = &dense.coeffs[..n];
        let out: Vec<BigInt> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut total = BigInt::zero();
                for (value, idx) in &groups {
                    let mut acc = BigInt::zero();
                    for &i in idx.iter().take_while(|&&i| i <= k) {
                        acc += &dense[k - i];
                    }
                    if acc.is_zero() {
                        continue;
                    }
                    if value.is_one() {
                        total += acc;
                    } else {
                        total += acc * value;
                    }
                }
                total
            })
            .collect();
        Self::from_coeffs(out)
    }

    /// Truncated product. Chooses the sparse, schoolbook or multi-modular
    /// transform path; all paths give identical results.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.precision().min(other.precision());
        if n == 0 {
            return Self::zero(0);
        }
        let (na, nb) = (self.truncate(n), other.truncate(n));
        let sparse_limit = 2 * n.isqrt() + 2;
        let (za, zb) = (na.nnz(), nb.nnz());
        if za.min(zb) <= sparse_limit.max(8) {
            return if za <= zb {
                Self::mul_sparse(&na, &nb, n)
            } else {
                Self::mul_sparse(&nb, &na, n)
            };
        }
        if n < SCHOOLBOOK_CUTOFF {
            return na.mul_schoolbook(&nb);
        }
        let a_ref = &na.coeffs;
        let b_ref = if std::ptr::eq(self, other) {
            &na.coeffs
        } else {
            &nb.coeffs
        };
        match ntt::mul_truncated(a_ref, b_ref, n) {
            Some(c) => Self::from_coeffs(c),
            None => na.mul_schoolbook(&nb),
        }
    }

    /// `self^e` by binary powering; `A^0` is the unit series at A's precision.
    pub fn pow(&self, e: u32) -> Self {
        let n = self.precision();
        let mut result = Self::one(n);
        if e == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut e = e;
        let mut first = true;
        loop {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base) };
                first = false;
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        result
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        let n = self.precision().min(other.precision());
        Self::from_coeffs(
            self.coeffs[..n]
                .iter()
                .zip(&other.coeffs[..n])
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        QSeries::mul(self, rhs)
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

pub fn series_mul(a: &QSeries, b: &QSeries) -> QSeries {
    a.mul(b)
}

pub fn series_pow(a: &QSeries, e: u32) -> QSeries {
    a.pow(e)
}

/// `θ(q) = Σ_{n∈ℤ} q^{n²}` to precision `n`.
pub fn theta_series(n: usize) -> QSeries {
    let mut s = QSeries::zero(n);
    if n > 0 {
        s.coeffs[0] = BigInt::one();
    }
    let mut k = 1usize;
    while k * k < n {
        s.coeffs[k * k] = BigInt::from(2);
        k += 1;
    }
    s
}

/// `F(q) = Σ_{n odd} σ₁(n) q^n`, the weight-2 Eisenstein series on Γ₀(4)
/// used alongside θ to span the half-integral weight spaces.
pub fn eisenstein_f(n: usize) -> QSeries {
    let mut sigma = vec![0u64; n];
    for d in (1..n).step_by(2) {
        for m in (d..n).step_by(2 * d) {
            sigma[m] += d as u64;
        }
    }
    QSeries::from_coeffs(sigma.into_iter().map(BigInt::from).collect())
}

/// Parameters of `η(δz)^m = q^{δm/24} Π_{n≥1} (1 - q^{δn})^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaSpec {
    scale: u32,
    exponent: u32,
}

impl EtaSpec {
    /// Rejects specifications whose `q`-prefactor is fractional.
    pub fn new(scale: u32, exponent: u32) -> Result<Self> {
        if scale == 0 || exponent == 0 {
            return Err(Error::validation("eta scale and exponent must be positive"));
        }
        if (scale as u64 * exponent as u64) % 24 != 0 {
            return Err(Error::validation(format!(
                "24 does not divide scale*exponent = {}*{}",
                scale, exponent
            )));
        }
        Ok(Self { scale, exponent })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// The integral power of `q` in front of the product.
    pub fn prefactor(&self) -> usize {
        (self.scale as usize * self.exponent as usize) / 24
    }
}

/// `Π_{n≥1}(1 - q^{δn})` via Euler's pentagonal number theorem.
fn euler_product(scale: usize, n: usize) -> QSeries {
    let mut s = QSeries::zero(n);
    if n == 0 {
        return s;
    }
    s.coeffs[0] = BigInt::one();
    let mut k = 1usize;
    loop {
        let p1 = scale * (k * (3 * k - 1) / 2);
        if p1 >= n {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        s.coeffs[p1] += sign;
        let p2 = scale * (k * (3 * k + 1) / 2);
        if p2 < n {
            s.coeffs[p2] += sign;
        }
        k += 1;
    }
    s
}

/// Eta product truncated to precision `n`.
pub fn eta_product(spec: EtaSpec, n: usize) -> QSeries {
    let shift = spec.prefactor();
    if shift >= n {
        return QSeries::zero(n);
    }
    let inner = euler_product(spec.scale as usize, n - shift).pow(spec.exponent);
    let mut out = vec![BigInt::zero(); shift];
    out.extend(inner.into_coeffs());
    QSeries::from_coeffs(out)
}

/// Largest absolute value among the coefficients, as bits.
pub fn max_coeff_bits(s: &QSeries) -> u64 {
    s.coeffs.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
}
