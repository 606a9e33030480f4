//! The Kohnen plus-space cusp eigenform of weight `ℓ + 1/2` on Γ₀(4), built
//! from the monomials `θ^a F^b`, and its certification by the Hecke operators
//! `T(p²)` against the Shimura lift.
//!
//! For `ℓ = 6` the plus space of cusp forms is one-dimensional and its Shimura
//! lift is `Δ = q Π (1 - q^n)^24`, so every `T(p²)` eigenvalue must equal
//! Ramanujan's `τ(p)`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::kronecker;
use crate::error::{Error, Result};
use crate::qseries::{eisenstein_f, eta_product, theta_series, EtaSpec, QSeries};

pub const LEVEL: u32 = 4;

/// Smallest precision accepted by [`build_plus_cusp_form`].
pub const MIN_PRECISION: usize = 200;

/// Whether the plus-space condition forces `c(n) = 0`, i.e.
/// `(-1)^ℓ n ≡ 2, 3 (mod 4)`.
pub fn plus_space_forbidden(ell: u32, n: usize) -> bool {
    let m = if ell % 2 == 0 {
        n % 4
    } else {
        (4 - n % 4) % 4
    };
    m == 2 || m == 3
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfIntegralForm {
    ell: u32,
    coeffs: QSeries,
}

impl HalfIntegralForm {
    /// Wraps coefficients after checking the cusp condition at infinity and
    /// the plus-space support.
    pub fn new(ell: u32, coeffs: QSeries) -> Result<Self> {
        if ell < 2 {
            return Err(Error::validation(format!("ell must be at least 2, got {ell}")));
        }
        if coeffs.precision() > 0 && !coeffs.coeff(0).is_zero() {
            return Err(Error::validation("c(0) must vanish for a cusp form"));
        }
        if let Some(n) =
            (0..coeffs.precision()).find(|&n| plus_space_forbidden(ell, n) && !coeffs.coeff(n).is_zero())
        {
            return Err(Error::validation(format!(
                "coefficient at n = {n} violates the plus-space support"
            )));
        }
        Ok(Self { ell, coeffs })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Weight `ℓ + 1/2` as a fraction string, e.g. `"13/2"`.
    pub fn weight(&self) -> String {
        format!("{}/2", 2 * self.ell + 1)
    }

    pub fn level(&self) -> u32 {
        LEVEL
    }

    pub fn precision(&self) -> usize {
        self.coeffs.precision()
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        self.coeffs.coeff(n)
    }

    pub fn series(&self) -> &QSeries {
        &self.coeffs
    }

    /// Exponent `(2ℓ - 1)/4` relating `c(n)` to `a_f(n)`.
    pub fn normalization_exponent(&self) -> f64 {
        (2.0 * self.ell as f64 - 1.0) / 4.0
    }

    /// `a_f(n) = c(n) n^{-(2ℓ-1)/4}`.
    pub fn normalized_coeff(&self, n: usize) -> Result<f64> {
        if n == 0 || n >= self.precision() {
            return Err(Error::precision(
                format!("normalized coefficient at n = {n} outside 1..{}", self.precision()),
                self.precision().saturating_sub(1) as u64,
            ));
        }
        let c = self.coeff(n);
        if c.is_zero() {
            return Ok(0.0);
        }
        Ok(c.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(self.normalization_exponent()))
    }

    /// `a_f(n)` for `0 ≤ n < precision`, with the unused slot `n = 0` set to 0.
    pub fn normalized_table(&self) -> Vec<f64> {
        let e = self.normalization_exponent();
        self.coeffs
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n == 0 || c.is_zero() {
                    0.0
                } else {
                    c.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(e)
                }
            })
            .collect()
    }

    /// Coefficients `c(n)` converted to doubles.
    pub fn float_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .coeffs()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// Exponent pairs `(a, b)` with `a + 4b = 2ℓ + 1`, by decreasing `a`.
pub fn monomial_basis(ell: u32) -> Result<Vec<(u32, u32)>> {
    if ell < 2 {
        return Err(Error::validation(format!("ell must be at least 2, got {ell}")));
    }
    let total = 2 * ell + 1;
    Ok((0..=total / 4).map(|b| (total - 4 * b, b)).collect())
}

/// Number of leading coefficients on which the linear conditions are imposed.
pub fn constraint_horizon(monomials: usize) -> usize {
    4 * monomials + 40
}

/// Right null space of a rational matrix, one basis vector per free column.
fn null_space(rows: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

/// Monomials `θ^a F^b` at precision `n`, in the order of [`monomial_basis`].
fn monomials(ell: u32, n: usize) -> Result<Vec<QSeries>> {
    let basis = monomial_basis(ell)?;
    let theta = theta_series(n);
    let f = eisenstein_f(n);
    let theta4 = theta.pow(4);
    let a_min = basis.last().map(|&(a, _)| a).unwrap_or(0);
    // θ powers in increasing order a_min, a_min + 4, ...
    let mut theta_pows = vec![theta.pow(a_min)];
    while theta_pows.len() < basis.len() {
        let next = theta_pows.last().unwrap().mul(&theta4);
        theta_pows.push(next);
    }
    let mut f_pows = vec![QSeries::one(n)];
    while f_pows.len() < basis.len() {
        let next = f_pows.last().unwrap().mul(&f);
        f_pows.push(next);
    }
    Ok(basis
        .iter()
        .map(|&(a, b)| {
            let tp = &theta_pows[((a - a_min) / 4) as usize];
            let fp = &f_pows[b as usize];
            if b == 0 {
                tp.clone()
            } else {
                tp.mul(fp)
            }
        })
        .collect())
}

/// Builds the normalized plus-space cusp form of weight `ℓ + 1/2` to
/// precision `n`.
///
/// The combination of monomials is pinned down by `c(0) = 0` and the
/// vanishing of `c(m)` for forbidden `m` below [`constraint_horizon`]. The
/// solution space must be one-dimensional; the generator is returned with
/// coprime integer coefficients and a positive leading coefficient.
pub fn build_plus_cusp_form(ell: u32, n: usize) -> Result<HalfIntegralForm> {
    build_with_horizon(ell, n, None)
}

/// As [`build_plus_cusp_form`] with an explicit constraint horizon.
pub fn build_with_horizon(ell: u32, n: usize, horizon: Option<usize>) -> Result<HalfIntegralForm> {
    if ell < 2 || ell % 2 == 1 {
        return Err(Error::validation(format!("ell must be even and at least 2, got {ell}")));
    }
    if n < MIN_PRECISION {
        return Err(Error::validation(format!(
            "precision must be at least {MIN_PRECISION}, got {n}"
        )));
    }
    let monos = monomials(ell, n)?;
    let horizon = horizon
        .unwrap_or_else(|| constraint_horizon(monos.len()))
        .min(n);
    let constrained: Vec<usize> = std::iter::once(0)
        .chain((1..horizon).filter(|&m| plus_space_forbidden(ell, m)))
        .collect();
    let rows: Vec<Vec<BigRational>> = constrained
        .iter()
        .map(|&m| {
            monos
                .iter()
                .map(|s| BigRational::from_integer(s.coeff(m).clone()))
                .collect()
        })
        .collect();
    let kernel = null_space(&rows, monos.len());
    if kernel.len() != 1 {
        return Err(Error::assertion(format!(
            "plus-space cusp solution space has dimension {} (expected 1) for ell = {ell}, horizon {horizon}",
            kernel.len()
        )));
    }
    let v = &kernel[0];
    let denom_lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(denom_lcm.clone())).to_integer())
        .collect();

    let mut combo = QSeries::zero(n);
    for (x, s) in ints.iter().zip(&monos) {
        if !x.is_zero() {
            combo = &combo + &s.scale(x);
        }
    }
    let content = combo.content();
    if content.is_zero() {
        return Err(Error::assertion("constructed form is identically zero"));
    }
    let mut combo = combo
        .div_exact(&content)
        .ok_or_else(|| Error::assertion("content division left a remainder"))?;
    let lead = combo
        .coeffs()
        .iter()
        .find(|c| !c.is_zero())
        .expect("nonzero series")
        .clone();
    if lead.is_negative() {
        combo = -&combo;
    }
    HalfIntegralForm::new(ell, combo).map_err(|e| Error::assertion(format!("constructed form: {e}")))
}

/// Ramanujan's `τ(n)` from the expansion of `η(z)^24`.
#[derive(Clone, Debug)]
pub struct ShimuraLiftOracle {
    tau: Vec<BigInt>,
}

impl ShimuraLiftOracle {
    pub fn new(n: usize) -> Self {
        let spec = EtaSpec::new(1, 24).expect("24 | 24");
        Self {
            tau: eta_product(spec, n).into_coeffs(),
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn tau(&self, n: usize) -> &BigInt {
        &self.tau[n]
    }

    pub fn table(&self) -> &[BigInt] {
        &self.tau
    }
}

fn is_prime(p: u64) -> bool {
    crate::arith::is_prime(p)
}

/// `T(p²)` applied to the form, as many output coefficients as the
/// precision allows (`⌊N/p²⌋`).
pub fn hecke_tp2(form: &HalfIntegralForm, p: u64) -> Result<QSeries> {
    let p2 = (p * p) as usize;
    hecke_tp2_to(form, p, form.precision() / p2.max(1))
}

/// `T(p²)` applied to the form with `len` output coefficients:
/// `b(n) = c(p²n) + ((-1)^ℓ n | p) p^{ℓ-1} c(n) + p^{2ℓ-1} c(n/p²)`.
///
/// The middle symbol is the Kronecker symbol, so at `p = 2` it vanishes for
/// even `n` and is `±1` according to `(-1)^ℓ n ≡ ±1, ±3 (mod 8)`. At `p = 2`
/// the image is projected back to the plus space: coefficients with
/// `(-1)^ℓ n ≡ 2, 3 (mod 4)` are set to zero.
pub fn hecke_tp2_to(form: &HalfIntegralForm, p: u64, len: usize) -> Result<QSeries> {
    if !is_prime(p) {
        return Err(Error::validation(format!("{p} is not prime")));
    }
    let p2 = (p * p) as usize;
    let max_len = form.precision() / p2;
    if len == 0 || len > max_len {
        return Err(Error::precision(
            format!("T({p}^2) output length {len} needs precision {}", len.max(1) * p2),
            max_len as u64,
        ));
    }
    let ell = form.ell();
    let mid_scale = BigInt::from(p).pow(ell - 1);
    let tail_scale = BigInt::from(p).pow(2 * ell - 1);
    let sign: i64 = if ell % 2 == 0 { 1 } else { -1 };
    let out = (0..len)
        .map(|n| {
            if p == 2 && plus_space_forbidden(ell, n) {
                return BigInt::zero();
            }
            let mut b = form.coeff(p2 * n).clone();
            let chi = kronecker(sign * n as i64, p);
            if chi != 0 {
                let term = form.coeff(n) * &mid_scale;
                if chi > 0 {
                    b += term;
                } else {
                    b -= term;
                }
            }
            if n % p2 == 0 {
                b += form.coeff(n / p2) * &tail_scale;
            }
            b
        })
        .collect();
    Ok(QSeries::from_coeffs(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenReport {
    pub p: u64,
    pub passed: bool,
    /// `τ(p)` as a decimal string.
    pub eigenvalue: String,
    /// Number of output coefficients compared.
    pub checked: usize,
    pub first_mismatch: Option<usize>,
}

/// Checks `T(p²) f = τ(p) f` on every computable coefficient.
pub fn eigenvalue_check(
    form: &HalfIntegralForm,
    p: u64,
    oracle: &ShimuraLiftOracle,
) -> Result<EigenReport> {
    if (p as usize) >= oracle.len() {
        return Err(Error::precision(
            format!("tau({p}) not available"),
            oracle.len().saturating_sub(1) as u64,
        ));
    }
    let image = hecke_tp2(form, p)?;
    let lambda = oracle.tau(p as usize);
    let first_mismatch =
        (0..image.precision()).find(|&n| image.coeff(n) != &(form.coeff(n) * lambda));
    Ok(EigenReport {
        p,
        passed: first_mismatch.is_none(),
        eigenvalue: lambda.to_string(),
        checked: image.precision(),
        first_mismatch,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDocument {
    ell: u32,
    weight: String,
    level: u32,
    precision: usize,
    coeffs: Vec<(usize, String)>,
}

impl HalfIntegralForm {
    /// Compact JSON with the nonzero coefficients as decimal strings.
    pub fn to_json(&self) -> String {
        let doc = FormDocument {
            ell: self.ell,
            weight: self.weight(),
            level: LEVEL,
            precision: self.precision(),
            coeffs: self
                .coeffs
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(n, c)| (n, c.to_string()))
                .collect(),
        };
        serde_json::to_string(&doc).expect("form document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: FormDocument =
            serde_json::from_str(s).map_err(|e| Error::validation(format!("form json: {e}")))?;
        if doc.ell < 2 {
            return Err(Error::validation("ell must be at least 2"));
        }
        if doc.weight != format!("{}/2", 2 * doc.ell + 1) {
            return Err(Error::validation(format!(
                "weight {} inconsistent with ell {}",
                doc.weight, doc.ell
            )));
        }
        if doc.level != LEVEL {
            return Err(Error::validation(format!("level must be {LEVEL}")));
        }
        let mut coeffs = vec![BigInt::zero(); doc.precision];
        let mut last: Option<usize> = None;
        for (n, text) in doc.coeffs {
            if last.is_some_and(|l| n <= l) {
                return Err(Error::validation("coefficients must be sorted by n without repeats"));
            }
            last = Some(n);
            if n >= doc.precision {
                return Err(Error::validation(format!("coefficient index {n} beyond precision")));
            }
            let c = BigInt::from_str(&text)
                .map_err(|_| Error::validation(format!("bad coefficient {text:?} at n = {n}")))?;
            if c.is_zero() {
                return Err(Error::validation(format!("explicit zero listed at n = {n}")));
            }
            coeffs[n] = c;
        }
        Self::new(doc.ell, QSeries::from_coeffs(coeffs))
    }
}

pub fn save_form(form: &HalfIntegralForm, path: &Path) -> Result<()> {
    fs::write(path, form.to_json())?;
    Ok(())
}

pub fn load_form(path: &Path) -> Result<HalfIntegralForm> {
    let text = fs::read_to_string(path)?;
    HalfIntegralForm::from_json(&text)
}
