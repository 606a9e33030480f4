//! Empirical probes on the normalized coefficients `a_f(n)`: partial sums
//! over almost primes, exponent fits, sign changes, second moments, growth of
//! running maxima and the smoothed sums `P(X)` with their Vaughan split.
//!
//! Every probe has a table-level entry point taking `a_f` as a slice, so the
//! same code runs on synthetic sequences in tests.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::HalfIntegralForm;
use crate::kahan::KahanSum;
use crate::sieve::{
    dyadic_decomposition, qualify_mask, FactorSieve, LambdaContext, PrMode, VaughanParams,
};

/// Coefficient weights `ψ(n)` by a Dirichlet character modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Character {
    /// `ψ = 1`.
    None,
    /// Principal character mod 4.
    Principal4,
    /// `χ_{-4}`.
    Nonprincipal4,
}

impl Character {
    pub fn value(self, n: u64) -> f64 {
        match self {
            Character::None => 1.0,
            Character::Principal4 => (n % 2) as f64,
            Character::Nonprincipal4 => match n % 4 {
                1 => 1.0,
                3 => -1.0,
                _ => 0.0,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    None,
    /// Weight `1 - n/x`.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumSample {
    pub x: f64,
    pub value: f64,
    pub count: u64,
}

/// `n` values `lo·(hi/lo)^{i/(n-1)}`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * (step * i as f64).exp()
            }
        })
        .collect()
}

fn check_range(x: f64, len: usize, what: &str) -> Result<usize> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::validation(format!("{what}: invalid bound {x}")));
    }
    let top = x.floor() as usize;
    if top >= len {
        return Err(Error::precision(
            format!("{what} up to x = {x} needs precision above {top}"),
            len.saturating_sub(1) as u64,
        ));
    }
    Ok(top)
}

/// `S(x) = Σ_{n ≤ x, mask[n]} w(n) a[n]` for every sample, accumulated in
/// ascending `n` with compensated summation.
pub fn partial_sums_from_table(
    a: &[f64],
    mask: &[bool],
    xs: &[f64],
    character: Character,
    smoothing: Smoothing,
) -> Vec<SumSample> {
    xs.par_iter()
        .map(|&x| {
            let top = (x.floor() as usize).min(a.len().saturating_sub(1)).min(mask.len().saturating_sub(1));
            let mut acc = KahanSum::new();
            let mut count = 0u64;
            for n in 1..=top {
                if !mask[n] {
                    continue;
                }
                count += 1;
                let mut w = character.value(n as u64);
                if smoothing == Smoothing::Linear {
                    w *= 1.0 - n as f64 / x;
                }
                if w != 0.0 && a[n] != 0.0 {
                    acc.add(w * a[n]);
                }
            }
            SumSample {
                x,
                value: acc.value(),
                count,
            }
        })
        .collect()
}

/// Partial sums of `a_f(n)` over `n = P_r`.
pub fn partial_sum_series(
    form: &HalfIntegralForm,
    r: u32,
    mode: PrMode,
    xs: &[f64],
    character: Character,
    smoothing: Smoothing,
    sieve: &FactorSieve,
) -> Result<Vec<SumSample>> {
    let xmax = xs.iter().copied().fold(0.0, f64::max);
    let top = check_range(xmax, form.precision(), "partial sums")?;
    let mask = qualify_mask(top.max(1), r, mode, sieve)?;
    Ok(partial_sums_from_table(
        &form.normalized_table(),
        &mask,
        xs,
        character,
        smoothing,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub theta_hat: f64,
    pub intercept: f64,
    /// Sum of squared residuals of the fit.
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
    /// Samples dropped because `S(x) = 0`.
    pub skipped: usize,
}

/// Ordinary least squares through `(u_i, v_i)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::validation(format!(
            "a line fit needs at least two points, got {}",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mu = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / k;
    let suu: f64 = points.iter().map(|p| (p.0 - mu).powi(2)).sum();
    let suv: f64 = points.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    if suu == 0.0 {
        return Err(Error::validation("a line fit needs distinct abscissae"));
    }
    let slope = suv / suu;
    let intercept = mv - slope * mu;
    let residual = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok((slope, intercept, residual))
}

/// Fits `log |S(x)| ≈ θ log x + c`.
pub fn exponent_fit(samples: &[SumSample]) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.value != 0.0)
        .map(|s| (s.x.ln(), s.value.abs().ln()))
        .collect();
    let skipped = samples.len() - points.len();
    if points.is_empty() {
        return Err(Error::validation("exponent fit undefined: every sample is zero"));
    }
    let (theta_hat, intercept, residual) = least_squares(&points)?;
    Ok(ExponentFit {
        theta_hat,
        intercept,
        residual,
        points,
        skipped,
    })
}

/// Geometric intervals `(X^{δ^t}, X^{δ^{t-1}}]`, `t = 1, 2, ...`, down to
/// the first interval whose upper end falls below `floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalSpec {
    pub ratio: f64,
    pub floor: f64,
}

impl Default for IntervalSpec {
    fn default() -> Self {
        Self {
            ratio: 0.9,
            floor: 2.0,
        }
    }
}

impl IntervalSpec {
    pub fn intervals(&self, x: f64) -> Result<Vec<(f64, f64)>> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::validation(format!(
                "interval ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if !(self.floor > 1.0) {
            return Err(Error::validation(format!(
                "interval floor must exceed 1, got {}",
                self.floor
            )));
        }
        let mut out = Vec::new();
        let mut e = 1.0;
        while x.powf(e) >= self.floor {
            out.push((x.powf(e * self.ratio), x.powf(e)));
            e *= self.ratio;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalFlag {
    pub lower: f64,
    pub upper: f64,
    pub changed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignChangeReport {
    pub total_changes: u64,
    /// Consecutive qualifying nonzero terms `(n₁, n₂)` of opposite sign.
    pub change_positions: Vec<(u64, u64)>,
    pub interval_flags: Vec<IntervalFlag>,
}

impl SignChangeReport {
    pub fn intervals_with_change(&self) -> usize {
        self.interval_flags.iter().filter(|f| f.changed).count()
    }
}

/// Scans `2 ≤ n ≤ x` with `mask[n]` and `a[n] ≠ 0` in ascending order.
pub fn sign_changes_from_table(
    a: &[f64],
    mask: &[bool],
    x: f64,
    intervals: &IntervalSpec,
) -> Result<SignChangeReport> {
    let top = check_range(x, a.len().min(mask.len()), "sign-change scan")?;
    let mut change_positions = Vec::new();
    let mut prev: Option<(u64, bool)> = None;
    for n in 2..=top {
        if !mask[n] || a[n] == 0.0 {
            continue;
        }
        let positive = a[n] > 0.0;
        if let Some((m, s)) = prev {
            if s != positive {
                change_positions.push((m, n as u64));
            }
        }
        prev = Some((n as u64, positive));
    }
    let interval_flags = intervals
        .intervals(x)?
        .into_iter()
        .map(|(lower, upper)| IntervalFlag {
            lower,
            upper,
            changed: change_positions
                .iter()
                .any(|&(n1, n2)| n1 as f64 > lower && n2 as f64 <= upper),
        })
        .collect();
    Ok(SignChangeReport {
        total_changes: change_positions.len() as u64,
        change_positions,
        interval_flags,
    })
}

/// Sign changes of `a_f(n)` over `n = P_r`, `n ≤ x`.
pub fn sign_change_count(
    form: &HalfIntegralForm,
    r: u32,
    mode: PrMode,
    x: f64,
    intervals: &IntervalSpec,
    sieve: &FactorSieve,
) -> Result<SignChangeReport> {
    let top = check_range(x, form.precision(), "sign-change scan")?;
    let mask = qualify_mask(top.max(1), r, mode, sieve)?;
    sign_changes_from_table(&form.normalized_table(), &mask, x, intervals)
}

/// Sign changes of `a_f(p)` over primes `p ≤ x`.
pub fn prime_sign_changes(
    form: &HalfIntegralForm,
    x: f64,
    intervals: &IntervalSpec,
    sieve: &FactorSieve,
) -> Result<SignChangeReport> {
    let top = check_range(x, form.precision(), "prime sign-change scan")?;
    if top > sieve.limit() {
        return Err(Error::precision(
            format!("prime scan up to {top} exceeds sieve limit"),
            sieve.limit() as u64,
        ));
    }
    let mask: Vec<bool> = (0..=top).map(|n| sieve.is_prime(n as u64)).collect();
    sign_changes_from_table(&form.normalized_table(), &mask, x, intervals)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub y: f64,
    pub delta: f64,
    pub sum: f64,
    pub ratio: f64,
    pub count: u64,
}

/// `Σ_{Y^δ < n < Y, mask[n]} a[n]²` and its ratio to `Y / log Y`.
pub fn second_moment_from_table(a: &[f64], mask: &[bool], y: f64, delta: f64) -> Result<MomentReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(y > 1.0) {
        return Err(Error::validation(format!("Y must exceed 1, got {y}")));
    }
    let top = check_range(y, a.len().min(mask.len()), "second moment")?;
    let lo = y.powf(delta);
    let mut acc = KahanSum::new();
    let mut count = 0;
    for n in (lo.floor() as usize + 1)..=top {
        let nf = n as f64;
        if nf <= lo || nf >= y || !mask[n] {
            continue;
        }
        count += 1;
        acc.add(a[n] * a[n]);
    }
    let sum = acc.value();
    Ok(MomentReport {
        y,
        delta,
        sum,
        ratio: sum / (y / y.ln()),
        count,
    })
}

pub fn second_moment(
    form: &HalfIntegralForm,
    r: u32,
    mode: PrMode,
    y: f64,
    delta: f64,
    sieve: &FactorSieve,
) -> Result<MomentReport> {
    let top = check_range(y, form.precision(), "second moment")?;
    let mask = qualify_mask(top.max(1), r, mode, sieve)?;
    second_moment_from_table(&form.normalized_table(), &mask, y, delta)
}

/// Exponent below which the sign-change argument goes through unconditionally.
pub const RAMANUJAN_THRESHOLD: f64 = 1.0 / 156.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `(n, max_{m ≤ n} |a(m)|)` at log-spaced checkpoints.
    pub running_max: Vec<(u64, f64)>,
    pub exponent: f64,
    pub threshold: f64,
    pub below_threshold: bool,
}

/// Fits the growth exponent of the running maxima of `|a(n)|`, `1 ≤ n ≤ x`,
/// over `checkpoints` log-spaced values of `n ≥ 10`.
pub fn ramanujan_growth_from_table(a: &[f64], x: f64, checkpoints: usize) -> Result<GrowthReport> {
    let top = check_range(x, a.len(), "growth probe")?;
    if top < 20 {
        return Err(Error::validation(format!("growth probe needs x >= 20, got {x}")));
    }
    let mut marks: Vec<usize> = log_spaced(10.0, top as f64, checkpoints.max(2))
        .into_iter()
        .map(|v| v.round() as usize)
        .collect();
    marks.dedup();
    let mut running_max = Vec::with_capacity(marks.len());
    let mut best = 0.0f64;
    let mut next = 0;
    for (n, v) in a.iter().enumerate().take(top + 1).skip(1) {
        best = best.max(v.abs());
        if next < marks.len() && n == marks[next] {
            running_max.push((n as u64, best));
            next += 1;
        }
    }
    let points: Vec<(f64, f64)> = running_max
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(n, m)| ((n as f64).ln(), m.ln()))
        .collect();
    let (exponent, _, _) = least_squares(&points)?;
    Ok(GrowthReport {
        running_max,
        exponent,
        threshold: RAMANUJAN_THRESHOLD,
        below_threshold: exponent < RAMANUJAN_THRESHOLD,
    })
}

pub fn ramanujan_growth(form: &HalfIntegralForm, x: f64) -> Result<GrowthReport> {
    ramanujan_growth_from_table(&form.normalized_table(), x, 40)
}

/// `P(X)` together with its split along the dyadic Vaughan decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothedP {
    pub x: f64,
    pub total: f64,
    /// `Σ_{Q<n≤X} b_n f̂_n Λ*_R(n)`.
    pub p_r: f64,
    /// `Σ_{Q<n≤X} b_n f̂_n Λ*_{LM}(n)` for every dyadic block.
    pub p_lm: Vec<Vec<f64>>,
    /// Contribution of `n ≤ Q`.
    pub remainder: f64,
    pub reassembly_error: f64,
}

impl SmoothedP {
    pub fn p_lm_sum(&self) -> f64 {
        self.p_lm.iter().flatten().sum()
    }

    pub fn reassembled(&self) -> f64 {
        self.p_r - self.p_lm_sum() + self.remainder
    }
}

/// Relative tolerance on the reassembled split of `P(X)`.
pub const SPLIT_TOLERANCE: f64 = 1e-6;

/// `P(X) = Σ_{n≤X} (1 - n/X) ψ₀(n) c(n) Λ_r(n)` with `ψ₀` the principal
/// character mod 4.
pub fn smoothed_p(
    form: &HalfIntegralForm,
    r: u32,
    x: f64,
    params: &VaughanParams,
    ctx: &LambdaContext,
) -> Result<SmoothedP> {
    let top = check_range(x, form.precision(), "smoothed sum")?;
    if top > ctx.limit() {
        return Err(Error::precision(
            format!("smoothed sum up to {top} exceeds lambda table"),
            ctx.limit() as u64,
        ));
    }
    if x > params.x() {
        return Err(Error::validation(format!(
            "smoothed sum needs X <= QR (X = {x}, QR = {})",
            params.x()
        )));
    }
    let c = form.float_coeffs();
    let weight = |n: usize| (1.0 - n as f64 / x) * Character::Principal4.value(n as u64) * c[n];
    let mut total = KahanSum::new();
    let mut remainder = KahanSum::new();
    let mut p_r = KahanSum::new();
    let mut p_lm: Vec<Vec<KahanSum>> = Vec::new();
    for n in 1..=top {
        let b = weight(n);
        if b == 0.0 {
            continue;
        }
        let lam = ctx.lambda(r, n as u64);
        total.add(b * lam);
        if n as f64 <= params.q() {
            remainder.add(b * lam);
            continue;
        }
        let d = dyadic_decomposition(n as u64, r, params, ctx)?;
        if p_lm.is_empty() {
            p_lm = vec![vec![KahanSum::new(); d.m_blocks.len()]; d.l_blocks.len()];
        }
        p_r.add(b * d.lambda_star_r);
        for (acc_row, row) in p_lm.iter_mut().zip(&d.grid) {
            for (acc, &v) in acc_row.iter_mut().zip(row) {
                if v != 0.0 {
                    acc.add(b * v);
                }
            }
        }
    }
    let mut out = SmoothedP {
        x,
        total: total.value(),
        p_r: p_r.value(),
        p_lm: p_lm
            .iter()
            .map(|row| row.iter().map(KahanSum::value).collect())
            .collect(),
        remainder: remainder.value(),
        reassembly_error: 0.0,
    };
    let scale = out.total.abs().max(f64::MIN_POSITIVE);
    out.reassembly_error = (out.reassembled() - out.total).abs() / scale;
    if out.reassembly_error > SPLIT_TOLERANCE {
        return Err(Error::assertion(format!(
            "split of P(X) reassembles with relative error {}",
            out.reassembly_error
        )));
    }
    Ok(out)
}

/// Writer that always emits the header row, even for empty tables.
pub(crate) fn csv_writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

#[derive(Serialize)]
struct PartialSumRow {
    x: f64,
    #[serde(rename = "S")]
    s: f64,
    count: u64,
    theta_hat: Option<f64>,
}

/// Columns `x, S, count, theta_hat`; the last is the fit over the samples
/// so far, empty until two nonzero samples are available.
pub fn write_partial_sums<W: Write>(w: W, samples: &[SumSample]) -> Result<()> {
    let mut out = csv_writer(w, &["x", "S", "count", "theta_hat"])?;
    for i in 0..samples.len() {
        let theta_hat = exponent_fit(&samples[..=i]).ok().map(|f| f.theta_hat);
        out.serialize(PartialSumRow {
            x: samples[i].x,
            s: samples[i].value,
            count: samples[i].count,
            theta_hat,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SignRow {
    n1: u64,
    n2: u64,
    sign1: i8,
    sign2: i8,
}

/// Columns `n1, n2, sign1, sign2`.
pub fn write_sign_changes<W: Write>(w: W, report: &SignChangeReport, a: &[f64]) -> Result<()> {
    let mut out = csv_writer(w, &["n1", "n2", "sign1", "sign2"])?;
    let sign = |n: u64| if a[n as usize] > 0.0 { 1 } else { -1 };
    for &(n1, n2) in &report.change_positions {
        out.serialize(SignRow {
            n1,
            n2,
            sign1: sign(n1),
            sign2: sign(n2),
        })?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MomentRow {
    #[serde(rename = "Y")]
    y: f64,
    delta: f64,
    sum: f64,
    ratio: f64,
}

/// Columns `Y, delta, sum, ratio`.
pub fn write_moments<W: Write>(w: W, rows: &[MomentReport]) -> Result<()> {
    let mut out = csv_writer(w, &["Y", "delta", "sum", "ratio"])?;
    for m in rows {
        out.serialize(MomentRow {
            y: m.y,
            delta: m.delta,
            sum: m.sum,
            ratio: m.ratio,
        })?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(n: usize) -> Vec<bool> {
        (0..n).map(|i| i >= 2).collect()
    }

    #[test]
    fn zeros_are_skipped_in_sign_scan() {
        let a = [0.0, 0.0, 1.0, 0.0, -2.0, 3.0];
        let r = sign_changes_from_table(&a, &all(6), 5.0, &IntervalSpec::default()).unwrap();
        assert_eq!(r.total_changes, 2);
        assert_eq!(r.change_positions, vec![(2, 4), (4, 5)]);
    }

    #[test]
    fn constant_sign_has_no_changes() {
        let a = vec![1.0; 100];
        let r = sign_changes_from_table(&a, &all(100), 99.0, &IntervalSpec::default()).unwrap();
        assert_eq!(r.total_changes, 0);
        assert_eq!(r.intervals_with_change(), 0);
    }

    #[test]
    fn positive_sums_match_absolute_sums() {
        let a: Vec<f64> = (0..50).map(|n| (n as f64).sqrt()).collect();
        let s = partial_sums_from_table(&a, &all(50), &[49.0], Character::None, Smoothing::None);
        let direct: f64 = (2..50).map(|n| a[n].abs()).sum();
        assert!((s[0].value - direct).abs() < 1e-12 * direct);
        assert_eq!(s[0].count, 48);
        let s = partial_sums_from_table(&a, &all(50), &[1.5], Character::None, Smoothing::None);
        assert_eq!((s[0].value, s[0].count), (0.0, 0));
    }

    #[test]
    fn characters_and_smoothing() {
        let a = vec![1.0; 20];
        let s = partial_sums_from_table(&a, &all(20), &[10.0], Character::Principal4, Smoothing::None);
        assert_eq!(s[0].value, 4.0); // 3, 5, 7, 9
        let s = partial_sums_from_table(&a, &all(20), &[10.0], Character::Nonprincipal4, Smoothing::None);
        assert_eq!(s[0].value, 0.0); // -1 + 1 - 1 + 1
        let s = partial_sums_from_table(&a, &all(20), &[4.0], Character::None, Smoothing::Linear);
        assert!((s[0].value - 0.75).abs() < 1e-15); // (1 - 2/4) + (1 - 3/4)
    }

    #[test]
    fn two_point_fit_is_exact() {
        let s = [
            SumSample { x: 10.0, value: 10f64.powf(0.5), count: 1 },
            SumSample { x: 100.0, value: 10.0, count: 1 },
        ];
        let f = exponent_fit(&s).unwrap();
        assert!((f.theta_hat - 0.5).abs() < 1e-14);
        assert!(f.residual < 1e-25);
    }

    #[test]
    fn fit_edge_cases() {
        let flat: Vec<SumSample> = (1..10)
            .map(|i| SumSample { x: i as f64 * 10.0, value: -3.0, count: 0 })
            .collect();
        assert!(exponent_fit(&flat).unwrap().theta_hat.abs() < 1e-14);
        let zero: Vec<SumSample> = flat.iter().map(|s| SumSample { value: 0.0, ..*s }).collect();
        assert!(matches!(exponent_fit(&zero), Err(Error::Validation(_))));
        let mut mixed = flat.clone();
        mixed[3].value = 0.0;
        assert_eq!(exponent_fit(&mixed).unwrap().skipped, 1);
    }

    #[test]
    fn second_moment_edges() {
        let a = vec![1.0; 200];
        let m = second_moment_from_table(&a, &all(200), 2.0, 0.99).unwrap();
        assert_eq!((m.sum, m.count), (0.0, 0));
        let m = second_moment_from_table(&a, &all(200), 100.0, 0.5).unwrap();
        assert_eq!(m.count, 89); // 11..=99
        assert!(second_moment_from_table(&a, &all(200), 100.0, 1.0).is_err());
        assert!(matches!(
            second_moment_from_table(&a, &all(200), 500.0, 0.5),
            Err(Error::Precision { max_usable: 199, .. })
        ));
    }

    #[test]
    fn intervals_are_geometric_and_nested() {
        let iv = IntervalSpec::default().intervals(1e5).unwrap();
        assert_eq!(iv[0].1, 1e5);
        for w in iv.windows(2) {
            assert!((w[0].0 - w[1].1).abs() < 1e-9 * w[0].0);
        }
        assert!(iv.last().unwrap().1 >= 2.0);
        assert!(IntervalSpec { ratio: 1.0, floor: 2.0 }.intervals(10.0).is_err());
    }

    #[test]
    fn growth_of_pure_powers() {
        let a: Vec<f64> = (0..100_000).map(|n| (n as f64).powf(0.1)).collect();
        let g = ramanujan_growth_from_table(&a, 99_999.0, 40).unwrap();
        assert!((g.exponent - 0.1).abs() < 1e-9);
        assert!(!g.below_threshold);
        let a = vec![2.5; 5000];
        let g = ramanujan_growth_from_table(&a, 4999.0, 30).unwrap();
        assert!(g.exponent.abs() < 1e-12);
        assert!(g.below_threshold);
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        let s = [
            SumSample { x: 10.0, value: 2.0, count: 3 },
            SumSample { x: 100.0, value: 4.0, count: 20 },
        ];
        write_partial_sums(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,S,count,theta_hat"));
        assert_eq!(lines.next(), Some("10.0,2.0,3,"));
        assert!(lines.next().unwrap().starts_with("100.0,4.0,20,0.30102999"));

        let mut buf = Vec::new();
        write_moments(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "Y,delta,sum,ratio\n");
    }
}
