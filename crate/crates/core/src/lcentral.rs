//! Central values `L(1/2, Δ ⊗ χ_D)` by a smoothed approximate functional
//! equation.
//!
//! With `λ(n) = τ(n) n^{-11/2}` and `χ_D` primitive of conductor `|D|`, the
//! completed function `(|D|/2π)^s Γ(s + 11/2) L(s, Δ⊗χ_D)` has root number
//! `ε = χ_D(-1)`. For any balance `A > 0`,
//!
//! ```text
//! L(1/2) = Σ λ(n)χ_D(n) n^{-1/2} [ V(2πn / (A|D|)) + ε V(2πnA / |D|) ]
//! V(y)   = (1/2πi) ∫_{(c)} Γ(6 + u)/Γ(6) G(u) y^{-u} du/u
//! ```
//!
//! Two kernels are implemented: `G = 1`, where `V(y) = Γ(6, y)/Γ(6)` is
//! evaluated by adaptive Gauss–Legendre quadrature, and `G(u) = e^{σ²u²/2}`,
//! evaluated by the trapezoidal rule on the vertical line.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_fundamental_discriminant, kronecker};
use crate::error::{Error, Result};
use crate::experiments::csv_writer;
use crate::forms::{HalfIntegralForm, ShimuraLiftOracle};
use crate::sieve::FactorSieve;

/// Truncation heuristic: `T ≥ TRUNCATION_FACTOR·|D|`.
pub const TRUNCATION_FACTOR: usize = 30;

/// `χ_D(n)`, the Kronecker symbol `(D | n)`.
pub fn kronecker_chi(d: i64, n: u64) -> i32 {
    if d == 1 {
        return 1;
    }
    kronecker(d, n)
}

/// `χ_D(-1)`, the sign of `D`.
pub fn root_number(d: i64) -> i32 {
    if d < 0 {
        -1
    } else {
        1
    }
}

/// Normalized coefficients `λ(n) = τ(n)/n^{11/2}` of the lift, `λ(0) = 0`.
#[derive(Clone, Debug)]
pub struct LiftCoefficients {
    lambda: Vec<f64>,
}

impl LiftCoefficients {
    pub fn new(oracle: &ShimuraLiftOracle) -> Self {
        let lambda = oracle
            .table()
            .iter()
            .enumerate()
            .map(|(n, t)| {
                if n == 0 {
                    0.0
                } else {
                    t.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(5.5)
                }
            })
            .collect();
        Self { lambda }
    }

    /// Table covering `n < len`.
    pub fn with_len(len: usize) -> Self {
        Self::new(&ShimuraLiftOracle::new(len))
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TwistedLSpec<'a> {
    coeffs: &'a LiftCoefficients,
    d: i64,
}

impl<'a> TwistedLSpec<'a> {
    pub fn new(coeffs: &'a LiftCoefficients, d: i64) -> Result<Self> {
        if d != 1 && !is_fundamental_discriminant(d) {
            return Err(Error::validation(format!(
                "{d} is not a fundamental discriminant"
            )));
        }
        Ok(Self { coeffs, d })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// Weight of the lift.
    pub fn kappa(&self) -> u32 {
        12
    }

    /// `|D|² N_g` with `N_g = 1`.
    pub fn conductor(&self) -> u64 {
        self.d.unsigned_abs().pow(2)
    }

    pub fn root_number(&self) -> i32 {
        root_number(self.d)
    }

    pub fn min_truncation(&self) -> usize {
        TRUNCATION_FACTOR * self.d.unsigned_abs() as usize
    }
}

/// Cut-off function `V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// `G = 1`: `V(y) = Γ(6, y)/Γ(6)`.
    IncompleteGamma,
    /// `G(u) = exp(σ²u²/2)`.
    Gaussian { sigma: f64 },
}

impl Kernel {
    pub const GAUSSIAN: Kernel = Kernel::Gaussian { sigma: 0.1 };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CentralOptions {
    pub truncation: usize,
    pub kernel: Kernel,
    pub balance: f64,
}

impl CentralOptions {
    pub fn new(truncation: usize) -> Self {
        Self {
            truncation,
            kernel: Kernel::IncompleteGamma,
            balance: 1.0,
        }
    }

    pub fn kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn balance(mut self, balance: f64) -> Self {
        self.balance = balance;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CentralValue {
    pub value: f64,
    /// Imaginary part left over by the kernel evaluation; zero for the
    /// real-valued quadrature.
    pub imag: f64,
    pub truncation: usize,
    pub error_estimate: f64,
    pub root_number: i32,
}

impl CentralValue {
    /// Odd functional equation: the value vanishes.
    pub fn forced_zero(&self) -> bool {
        self.root_number == -1
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * gl16().iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Adaptive Gauss–Legendre integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = (a + b) / 2.0;
        let (l, r) = (gl_panel(f, a, m), gl_panel(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= tol {
            l + r
        } else {
            step(f, a, m, l, tol / 2.0, depth - 1) + step(f, m, b, r, tol / 2.0, depth - 1)
        }
    }
    step(&f, a, b, gl_panel(&f, a, b), tol, 40)
}

/// Length of the integration window beyond `y` in [`gamma_kernel`].
pub const GAMMA_WINDOW: f64 = 80.0;

/// Absolute quadrature tolerance for the kernels.
pub const KERNEL_TOLERANCE: f64 = 1e-12;

/// `Q(6, y) = Γ(6, y)/Γ(6) = ∫_y^∞ t^5 e^{-t} dt / 120`, integrating over
/// `[y, y + 80]`.
pub fn gamma_kernel(y: f64) -> f64 {
    if y > 700.0 {
        return 0.0;
    }
    let f = |t: f64| (5.0 * t.ln() - t).exp() / 120.0;
    integrate(f, y, y + GAMMA_WINDOW, KERNEL_TOLERANCE)
}

/// Closed form `e^{-y} Σ_{j≤5} y^j / j!`.
pub fn gamma_kernel_closed(y: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=5 {
        term *= y / j as f64;
        sum += term;
    }
    (-y).exp() * sum
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Γ(z)` for `Re z > 1/2` by the Lanczos approximation.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Trapezoidal discretization of the contour integral on `Re u = c`.
#[derive(Clone, Debug)]
pub struct ContourKernel {
    c: f64,
    nodes: Vec<(f64, Complex64)>,
}

impl ContourKernel {
    pub fn gaussian(sigma: f64) -> Self {
        let (c, h, t_max) = (1.0, 0.05, 80.0);
        let steps = (t_max / h) as i64;
        let ln_g6 = (120f64).ln();
        let nodes = (-steps..=steps)
            .map(|k| {
                let t = k as f64 * h;
                let u = Complex64::new(c, t);
                let w = (ln_gamma(u + 6.0) - ln_g6 + sigma * sigma * u * u / 2.0).exp() / u;
                (t, w * h / (2.0 * PI))
            })
            .collect();
        Self { c, nodes }
    }

    /// `V(y)` as a complex number; the imaginary part measures quadrature
    /// asymmetry.
    pub fn eval(&self, y: f64) -> Complex64 {
        let ly = y.ln();
        let scale = (-self.c * ly).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(t, w) in &self.nodes {
            acc += w * Complex64::from_polar(1.0, -t * ly);
        }
        acc * scale
    }
}

fn gaussian_kernel(sigma: f64) -> &'static ContourKernel {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(u64, &'static ContourKernel)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("kernel cache poisoned");
    if let Some(&(_, k)) = guard.iter().find(|(bits, _)| *bits == sigma.to_bits()) {
        return k;
    }
    let k: &'static ContourKernel = Box::leak(Box::new(ContourKernel::gaussian(sigma)));
    guard.push((sigma.to_bits(), k));
    k
}

/// Kernel argument beyond which both kernels are below `1e-25`.
const KERNEL_CUTOFF: f64 = 90.0;

fn kernel_value(kernel: Kernel, y: f64) -> Complex64 {
    if y > KERNEL_CUTOFF {
        return Complex64::new(0.0, 0.0);
    }
    match kernel {
        Kernel::IncompleteGamma => Complex64::new(gamma_kernel(y), 0.0),
        Kernel::Gaussian { sigma } => gaussian_kernel(sigma).eval(y),
    }
}

/// `∫_z^∞ Q(6, u) du = e^{-z} Σ_{j≤5} Σ_{i≤j} z^i / i!`.
fn gamma_kernel_tail(z: f64) -> f64 {
    let mut term = 1.0;
    let mut partial = 1.0;
    let mut total = 1.0;
    for i in 1..=5 {
        term *= z / i as f64;
        partial += term;
        total += partial;
    }
    (-z).exp() * total
}

/// Bound on the omitted terms `n > T` using `|λ(n)| n^{-1/2} ≤ d(n) n^{-1/2} ≤ 2`.
fn tail_bound(kernel: Kernel, alphas: [f64; 2], t: usize) -> f64 {
    alphas
        .iter()
        .map(|&a| match kernel {
            Kernel::IncompleteGamma => 2.0 * gamma_kernel_tail(a * t as f64) / a,
            Kernel::Gaussian { .. } => {
                let mut s = 0.0;
                for n in (t + 1)..=(8 * t) {
                    let v = kernel_value(kernel, a * n as f64).norm();
                    if v == 0.0 {
                        break;
                    }
                    s += 2.0 * v;
                }
                s
            }
        })
        .sum()
}

pub fn central_value(spec: &TwistedLSpec<'_>, opts: &CentralOptions) -> Result<CentralValue> {
    let t = opts.truncation;
    if t < spec.min_truncation() {
        return Err(Error::validation(format!(
            "truncation {t} below the heuristic {} for D = {}",
            spec.min_truncation(),
            spec.d
        )));
    }
    if t >= spec.coeffs.len() {
        return Err(Error::precision(
            format!("central value for D = {} needs tau up to T = {t}", spec.d),
            spec.coeffs.len().saturating_sub(1) as u64,
        ));
    }
    if !(opts.balance > 0.0 && opts.balance.is_finite()) {
        return Err(Error::validation(format!(
            "balance must be positive, got {}",
            opts.balance
        )));
    }
    let eps = spec.root_number() as f64;
    let dabs = spec.d.unsigned_abs() as f64;
    let alphas = [
        2.0 * PI / (opts.balance * dabs),
        2.0 * PI * opts.balance / dabs,
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for n in 1..=t {
        let chi = kronecker_chi(spec.d, n as u64);
        if chi == 0 {
            continue;
        }
        let y1 = alphas[0] * n as f64;
        let y2 = alphas[1] * n as f64;
        if y1 > KERNEL_CUTOFF && y2 > KERNEL_CUTOFF {
            break;
        }
        let k1 = kernel_value(opts.kernel, y1);
        let k2 = if opts.balance == 1.0 {
            k1
        } else {
            kernel_value(opts.kernel, y2)
        };
        let coeff = spec.coeffs.lambda(n) * chi as f64 / (n as f64).sqrt();
        // compensated complex accumulation
        let term = (k1 + eps * k2) * coeff;
        let y = term - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
    }
    let error_estimate = tail_bound(opts.kernel, alphas, t) + 1e-12;
    Ok(CentralValue {
        value: acc.re,
        imag: acc.im,
        truncation: t,
        error_estimate,
        root_number: spec.root_number(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaldspurgerRow {
    pub d: i64,
    pub l_value: f64,
    pub error_estimate: f64,
    pub a_f_sq: f64,
    /// `a_f(D)² D^{power} / L`, absent when `L` is below the inclusion
    /// threshold.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaldspurgerScan {
    pub d_power: f64,
    pub min_l: f64,
    pub rows: Vec<WaldspurgerRow>,
    pub max_over_min: f64,
}

/// Positive fundamental discriminants `≤ d_max`, preceded by `1`.
pub fn positive_discriminants(d_max: u64) -> Vec<i64> {
    std::iter::once(1)
        .chain((2..=d_max as i64).filter(|&d| is_fundamental_discriminant(d)))
        .collect()
}

/// Ratios `a_f(D)² D^{d_power} / L(1/2, Δ⊗χ_D)` over `D ≤ d_max`, keeping
/// rows with `L ≥ min_l` in the statistics.
pub fn waldspurger_ratio_scan(
    form: &HalfIntegralForm,
    coeffs: &LiftCoefficients,
    d_max: u64,
    d_power: f64,
    min_l: f64,
    kernel: Kernel,
) -> Result<WaldspurgerScan> {
    if d_max as usize >= form.precision() {
        return Err(Error::precision(
            format!("Waldspurger scan up to D = {d_max} needs form coefficients"),
            form.precision().saturating_sub(1) as u64,
        ));
    }
    let rows = positive_discriminants(d_max)
        .into_par_iter()
        .map(|d| {
            let spec = TwistedLSpec::new(coeffs, d)?;
            let cv = central_value(&spec, &CentralOptions::new(spec.min_truncation().max(60)).kernel(kernel))?;
            let a = form.normalized_coeff(d as usize)?;
            let a_f_sq = a * a;
            let ratio = (cv.value >= min_l).then(|| a_f_sq * (d as f64).powf(d_power) / cv.value);
            Ok(WaldspurgerRow {
                d,
                l_value: cv.value,
                error_estimate: cv.error_estimate,
                a_f_sq,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WaldspurgerScan {
        d_power,
        min_l,
        rows,
        max_over_min: if ratios.is_empty() { f64::NAN } else { max / min },
    })
}

/// Exponents `ε` of the reference curves `p^{-ε}`.
pub const SIEGEL_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];

/// Values with `|L|` below this are treated as vanishing.
pub const ZERO_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SiegelRow {
    pub p: u64,
    pub l_value: f64,
    pub error_estimate: f64,
    pub reference: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiegelReport {
    pub rows: Vec<SiegelRow>,
    pub min_nonzero: Option<(u64, f64)>,
    /// For each `ε`, whether every nonzero value exceeds `p^{-ε}`.
    pub above_reference: [bool; 3],
}

/// Central values at primes `p ≡ 1 mod 4`, `p ≤ p_max`.
pub fn siegel_probe(coeffs: &LiftCoefficients, p_max: u64, kernel: Kernel) -> Result<SiegelReport> {
    if p_max < 5 {
        return Err(Error::validation(format!("Siegel probe needs P >= 5, got {p_max}")));
    }
    let sieve = FactorSieve::new(p_max as usize)?;
    let primes: Vec<u64> = sieve.primes().filter(|p| p % 4 == 1).collect();
    let rows = primes
        .into_par_iter()
        .map(|p| {
            let spec = TwistedLSpec::new(coeffs, p as i64)?;
            let cv = central_value(&spec, &CentralOptions::new(spec.min_truncation()).kernel(kernel))?;
            Ok(SiegelRow {
                p,
                l_value: cv.value,
                error_estimate: cv.error_estimate,
                reference: SIEGEL_EPSILONS.map(|e| (p as f64).powf(-e)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let nonzero: Vec<&SiegelRow> = rows.iter().filter(|r| r.l_value.abs() >= ZERO_THRESHOLD).collect();
    let min_nonzero = nonzero
        .iter()
        .map(|r| (r.p, r.l_value.abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let mut above_reference = [true; 3];
    for (i, flag) in above_reference.iter_mut().enumerate() {
        *flag = nonzero.iter().all(|r| r.l_value.abs() > r.reference[i]);
    }
    Ok(SiegelReport {
        rows,
        min_nonzero,
        above_reference,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `D, L_value, error_estimate, a_f_sq, ratio`.
pub fn write_waldspurger<W: Write>(w: W, scan: &WaldspurgerScan) -> Result<()> {
    let mut out = csv_writer(w, &["D", "L_value", "error_estimate", "a_f_sq", "ratio"])?;
    for r in &scan.rows {
        out.write_record([
            r.d.to_string(),
            r.l_value.to_string(),
            r.error_estimate.to_string(),
            r.a_f_sq.to_string(),
            fmt_opt(r.ratio),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `p, L_value, error_estimate, ref_eps_0.05, ref_eps_0.1, ref_eps_0.2`.
pub fn write_siegel<W: Write>(w: W, report: &SiegelReport) -> Result<()> {
    let mut out = csv_writer(
        w,
        &["p", "L_value", "error_estimate", "ref_eps_0.05", "ref_eps_0.1", "ref_eps_0.2"],
    )?;
    for r in &report.rows {
        out.write_record([
            r.p.to_string(),
            r.l_value.to_string(),
            r.error_estimate.to_string(),
            r.reference[0].to_string(),
            r.reference[1].to_string(),
            r.reference[2].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
