use std::sync::OnceLock;

use halfint_core::forms::{
    build_plus_cusp_form, build_with_horizon, eigenvalue_check, hecke_tp2, plus_space_forbidden,
    HalfIntegralForm, ShimuraLiftOracle,
};
use halfint_core::qseries::{eta_product, series_mul, theta_series, EtaSpec};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

fn form_5000() -> &'static HalfIntegralForm {
    static F: OnceLock<HalfIntegralForm> = OnceLock::new();
    F.get_or_init(|| build_plus_cusp_form(6, 5000).unwrap())
}

fn tau_10k() -> &'static ShimuraLiftOracle {
    static T: OnceLock<ShimuraLiftOracle> = OnceLock::new();
    T.get_or_init(|| ShimuraLiftOracle::new(10_001))
}

#[test]
fn theta_squared_counts_lattice_points() {
    let n = 10_000usize;
    let t = theta_series(n);
    let sq = series_mul(&t, &t);
    let mut r2 = vec![0i64; n];
    let m = (n as f64).sqrt() as i64 + 1;
    for a in -m..=m {
        for b in -m..=m {
            let v = (a * a + b * b) as usize;
            if v < n {
                r2[v] += 1;
            }
        }
    }
    for (k, expect) in r2.iter().enumerate() {
        assert_eq!(sq.coeff(k), &BigInt::from(*expect), "n = {k}");
    }
}

/// `Δ = q (Σ_k (-1)^k (2k+1) q^{k(k+1)/2})^8` by Jacobi's identity for `η³`.
fn delta_via_jacobi(n: usize) -> Vec<i128> {
    let mut s = vec![0i128; n];
    let mut k = 0usize;
    while k * (k + 1) / 2 < n {
        s[k * (k + 1) / 2] = if k % 2 == 0 { 1 } else { -1 } * (2 * k + 1) as i128;
        k += 1;
    }
    let mul = |a: &[i128], b: &[i128]| {
        let mut c = vec![0i128; n];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b[..n - i].iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        c
    };
    let s2 = mul(&s, &s);
    let s4 = mul(&s2, &s2);
    let s8 = mul(&s4, &s4);
    let mut out = vec![0i128; n];
    out[1..].copy_from_slice(&s8[..n - 1]);
    out
}

#[test]
fn delta_oracle_agrees_with_jacobi_and_is_multiplicative() {
    let n = 10_001;
    let jac = delta_via_jacobi(n);
    let tau = tau_10k();
    for (k, &j) in jac.iter().enumerate() {
        assert_eq!(tau.tau(k), &BigInt::from(j), "n = {k}");
    }
    let tau_i = |k: usize| jac[k];
    for a in 2..=100usize {
        for b in 2..=(10_000 / a) {
            if num_integer::gcd(a, b) == 1 {
                assert_eq!(tau_i(a * b), tau_i(a) * tau_i(b), "{a}·{b}");
            }
        }
    }
    // Hecke relation at prime squares: τ(p²) = τ(p)² - p^11
    for p in [2i128, 3, 5, 7, 11, 13] {
        let t = tau_i(p as usize);
        assert_eq!(tau_i((p * p) as usize), t * t - p.pow(11));
    }
}

#[test]
fn eta_products_with_scale() {
    // η(2z)^12 = q ∏ (1 - q^{2n})^12
    let s = eta_product(EtaSpec::new(2, 12).unwrap(), 40);
    assert!(EtaSpec::new(1, 12).is_err());
    let mut naive = vec![BigInt::zero(); 40];
    naive[1] = BigInt::from(1);
    for k in 1..20usize {
        for _ in 0..12 {
            for i in (2 * k..40).rev() {
                let prev = naive[i - 2 * k].clone();
                naive[i] -= prev;
            }
        }
    }
    assert_eq!(s.coeffs(), &naive[..]);
}

#[test]
fn hecke_certification_at_5000() {
    let f = form_5000();
    let tau = tau_10k();
    for (p, lambda, min_checked) in [(2u64, -24i64, 100usize), (3, 252, 100), (5, 4830, 20), (7, -16744, 20)] {
        let rep = eigenvalue_check(f, p, tau).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.eigenvalue, lambda.to_string());
        assert!(rep.checked >= min_checked);
    }
    // higher primes on the shorter range still certify
    for p in [11u64, 13] {
        assert!(eigenvalue_check(f, p, tau).unwrap().passed);
    }
    let b = hecke_tp2(f, 3).unwrap();
    assert_eq!(b.precision(), 5000 / 9);
}

#[test]
fn plus_support_on_every_coefficient() {
    let f = form_5000();
    for n in 0..f.precision() {
        if n == 0 || plus_space_forbidden(6, n) {
            assert!(f.coeff(n).is_zero(), "n = {n}");
        }
    }
}

#[test]
fn construction_is_scaling_invariant() {
    let small = build_plus_cusp_form(6, 1000).unwrap();
    let wide = build_with_horizon(6, 2500, Some(400)).unwrap();
    for n in 0..1000 {
        assert_eq!(small.coeff(n), wide.coeff(n));
        assert_eq!(small.coeff(n), form_5000().coeff(n));
    }
}

#[test]
fn normalized_coefficients_stay_in_an_envelope() {
    let f = form_5000();
    let a = f.normalized_table();
    let c = (1..f.precision())
        .map(|n| a[n].abs() / (n as f64).powf(0.3))
        .fold(0.0, f64::max);
    println!("sup |a_f(n)| / n^0.3 over n < 5000: {c:.4}");
    assert!(c.is_finite() && c < 10.0);
    assert_eq!(a[1], 1.0);
    assert_eq!(f.coeff(4).to_i64(), Some(-56));
}
