//! Small integer helpers shared by the Hecke operators and the twisted
//! L-functions.

/// Jacobi symbol `(a|n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a|n)` for `n ≥ 0`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let twos = n.trailing_zeros();
    let odd = n >> twos;
    let mut result = 1;
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a|2) = 1 for a ≡ ±1 (mod 8), -1 for a ≡ ±3 (mod 8)
        let two = match a.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
        if twos % 2 == 1 {
            result = two;
        }
    }
    if odd == 1 {
        result
    } else {
        result * jacobi(a, odd)
    }
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut n = n;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return false;
            }
        }
        d += 1;
    }
    true
}

/// Fundamental discriminants: `D ≡ 1 (mod 4)` squarefree with `D ≠ 1`, or
/// `D = 4m` with `m ≡ 2, 3 (mod 4)` squarefree.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
