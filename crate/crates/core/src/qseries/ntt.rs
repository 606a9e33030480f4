//! Exact multiplication of big-integer coefficient sequences by number
//! theoretic transforms over several word-size primes, followed by Garner
//! reconstruction.
//!
//! All primes have the form `c * 2^MAX_LOG_LEN + 1` and lie below `2^31`, so
//! products of two residues fit in a `u64` without widening.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_traits::Zero;
use rayon::prelude::*;

/// Largest supported transform length is `2^MAX_LOG_LEN`.
pub const MAX_LOG_LEN: u32 = 21;

#[derive(Debug, Clone, Copy)]
struct NttPrime {
    p: u64,
    root: u64,
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn is_prime_u64(n: u64) -> bool {
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

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn primitive_root(p: u64) -> u64 {
    let factors = distinct_prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("every prime has a primitive root")
}

/// NTT-friendly primes in descending order.
fn primes() -> &'static [NttPrime] {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let step = 1u64 << MAX_LOG_LEN;
        let mut c = ((1u64 << 31) - 1) / step;
        let mut out = Vec::new();
        while c > 0 {
            let p = c * step + 1;
            if is_prime_u64(p) {
                out.push(NttPrime {
                    p,
                    root: primitive_root(p),
                });
            }
            c -= 1;
        }
        out
    })
}

/// Number of bits representable by the full prime set, minus a sign bit.
pub fn max_supported_bits() -> u64 {
    primes()
        .iter()
        .map(|q| (q.p as f64).log2().floor() as u64)
        .sum::<u64>()
        - 1
}

fn ntt_in_place(a: &mut [u64], prime: NttPrime, invert: bool) {
    let n = a.len();
    let p = prime.p;
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(prime.root, (p - 1) / len as u64, p);
        if invert {
            w_len = pow_mod(w_len, p - 2, p);
        }
        let half = len / 2;
        // twiddles for this stage
        let mut tw = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            tw.push(w);
            w = w * w_len % p;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = hi[k] * tw[k] % p;
                lo[k] = if u + v >= p { u + v - p } else { u + v };
                hi[k] = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * n_inv % p;
        }
    }
}

fn residue(x: &BigInt, p: u64) -> u64 {
    let (sign, digits) = x.to_u64_digits();
    let mut r: u128 = 0;
    let p128 = p as u128;
    for &d in digits.iter().rev() {
        r = ((r << 64) | d as u128) % p128;
    }
    let r = r as u64;
    if sign == Sign::Minus && r != 0 {
        p - r
    } else {
        r
    }
}

fn bit_len(xs: &[BigInt]) -> u64 {
    xs.iter().map(|x| x.bits()).max().unwrap_or(0)
}

/// Returns the first `out_len` coefficients of the product of `a` and `b`,
/// or `None` when the request exceeds the supported transform length or
/// coefficient size.
pub fn mul_truncated(a: &[BigInt], b: &[BigInt], out_len: usize) -> Option<Vec<BigInt>> {
    if out_len == 0 || a.is_empty() || b.is_empty() {
        return Some(vec![BigInt::zero(); out_len]);
    }
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    let full = a.len() + b.len() - 1;
    let len = full.next_power_of_two();
    if len > 1usize << MAX_LOG_LEN {
        return None;
    }
    let terms = a.len().min(b.len()) as u64;
    let need_bits = bit_len(a) + bit_len(b) + 64 - terms.leading_zeros() as u64 + 2;
    if need_bits > max_supported_bits() {
        return None;
    }

    let mut chosen = Vec::new();
    let mut have = 0.0f64;
    for q in primes() {
        if have > need_bits as f64 {
            break;
        }
        chosen.push(*q);
        have += (q.p as f64).log2();
    }

    let same = std::ptr::eq(a.as_ptr(), b.as_ptr()) && a.len() == b.len();
    let residues: Vec<Vec<u64>> = chosen
        .par_iter()
        .map(|&q| {
            let mut fa = vec![0u64; len];
            for (dst, x) in fa.iter_mut().zip(a) {
                *dst = residue(x, q.p);
            }
            ntt_in_place(&mut fa, q, false);
            if same {
                for x in fa.iter_mut() {
                    *x = *x * *x % q.p;
                }
            } else {
                let mut fb = vec![0u64; len];
                for (dst, x) in fb.iter_mut().zip(b) {
                    *dst = residue(x, q.p);
                }
                ntt_in_place(&mut fb, q, false);
                for (x, y) in fa.iter_mut().zip(&fb) {
                    *x = *x * *y % q.p;
                }
            }
            ntt_in_place(&mut fa, q, true);
            fa.truncate(out_len.min(full));
            fa
        })
        .collect();

    Some(garner(&chosen, &residues, out_len))
}

/// Mixed-radix reconstruction into the symmetric range `(-M/2, M/2]`.
fn garner(chosen: &[NttPrime], residues: &[Vec<u64>], out_len: usize) -> Vec<BigInt> {
    let k = chosen.len();
    // inv[i][j] = p_j^{-1} mod p_i for j < i
    let inv: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            (0..i)
                .map(|j| pow_mod(chosen[j].p % chosen[i].p, chosen[i].p - 2, chosen[i].p))
                .collect()
        })
        .collect();
    let modulus = chosen
        .iter()
        .fold(BigInt::from(1u8), |acc, q| acc * BigInt::from(q.p));
    let half = &modulus >> 1usize;
    let available = residues[0].len();

    (0..out_len)
        .into_par_iter()
        .map(|idx| {
            if idx >= available {
                return BigInt::zero();
            }
            let mut digits = vec![0u64; k];
            for i in 0..k {
                let p = chosen[i].p;
                let mut x = residues[i][idx];
                for j in 0..i {
                    let d = digits[j] % p;
                    x = if x >= d { x - d } else { x + p - d };
                    x = x * inv[i][j] % p;
                }
                digits[i] = x;
            }
            let mut value = BigInt::from(digits[k - 1]);
            for i in (0..k - 1).rev() {
                value = value * chosen[i].p + digits[i];
            }
            if value > half {
                value -= &modulus;
            }
            value
        })
        .collect()
}
