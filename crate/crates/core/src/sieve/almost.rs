//! Almost-primes: integers with a bounded number of prime factors.

use super::FactorSieve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrMode {
    /// `ω(n) ≤ r`.
    Distinct,
    /// `Ω(n) ≤ r`.
    WithMultiplicity,
}

/// `mask[n]` is true when `2 ≤ n ≤ x` has at most `r` prime factors in the
/// chosen count.
pub fn qualify_mask(x: usize, r: u32, mode: PrMode, sieve: &FactorSieve) -> Result<Vec<bool>> {
    if r == 0 {
        return Err(Error::validation("almost-prime order must be at least 1"));
    }
    if x > sieve.limit() {
        return Err(Error::precision(
            format!("almost-prime range {x} exceeds sieve limit"),
            sieve.limit() as u64,
        ));
    }
    let counts = match mode {
        PrMode::Distinct => sieve.omega_table(x),
        PrMode::WithMultiplicity => sieve.big_omega_table(x),
    };
    Ok(counts
        .iter()
        .enumerate()
        .map(|(n, &c)| n >= 2 && u32::from(c) <= r)
        .collect())
}

pub fn almost_primes(x: usize, r: u32, mode: PrMode, sieve: &FactorSieve) -> Result<Vec<u64>> {
    Ok(qualify_mask(x, r, mode, sieve)?
        .iter()
        .enumerate()
        .filter(|(_, &q)| q)
        .map(|(n, _)| n as u64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers_up_to_thirty() {
        let s = FactorSieve::new(100).unwrap();
        let v = almost_primes(30, 1, PrMode::Distinct, &s).unwrap();
        assert_eq!(
            v,
            vec![2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29]
        );
    }

    #[test]
    fn semiprimes_with_multiplicity() {
        let s = FactorSieve::new(100).unwrap();
        let v = almost_primes(10, 2, PrMode::WithMultiplicity, &s).unwrap();
        assert_eq!(v, vec![2, 3, 4, 5, 6, 7, 9, 10]);
    }

    #[test]
    fn large_order_admits_everything() {
        let s = FactorSieve::new(1024).unwrap();
        let v = almost_primes(1024, 10, PrMode::WithMultiplicity, &s).unwrap();
        assert_eq!(v.len(), 1023);
    }

    #[test]
    fn errors() {
        let s = FactorSieve::new(100).unwrap();
        assert!(matches!(
            qualify_mask(100, 0, PrMode::Distinct, &s),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            qualify_mask(101, 1, PrMode::Distinct, &s),
            Err(Error::Precision { .. })
        ));
    }
}
