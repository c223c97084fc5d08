//! Exact binomials and weak-composition enumeration.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `binom(n, k)` as an exact big integer (zero when `k > n`).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Natural logarithm of a big integer, accurate to double precision even
/// when the value does not fit in an `f64`.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Saturating conversion used for cap checks.
pub fn to_u64_saturating(x: &BigUint) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

/// Iterator over all length-`parts` vectors of nonnegative integers summing
/// to `total`, in ascending lexicographic order.
///
/// `(0, …, 0, total)` comes first and `(total, 0, …, 0)` last.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
    total: u32,
}

impl Compositions {
    pub fn new(total: u32, parts: usize) -> Self {
        let current = if parts == 0 {
            None
        } else {
            let mut v = vec![0; parts];
            v[parts - 1] = total;
            Some(v)
        };
        Compositions { current, total }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.current.take()?;
        let q = cur.len();
        // Successor: bump the entry just left of the rightmost nonzero entry
        // (ignoring position 0), then push all remaining mass to the end.
        if let Some(z) = (1..q).rev().find(|&j| cur[j] > 0) {
            let mut next = cur.clone();
            let i = z - 1;
            next[i] += 1;
            let prefix: u32 = next[..=i].iter().sum();
            for v in next[i + 1..].iter_mut() {
                *v = 0;
            }
            next[q - 1] = self.total - prefix;
            self.current = Some(next);
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(5, 3), BigUint::from(10u32));
        assert_eq!(binomial(4, 3), BigUint::from(4u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(103, 3), BigUint::from(176_851u32));
    }

    #[test]
    fn ln_big_matches_f64_for_small_and_large() {
        let x = binomial(30, 15);
        assert!((ln_big(&x) - (155_117_520f64).ln()).abs() < 1e-12);
        // 2^2000 does not fit in f64
        let big = BigUint::one() << 2000u32;
        let expect = 2000.0 * std::f64::consts::LN_2;
        assert!((ln_big(&big) - expect).abs() / expect < 1e-14);
    }

    #[test]
    fn compositions_in_ascending_lex_order() {
        let all: Vec<_> = Compositions::new(2, 3).collect();
        assert_eq!(
            all,
            vec![vec![0, 0, 2], vec![0, 1, 1], vec![0, 2, 0], vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 0],]
        );
        assert_eq!(Compositions::new(0, 4).count(), 1);
        assert_eq!(Compositions::new(3, 1).collect::<Vec<_>>(), vec![vec![3]]);
    }

    #[test]
    fn composition_count_is_stars_and_bars() {
        for n in 0..7u32 {
            for q in 1..6usize {
                let c = Compositions::new(n, q).count() as u64;
                assert_eq!(BigUint::from(c), binomial(n as u64 + q as u64 - 1, q as u64 - 1));
            }
        }
    }
}
