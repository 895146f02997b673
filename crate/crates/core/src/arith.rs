//! Exact arbitrary-precision integer and modular arithmetic primitives.
//!
//! Everything here is exact: comparisons against radii and thresholds are
//! done on squared integer quantities, never floating point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A residue reduced into the centered interval `[-n/2, n/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenteredResidue {
    pub value: BigInt,
    pub modulus: BigInt,
}

impl CenteredResidue {
    pub fn into_value(self) -> BigInt {
        self.value
    }
}

/// Reduce `u` modulo `n` and constrain it to `[-n/2, n/2)`.
pub fn centered_reduce(u: &BigInt, n: &BigInt) -> Result<CenteredResidue> {
    if !n.is_positive() {
        return Err(Error::InvalidModulus(n.clone()));
    }
    let mut r = u.mod_floor(n);
    if &r * 2 >= *n {
        r -= n;
    }
    Ok(CenteredResidue {
        value: r,
        modulus: n.clone(),
    })
}

/// Centered reduction for machine-width residues. `n` must be positive.
pub(crate) fn centered_i128(u: i128, n: i128) -> i128 {
    debug_assert!(n > 0);
    let mut r = u.rem_euclid(n);
    if 2 * r >= n {
        r -= n;
    }
    r
}

/// `g^e mod n`, in `[0, n)`. Negative exponents go through the modular
/// inverse, so `gcd(g, n) = 1` is required for `e < 0`.
pub fn mod_pow(g: &BigInt, e: &BigInt, n: &BigInt) -> Result<BigInt> {
    if *n < BigInt::from(2) {
        return Err(Error::InvalidModulus(n.clone()));
    }
    if e.is_negative() {
        let inv = mod_inverse(g, n)?;
        Ok(inv.modpow(&-e, n))
    } else {
        Ok(g.mod_floor(n).modpow(e, n))
    }
}

/// Modular inverse of `a` modulo `n`. Fails with the gcd when
/// `gcd(a, n) != 1`; callers in the factoring pipeline treat that gcd as a
/// lucky factor.
pub fn mod_inverse(a: &BigInt, n: &BigInt) -> Result<BigInt> {
    if *n < BigInt::from(2) {
        return Err(Error::InvalidModulus(n.clone()));
    }
    let ext = a.extended_gcd(n);
    if !ext.gcd.is_one() {
        return Err(Error::NotInvertible { gcd: ext.gcd });
    }
    Ok(ext.x.mod_floor(n))
}

/// Integer square root together with an exactness flag:
/// returns `(floor(sqrt(n)), root * root == n)`.
pub fn isqrt_exact(n: &BigInt) -> Result<(BigInt, bool)> {
    if n.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "isqrt of negative value {n}"
        )));
    }
    let root = n.sqrt();
    let exact = &root * &root == *n;
    Ok((root, exact))
}

/// Largest `k` such that `2^k` divides `n`. Undefined for zero.
pub fn two_adic_valuation(n: &BigInt) -> Result<u64> {
    n.trailing_zeros()
        .ok_or_else(|| Error::InvalidArgument("two-adic valuation of zero".into()))
}

/// Smallest `w` with `d < 2^w`, i.e. the bit length of `d >= 1`.
pub fn bit_length(d: &BigInt) -> Result<u32> {
    if !d.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "bit length requires a positive value, got {d}"
        )));
    }
    Ok(d.bits() as u32)
}

/// `2^k` as a big integer.
pub fn pow2(k: u32) -> BigInt {
    BigInt::one() << (k as usize)
}

/// Squared Euclidean norm of an integer vector difference, `|u - v|^2`.
pub fn dist_sq(u: &[BigInt], v: &[BigInt]) -> BigInt {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = BigInt::zero();
    for (a, b) in u.iter().zip(v) {
        let d = a - b;
        acc += &d * &d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn centered_reduce_examples() {
        assert_eq!(centered_reduce(&bi(5), &bi(8)).unwrap().value, bi(-3));
        assert_eq!(centered_reduce(&bi(4), &bi(8)).unwrap().value, bi(-4));
        assert_eq!(centered_reduce(&bi(-4), &bi(8)).unwrap().value, bi(-4));
        assert!(matches!(
            centered_reduce(&bi(1), &bi(0)),
            Err(Error::InvalidModulus(_))
        ));
    }

    #[test]
    fn centered_reduce_exhaustive_small_moduli() {
        // Congruence and range, exhaustively for n <= 64 and |u| <= 4n.
        for n in 1i64..=64 {
            for u in -4 * n..=4 * n {
                let r = centered_reduce(&bi(u), &bi(n)).unwrap().value;
                let r64: i64 = (&r).try_into().unwrap();
                assert_eq!((u - r64).rem_euclid(n), 0, "u={u} n={n}");
                assert!(-n <= 2 * r64 && 2 * r64 < n, "u={u} n={n} r={r64}");
                assert_eq!(centered_i128(u as i128, n as i128), r64 as i128);
            }
        }
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(&bi(5), &bi(0), &bi(13)).unwrap(), bi(1));
        assert_eq!(mod_pow(&bi(2), &bi(10), &bi(1000)).unwrap(), bi(24));
        assert_eq!(mod_pow(&bi(3), &bi(-1), &bi(7)).unwrap(), bi(5));
        match mod_pow(&bi(6), &bi(-1), &bi(9)) {
            Err(Error::NotInvertible { gcd }) => assert_eq!(gcd, bi(3)),
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn mod_pow_negative_exponent_inverts() {
        for g in [2i64, 3, 5, 10, 113] {
            for e in [1i64, 2, 7, 19] {
                let n = bi(1009);
                let fwd = mod_pow(&bi(g), &bi(e), &n).unwrap();
                let bwd = mod_pow(&bi(g), &bi(-e), &n).unwrap();
                assert_eq!((fwd * bwd).mod_floor(&n), bi(1));
            }
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(&bi(1), &bi(9)).unwrap(), bi(1));
        assert_eq!(mod_inverse(&bi(3), &bi(7)).unwrap(), bi(5));
        match mod_inverse(&bi(6), &bi(9)) {
            Err(Error::NotInvertible { gcd }) => assert_eq!(gcd, bi(3)),
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt_exact(&bi(4)).unwrap(), (bi(2), true));
        assert_eq!(isqrt_exact(&bi(8)).unwrap(), (bi(2), false));
        assert_eq!(isqrt_exact(&bi(0)).unwrap(), (bi(0), true));
        assert!(isqrt_exact(&bi(-1)).is_err());
        // root^2 <= n < (root+1)^2
        for n in 0i64..200 {
            let (root, _) = isqrt_exact(&bi(n)).unwrap();
            assert!(&root * &root <= bi(n));
            let next = &root + 1;
            assert!(&next * &next > bi(n));
        }
    }

    #[test]
    fn two_adic_valuation_examples() {
        assert_eq!(two_adic_valuation(&bi(7)).unwrap(), 0);
        assert_eq!(two_adic_valuation(&bi(12)).unwrap(), 2);
        assert_eq!(two_adic_valuation(&bi(8)).unwrap(), 3);
        assert!(two_adic_valuation(&bi(0)).is_err());
    }

    #[test]
    fn bit_length_examples() {
        assert_eq!(bit_length(&bi(1)).unwrap(), 1);
        assert_eq!(bit_length(&bi(8)).unwrap(), 4);
        assert_eq!(bit_length(&bi(11)).unwrap(), 4);
        assert!(bit_length(&bi(0)).is_err());
        // 2^{w-1} <= d < 2^w
        for d in 1i64..500 {
            let w = bit_length(&bi(d)).unwrap();
            assert!(pow2(w - 1) <= bi(d) && bi(d) < pow2(w));
        }
    }
}
