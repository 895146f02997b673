//! Multiplicative groups modulo M: element arithmetic, uniform element
//! sampling, primality testing and safe-prime fixture groups.

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::arith::{mod_pow, pow2};
use crate::error::{Error, Result};

/// The multiplicative group of integers modulo `modulus`. When the order of
/// the working subgroup is known (fixture groups), it is carried along so
/// pipelines can check the order requirement exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulGroup {
    modulus: BigInt,
    known_order: Option<BigInt>,
}

impl MulGroup {
    pub fn new(modulus: BigInt) -> Result<Self> {
        if modulus < BigInt::from(3) {
            return Err(Error::InvalidArgument(format!(
                "group modulus must be at least 3, got {modulus}"
            )));
        }
        Ok(MulGroup {
            modulus,
            known_order: None,
        })
    }

    pub fn with_known_order(modulus: BigInt, order: BigInt) -> Result<Self> {
        let mut g = Self::new(modulus)?;
        if !order.is_positive() {
            return Err(Error::InvalidArgument("known order must be positive".into()));
        }
        g.known_order = Some(order);
        Ok(g)
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn known_order(&self) -> Option<&BigInt> {
        self.known_order.as_ref()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            value: BigInt::one(),
            modulus: self.modulus.clone(),
        }
    }

    /// Build an element from a residue, checking it is a unit.
    pub fn element(&self, value: BigInt) -> Result<GroupElement> {
        let v = value.mod_floor(&self.modulus);
        if v.is_zero() {
            return Err(Error::NotInvertible {
                gcd: self.modulus.clone(),
            });
        }
        let gcd = v.gcd(&self.modulus);
        if !gcd.is_one() {
            return Err(Error::NotInvertible { gcd });
        }
        Ok(GroupElement {
            value: v,
            modulus: self.modulus.clone(),
        })
    }

    /// Draw a value uniformly from the open interval (1, M-1). A value that
    /// shares a factor with M is reported as a first-class outcome rather
    /// than an error: the factoring reduction uses it directly.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledElement {
        let two = BigInt::from(2);
        let hi = &self.modulus - 1; // gen_bigint_range is half-open
        let value = rng.gen_bigint_range(&two, &hi);
        let gcd = value.gcd(&self.modulus);
        if gcd.is_one() {
            SampledElement::Unit(GroupElement {
                value,
                modulus: self.modulus.clone(),
            })
        } else {
            SampledElement::NontrivialGcd(gcd)
        }
    }
}

/// Outcome of drawing a random residue: either a unit of the group or a
/// nontrivial gcd with the modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampledElement {
    Unit(GroupElement),
    NontrivialGcd(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    value: BigInt,
    modulus: BigInt,
}

impl GroupElement {
    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn is_identity(&self) -> bool {
        self.value.is_one()
    }

    /// Group operation `self * other mod M`.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.modulus != other.modulus {
            return Err(Error::MismatchedGroups);
        }
        Ok(GroupElement {
            value: (&self.value * &other.value).mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        })
    }

    /// Repeated application of the group operation, `self^e mod M`.
    /// Negative exponents go through the modular inverse.
    pub fn pow(&self, e: &BigInt) -> Result<GroupElement> {
        let value = mod_pow(&self.value, e, &self.modulus)?;
        Ok(GroupElement {
            value,
            modulus: self.modulus.clone(),
        })
    }
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Primality test: deterministic trial division below 2^20, Miller-Rabin
/// with the first 25 prime bases above. Desk-scale inputs only.
pub fn is_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    if *n < pow2(20) {
        let n64: u64 = n.try_into().expect("fits below 2^20");
        let mut f = 101u64;
        while f * f <= n64 {
            if n64.is_multiple_of(f) {
                return false;
            }
            f += 2;
        }
        return true;
    }
    miller_rabin(n)
}

fn miller_rabin(n: &BigInt) -> bool {
    let one = BigInt::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n > 2 is odd here");
    let d = &n_minus_1 >> (s as usize);
    'bases: for &a in &SMALL_PRIMES {
        let a = BigInt::from(a);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x).mod_floor(n);
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Random prime in the half-open range `[lo, hi)`.
pub(crate) fn random_prime_in_range<R: Rng + ?Sized>(
    lo: &BigInt,
    hi: &BigInt,
    rng: &mut R,
    max_attempts: usize,
) -> Result<BigInt> {
    for _ in 0..max_attempts {
        let candidate = rng.gen_bigint_range(lo, hi);
        if is_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no prime found in [{lo}, {hi}) after {max_attempts} attempts"
    )))
}

/// Generate a safe-prime group: p = 2q + 1 with p and q prime, p of the
/// requested bit length, together with a generator of the order-q subgroup.
/// The generator is the square of a random element, which avoids the
/// order-2 component.
pub fn make_safe_prime_group<R: Rng + ?Sized>(
    bits: u32,
    rng: &mut R,
) -> Result<(MulGroup, GroupElement)> {
    if !(3..=128).contains(&bits) {
        return Err(Error::InvalidArgument(format!(
            "safe prime bit length {bits} outside supported range 3..=128"
        )));
    }
    let q_lo = pow2(bits - 2);
    let q_hi = pow2(bits - 1);
    let max_attempts = 400_000usize;
    for _ in 0..max_attempts {
        let q = rng.gen_bigint_range(&q_lo, &q_hi);
        if !is_prime(&q) {
            continue;
        }
        let p = &q * 2 + 1;
        if !is_prime(&p) {
            continue;
        }
        debug_assert_eq!(p.bits() as u32, bits);
        let group = MulGroup::with_known_order(p.clone(), q.clone())?;
        // Any g0 outside {1, p-1} squares to an element of order exactly q.
        let g0 = rng.gen_bigint_range(&BigInt::from(2), &(&p - 1));
        let gen = group.element((&g0 * &g0).mod_floor(&p))?;
        debug_assert!(!gen.is_identity());
        debug_assert!(gen.pow(&q).unwrap().is_identity());
        return Ok((group, gen));
    }
    Err(Error::GenerationFailed(format!(
        "no {bits}-bit safe prime found after {max_attempts} attempts"
    )))
}
