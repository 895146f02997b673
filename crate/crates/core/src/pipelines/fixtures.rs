//! Fixture construction: fully specified instances with a known secret for
//! the sampler, paired with verification predicates that never read the
//! secret. Also the small factorization helpers used for order accounting.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::arith::pow2;
use crate::error::{Error, Result};
use crate::group::{make_safe_prime_group, random_prime_in_range, GroupElement, MulGroup};
use crate::quantum::{AlgorithmParams, SecretInstance};

/// A discrete-logarithm instance over a safe-prime group: generator g,
/// target x = g^d, and the secret instance driving the sampler.
#[derive(Debug, Clone)]
pub struct DlogFixture {
    pub group: MulGroup,
    pub generator: GroupElement,
    pub x: GroupElement,
    pub instance: SecretInstance,
}

impl DlogFixture {
    /// Secret-blind verification: compares g^c against the public x.
    pub fn verify(&self, c: &BigInt) -> bool {
        self.generator
            .pow(c)
            .map(|y| y == self.x)
            .unwrap_or(false)
    }
}

/// Two distinct primes of the same bit length n, N = p q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaFixture {
    pub p: BigInt,
    pub q: BigInt,
    pub half_bits: u32,
}

impl RsaFixture {
    pub fn n(&self) -> BigInt {
        &self.p * &self.q
    }

    pub fn phi(&self) -> BigInt {
        (&self.p - 1) * (&self.q - 1)
    }

    /// The short logarithm behind the standard reduction, (p + q - 2) / 2.
    pub fn half_sum_secret(&self) -> BigInt {
        (&self.p + &self.q - 2) / 2
    }
}

/// An order-finding instance: a subgroup of known prime order r inside
/// Z*_P, plus the approximation r0 with 0 <= r - r0 < 2^m.
#[derive(Debug, Clone)]
pub struct OrderFixture {
    pub group: MulGroup,
    pub generator: GroupElement,
    pub r: BigInt,
    pub r0: BigInt,
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureRequest {
    Dlog {
        m: u32,
        s: u32,
        ell: Option<u32>,
        group_bits: Option<u32>,
        d: Option<u64>,
    },
    Rsa {
        half_bits: u32,
    },
    Order {
        m: u32,
        s: u32,
        ell: Option<u32>,
        order_bits: u32,
        d: Option<u64>,
    },
    /// Short-exponent Diffie-Hellman flavor: an explicit safe-prime group
    /// size with a short secret exponent.
    DhShortExponent {
        group_bits: u32,
        m: u32,
        s: u32,
        ell: Option<u32>,
    },
}

#[derive(Debug, Clone)]
pub enum Fixture {
    Dlog(DlogFixture),
    Rsa(RsaFixture),
    Order(OrderFixture),
}

pub fn make_fixture<R: Rng + ?Sized>(req: &FixtureRequest, rng: &mut R) -> Result<Fixture> {
    match *req {
        FixtureRequest::Dlog {
            m,
            s,
            ell,
            group_bits,
            d,
        } => Ok(Fixture::Dlog(make_dlog_fixture(m, s, ell, group_bits, d, rng)?)),
        FixtureRequest::Rsa { half_bits } => Ok(Fixture::Rsa(make_rsa_fixture(half_bits, rng)?)),
        FixtureRequest::Order {
            m,
            s,
            ell,
            order_bits,
            d,
        } => Ok(Fixture::Order(make_order_fixture(m, s, ell, order_bits, d, rng)?)),
        FixtureRequest::DhShortExponent {
            group_bits,
            m,
            s,
            ell,
        } => Ok(Fixture::Dlog(make_dlog_fixture(
            m,
            s,
            ell,
            Some(group_bits),
            None,
            rng,
        )?)),
    }
}

/// Safe-prime dlog fixture. Without an explicit group size the prime gets
/// l+m+3 bits, which always satisfies the order requirement
/// q >= 2^{l+m} + 2^l d; explicit sizes are validated against it.
pub fn make_dlog_fixture<R: Rng + ?Sized>(
    m: u32,
    s: u32,
    ell: Option<u32>,
    group_bits: Option<u32>,
    d: Option<u64>,
    rng: &mut R,
) -> Result<DlogFixture> {
    let params = AlgorithmParams::derive(m, s, ell)?;
    let bits = group_bits.unwrap_or(params.first_register_bits() + 3);
    let d = match d {
        Some(d) => d,
        None => {
            if m > 62 {
                return Err(Error::InvalidArgument(format!("m = {m} beyond desk scale")));
            }
            rng.gen_range(1..(1u64 << m))
        }
    };
    let instance = SecretInstance::new(d, params)?;
    let (group, generator) = make_safe_prime_group(bits, rng)?;
    let order = group.known_order().expect("safe prime groups carry q");
    if *order < instance.order_requirement() {
        return Err(Error::GenerationFailed(format!(
            "subgroup order {order} below the requirement {}",
            instance.order_requirement()
        )));
    }
    let x = generator.pow(&BigInt::from(d))?;
    Ok(DlogFixture {
        group,
        generator,
        x,
        instance,
    })
}

/// Two distinct random primes in (2^{n-1}, 2^n).
pub fn make_rsa_fixture<R: Rng + ?Sized>(half_bits: u32, rng: &mut R) -> Result<RsaFixture> {
    if !(3..=32).contains(&half_bits) {
        return Err(Error::InvalidArgument(format!(
            "half_bits {half_bits} outside desk-scale range 3..=32"
        )));
    }
    let lo = pow2(half_bits - 1) + 1;
    let hi = pow2(half_bits);
    let p = random_prime_in_range(&lo, &hi, rng, 200_000)?;
    for _ in 0..200_000 {
        let q = random_prime_in_range(&lo, &hi, rng, 200_000)?;
        if q != p {
            return Ok(RsaFixture { p, q, half_bits });
        }
    }
    Err(Error::GenerationFailed("no distinct second prime".into()))
}

/// Order fixture: prime r with r | P - 1 for a prime P, an element of
/// order exactly r, and r0 = r - d.
pub fn make_order_fixture<R: Rng + ?Sized>(
    m: u32,
    s: u32,
    ell: Option<u32>,
    order_bits: u32,
    d: Option<u64>,
    rng: &mut R,
) -> Result<OrderFixture> {
    let params = AlgorithmParams::derive(m, s, ell)?;
    let width = params.first_register_bits();
    if width > 62 {
        return Err(Error::InvalidArgument(format!(
            "register width {width} beyond desk scale"
        )));
    }
    if order_bits < width + 2 {
        return Err(Error::InvalidArgument(format!(
            "order_bits {order_bits} too small; need at least {} for the order requirement",
            width + 2
        )));
    }
    if order_bits > 100 {
        return Err(Error::InvalidArgument("order_bits beyond desk scale".into()));
    }
    let d = match d {
        Some(d) => d,
        None => rng.gen_range(1..(1u64 << m)),
    };
    let instance = SecretInstance::new(d, params)?;

    for _ in 0..10_000 {
        let r = random_prime_in_range(&pow2(order_bits - 1), &pow2(order_bits), rng, 200_000)?;
        if r < instance.order_requirement() {
            continue;
        }
        // Find P = k r + 1 prime with k even.
        for k in (2u64..4000).step_by(2) {
            let p = &r * k + 1;
            if !crate::group::is_prime(&p) {
                continue;
            }
            let group = MulGroup::with_known_order(p.clone(), r.clone())?;
            let exp = (&p - 1) / &r;
            for _ in 0..64 {
                let g0 = match group.random_element(rng) {
                    crate::group::SampledElement::Unit(g) => g,
                    crate::group::SampledElement::NontrivialGcd(_) => continue,
                };
                let h = g0.pow(&exp)?;
                if h.is_identity() {
                    continue;
                }
                // r is prime, so a nontrivial power of the cofactor has
                // order exactly r.
                debug_assert!(h.pow(&r)?.is_identity());
                let r0 = &r - d;
                return Ok(OrderFixture {
                    group,
                    generator: h,
                    r,
                    r0,
                    m,
                });
            }
        }
    }
    Err(Error::GenerationFailed(
        "no prime-order subgroup fixture found".into(),
    ))
}

/// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, n);
        }
        base = mul_mod_u64(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Brent's cycle variant of Pollard's rho; returns a nontrivial factor of
/// an odd composite n.
fn pollard_rho_u64(n: u64) -> u64 {
    debug_assert!(n > 3 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Factorize a desk-scale integer (must fit in 64 bits).
pub fn factorize(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if !n.is_positive() {
        return Err(Error::InvalidArgument("factorize needs n >= 1".into()));
    }
    let n64 = n
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("{n} beyond 64-bit desk scale")))?;
    let mut factors: Vec<u64> = Vec::new();
    let mut stack = vec![n64];
    while let Some(mut v) = stack.pop() {
        if v == 1 {
            continue;
        }
        while v % 2 == 0 {
            factors.push(2);
            v /= 2;
        }
        let mut f = 3u64;
        while f <= 1 << 16 && f * f <= v {
            while v % f == 0 {
                factors.push(f);
                v /= f;
            }
            f += 2;
        }
        if v == 1 {
            continue;
        }
        if is_prime_u64(v) {
            factors.push(v);
        } else {
            let d = pollard_rho_u64(v);
            stack.push(d);
            stack.push(v / d);
        }
    }
    factors.sort_unstable();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for f in factors {
        match out.last_mut() {
            Some((p, e)) if *p == BigInt::from(f) => *e += 1,
            _ => out.push((BigInt::from(f), 1)),
        }
    }
    Ok(out)
}

/// Order of g in a group of the given order with known factorization.
pub fn element_order(g: &GroupElement, group_order: &BigInt) -> Result<BigInt> {
    let factors = factorize(group_order)?;
    let mut ord = group_order.clone();
    for (p, e) in factors {
        for _ in 0..e {
            let reduced = &ord / &p;
            if (&ord % &p).is_zero() && g.pow(&reduced)?.is_identity() {
                ord = reduced;
            } else {
                break;
            }
        }
    }
    debug_assert!(g.pow(&ord)?.is_identity());
    Ok(ord)
}
