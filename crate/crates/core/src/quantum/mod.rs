//! Exact model of the measurement stage: algorithm parameters, outcome
//! pairs, the counting windows behind the outcome distribution, and
//! good-pair analysis.
//!
//! An instance binds a secret exponent d with 0 < d < 2^m to register
//! widths (l+m, l). A measured pair (j, k) is "good" when the centered
//! residue of d*j + 2^m*k modulo 2^{l+m} is at most 2^{m-2} in absolute
//! value; those are the pairs the lattice recovery can use.

mod oracle;
mod prob;
mod sampler;

pub use oracle::StateDistribution;
pub use prob::{pair_probability, ProbabilityModel};
pub use sampler::{sample_pair, Sampler};

use num_bigint::BigInt;

use crate::arith::pow2;
use crate::error::{Error, Result};

/// Cap on l+m for exhaustive per-j operations (good-pair enumeration,
/// closed-form probabilities).
pub const MAX_EXHAUSTIVE_BITS: u32 = 24;
/// Cap on 2l+m for the brute-force state oracle.
pub const MAX_STATEVECTOR_BITS: u32 = 20;
/// Cap on l+m for the scalable sampler (weight tables have 2^{l+m} entries).
pub const MAX_SAMPLER_BITS: u32 = 28;
/// Instance-level cap so index arithmetic fits in 64/128-bit integers.
const MAX_INSTANCE_BITS: u32 = 62;

/// The tradeoff parameters (m, s, l) and the register widths they induce:
/// the first index register is l+m bits wide, the second l bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgorithmParams {
    m: u32,
    s: u32,
    ell: u32,
}

impl AlgorithmParams {
    /// Derive parameters from (m, s). Without an override, l = ceil(m/s);
    /// rounding up keeps the group-order requirement conservative.
    pub fn derive(m: u32, s: u32, ell_override: Option<u32>) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if s < 1 {
            return Err(Error::InvalidArgument("s must be at least 1".into()));
        }
        let ell = match ell_override {
            Some(l) => {
                if l == 0 || l > m {
                    return Err(Error::InvalidArgument(format!(
                        "ell override {l} outside 1..={m}"
                    )));
                }
                l
            }
            None => m.div_ceil(s),
        };
        Ok(AlgorithmParams { m, s, ell })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Width of the first index register in bits (the exponent length).
    pub fn first_register_bits(&self) -> u32 {
        self.ell + self.m
    }

    pub fn second_register_bits(&self) -> u32 {
        self.ell
    }

    /// 2^{l+m}.
    pub fn two_lm(&self) -> BigInt {
        pow2(self.ell + self.m)
    }

    /// 2^l.
    pub fn two_l(&self) -> BigInt {
        pow2(self.ell)
    }
}

/// One measurement outcome: j in [0, 2^{l+m}), k in [0, 2^l).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomePair {
    pub j: u64,
    pub k: u64,
}

/// The window of second-index values b compatible with a given offset e:
/// all b in [b_lo, b_hi] with 0 <= b < 2^l and 0 <= e + b*d < 2^{l+m}.
/// `count` is the window size; when it is zero the bounds are meaningless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BRange {
    pub e: i64,
    pub b_lo: u64,
    pub b_hi: u64,
    pub count: u64,
}

/// A secret instance: the exponent d the sampler reproduces outcomes for.
/// Recovery never sees d; only the sampler side does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretInstance {
    d: u64,
    params: AlgorithmParams,
}

impl SecretInstance {
    pub fn new(d: u64, params: AlgorithmParams) -> Result<Self> {
        if params.m < 2 {
            // The good-pair threshold 2^{m-2} is fractional at m = 1.
            return Err(Error::InvalidArgument(
                "instances require m >= 2 so the good-pair threshold is integral".into(),
            ));
        }
        let width = params.first_register_bits();
        if width > MAX_INSTANCE_BITS {
            return Err(Error::InvalidArgument(format!(
                "register width {width} exceeds the supported {MAX_INSTANCE_BITS} bits"
            )));
        }
        if d == 0 || d >= 1u64 << params.m {
            return Err(Error::InvalidArgument(format!(
                "secret must satisfy 0 < d < 2^{}, got {d}",
                params.m
            )));
        }
        Ok(SecretInstance { d, params })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn params(&self) -> &AlgorithmParams {
        &self.params
    }

    pub(crate) fn two_lm_u64(&self) -> u64 {
        1u64 << self.params.first_register_bits()
    }

    pub(crate) fn two_l_u64(&self) -> u64 {
        1u64 << self.params.ell
    }

    /// |{d j}_{2^m}| threshold for a good pair, 2^{m-2}.
    pub fn good_threshold(&self) -> u64 {
        1u64 << (self.params.m - 2)
    }

    /// Two-adic valuation of d.
    pub(crate) fn kappa(&self) -> u32 {
        self.d.trailing_zeros()
    }

    /// Smallest group order the algorithm requires, 2^{l+m} + 2^l * d.
    pub fn order_requirement(&self) -> BigInt {
        self.params.two_lm() + self.params.two_l() * BigInt::from(self.d)
    }

    /// The set {b : 0 <= b < 2^l, 0 <= e + b d < 2^{l+m}} is contiguous
    /// because e + b d is increasing in b.
    pub fn b_range(&self, e: i64) -> BRange {
        let d = self.d as i128;
        let e128 = e as i128;
        let two_l = self.two_l_u64() as i128;
        let two_lm = self.two_lm_u64() as i128;
        let lo = if e128 >= 0 { 0 } else { (-e128 + d - 1) / d };
        let hi_num = two_lm - 1 - e128;
        let hi = if hi_num < 0 {
            -1
        } else {
            (hi_num / d).min(two_l - 1)
        };
        if lo > hi {
            BRange {
                e,
                b_lo: 0,
                b_hi: 0,
                count: 0,
            }
        } else {
            BRange {
                e,
                b_lo: lo as u64,
                b_hi: hi as u64,
                count: (hi - lo + 1) as u64,
            }
        }
    }

    /// Inclusive range of offsets e with a nonempty window:
    /// -(2^l - 1) d <= e < 2^{l+m}.
    pub fn offset_support(&self) -> std::ops::RangeInclusive<i64> {
        let lo = -(((self.two_l_u64() - 1) as i128 * self.d as i128) as i64);
        let hi = self.two_lm_u64() as i64 - 1;
        lo..=hi
    }

    /// Centered residue of d*j + 2^m*k modulo 2^{l+m}; the interference
    /// offset that decides whether a pair is good.
    pub fn offset(&self, pair: &OutcomePair) -> i64 {
        debug_assert!(pair.j < self.two_lm_u64() && pair.k < self.two_l_u64());
        let two_lm = self.two_lm_u64() as i128;
        let raw = self.d as i128 * pair.j as i128 + ((pair.k as i128) << self.params.m);
        crate::arith::centered_i128(raw, two_lm) as i64
    }

    /// A pair is good when |offset| <= 2^{m-2}.
    pub fn is_good(&self, pair: &OutcomePair) -> bool {
        self.offset(pair).unsigned_abs() <= self.good_threshold()
    }

    /// The k in [0, 2^l) minimizing |offset(j, k)|, ties broken toward the
    /// smaller k. Writing d*j mod 2^{l+m} = hi * 2^m + lo, the two nearest
    /// candidates are offset lo (k = -hi) and offset lo - 2^m (k = -hi - 1);
    /// every other k is at least 2^m away.
    pub fn best_k(&self, j: u64) -> u64 {
        debug_assert!(j < self.two_lm_u64());
        let two_lm = self.two_lm_u64() as u128;
        let two_l = self.two_l_u64();
        let two_m = 1u64 << self.params.m;
        let rho = ((self.d as u128 * j as u128) % two_lm) as u64;
        let lo = rho & (two_m - 1);
        let hi = rho >> self.params.m;
        let k_up = (two_l - hi) & (two_l - 1);
        let k_down = (two_l - hi - 1) & (two_l - 1);
        if lo < two_m - lo {
            k_up
        } else if lo > two_m - lo {
            k_down
        } else {
            k_up.min(k_down)
        }
    }

    /// Whether j admits a good pair, i.e. |{d j}_{2^m}| <= 2^{m-2}.
    fn j_is_good(&self, j: u64) -> bool {
        let two_m = 1u64 << self.params.m;
        let r = ((self.d as u128 * j as u128) & (two_m as u128 - 1)) as u64;
        let t = self.good_threshold();
        r <= t || r >= two_m - t
    }

    /// Iterator over all j whose best k yields a good pair. Exhaustive;
    /// guarded by `MAX_EXHAUSTIVE_BITS`.
    pub fn good_j_values(&self) -> Result<impl Iterator<Item = u64> + '_> {
        self.check_exhaustive()?;
        Ok((0..self.two_lm_u64()).filter(move |&j| self.j_is_good(j)))
    }

    pub fn good_j_count(&self) -> Result<u64> {
        Ok(self.good_j_values()?.count() as u64)
    }

    /// Exact moments of the window sizes over the offset support:
    /// (sum of T_e, sum of T_e^2).
    pub fn te_moments(&self) -> Result<(BigInt, BigInt)> {
        self.check_exhaustive()?;
        let mut sum = BigInt::from(0u32);
        let mut sq = BigInt::from(0u32);
        for e in self.offset_support() {
            let t = self.b_range(e).count;
            sum += t;
            sq += BigInt::from(t) * t;
        }
        Ok((sum, sq))
    }

    pub(crate) fn check_exhaustive(&self) -> Result<()> {
        let width = self.params.first_register_bits();
        if width > MAX_EXHAUSTIVE_BITS {
            return Err(Error::ExhaustiveModeUnavailable {
                width,
                limit: MAX_EXHAUSTIVE_BITS,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) fn tiny_instance() -> SecretInstance {
    // d = 3, l = 1, m = 2: the worked example used across the module tests.
    let params = AlgorithmParams::derive(2, 2, Some(1)).unwrap();
    SecretInstance::new(3, params).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::pow2;

    #[test]
    fn derive_params_examples() {
        assert_eq!(AlgorithmParams::derive(4, 2, None).unwrap().ell(), 2);
        assert_eq!(AlgorithmParams::derive(5, 2, None).unwrap().ell(), 3);
        assert_eq!(AlgorithmParams::derive(48, 3, None).unwrap().ell(), 16);
        assert!(AlgorithmParams::derive(4, 2, Some(0)).is_err());
        assert!(AlgorithmParams::derive(4, 2, Some(5)).is_err());
        assert!(AlgorithmParams::derive(0, 1, None).is_err());
        assert!(AlgorithmParams::derive(4, 0, None).is_err());
    }

    #[test]
    fn instance_construction_guards() {
        let p_m1 = AlgorithmParams::derive(1, 1, None).unwrap();
        assert!(SecretInstance::new(1, p_m1).is_err());

        let p = AlgorithmParams::derive(4, 2, None).unwrap();
        assert!(SecretInstance::new(0, p).is_err());
        assert!(SecretInstance::new(16, p).is_err());
        assert!(SecretInstance::new(15, p).is_ok());
    }

    #[test]
    fn b_range_examples() {
        let inst = tiny_instance();
        assert_eq!(inst.b_range(0).count, 2); // T_0 = 2^l
        let r7 = inst.b_range(7);
        assert_eq!((r7.b_lo, r7.b_hi, r7.count), (0, 0, 1));
        let rm3 = inst.b_range(-3);
        assert_eq!((rm3.b_lo, rm3.b_hi, rm3.count), (1, 1, 1));
        assert_eq!(inst.b_range(8).count, 0);
        assert_eq!(inst.b_range(-4).count, 0);
    }

    #[test]
    fn b_range_matches_enumeration() {
        for d in 1..16u64 {
            for ell in 1..=3u32 {
                let params = AlgorithmParams::derive(4, 1, Some(ell)).unwrap();
                let inst = SecretInstance::new(d, params).unwrap();
                for e in -200i64..300 {
                    let expected = (0..inst.two_l_u64())
                        .filter(|&b| {
                            let a = e + (b * d) as i64;
                            0 <= a && (a as u64) < inst.two_lm_u64()
                        })
                        .count() as u64;
                    assert_eq!(inst.b_range(e).count, expected, "d={d} ell={ell} e={e}");
                }
            }
        }
    }

    #[test]
    fn offset_examples() {
        let inst = tiny_instance();
        assert_eq!(inst.offset(&OutcomePair { j: 0, k: 0 }), 0);
        assert_eq!(inst.offset(&OutcomePair { j: 3, k: 0 }), 1);
        assert_eq!(inst.offset(&OutcomePair { j: 1, k: 1 }), -1);
    }

    #[test]
    fn is_good_examples() {
        let inst = tiny_instance();
        assert!(inst.is_good(&OutcomePair { j: 0, k: 0 }));
        assert!(inst.is_good(&OutcomePair { j: 3, k: 0 }));
        assert!(!inst.is_good(&OutcomePair { j: 2, k: 0 }));
    }

    #[test]
    fn best_k_examples_and_brute_force() {
        let inst = tiny_instance();
        assert_eq!(inst.best_k(0), 0);
        assert_eq!(inst.best_k(3), 0);

        // Brute-force argmin over k for a spread of small instances.
        for d in 1..32u64 {
            for (m, ell) in [(5u32, 1u32), (5, 2), (5, 3), (6, 2)] {
                if d >= 1 << m {
                    continue;
                }
                let params = AlgorithmParams::derive(m, 1, Some(ell)).unwrap();
                let inst = SecretInstance::new(d, params).unwrap();
                for j in 0..inst.two_lm_u64() {
                    let best = inst.best_k(j);
                    let best_abs = inst.offset(&OutcomePair { j, k: best }).unsigned_abs();
                    for k in 0..inst.two_l_u64() {
                        let abs = inst.offset(&OutcomePair { j, k }).unsigned_abs();
                        assert!(
                            best_abs < abs || (best_abs == abs && best <= k),
                            "d={d} m={m} ell={ell} j={j}: best_k={best} beaten by k={k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn good_j_enumeration_example() {
        let inst = tiny_instance();
        let got: Vec<u64> = inst.good_j_values().unwrap().collect();
        assert_eq!(got, vec![0, 1, 3, 4, 5, 7]);
        assert!(inst.good_j_count().unwrap() >= 4); // 2^{l+m-1}
        for &j in &got {
            let k = inst.best_k(j);
            assert!(inst.is_good(&OutcomePair { j, k }));
        }
        // Completeness: no j outside the set admits a good pair at any k.
        for j in 0..inst.two_lm_u64() {
            if !got.contains(&j) {
                for k in 0..inst.two_l_u64() {
                    assert!(!inst.is_good(&OutcomePair { j, k }), "j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn good_j_count_bounds() {
        for m in 2..=6u32 {
            for ell in 1..=m.min(3) {
                for d in 1..(1u64 << m) {
                    let params = AlgorithmParams::derive(m, 1, Some(ell)).unwrap();
                    let inst = SecretInstance::new(d, params).unwrap();
                    let count = inst.good_j_count().unwrap();
                    let floor = 1u64 << (ell + m - 1);
                    assert!(count >= floor, "m={m} ell={ell} d={d}: {count} < {floor}");
                    if d == 1 << (m - 1) {
                        assert_eq!(count, floor, "equality holds when kappa = m - 1");
                    }
                }
            }
        }
    }

    #[test]
    fn te_moment_identities() {
        let inst = tiny_instance();
        let (sum, sq) = inst.te_moments().unwrap();
        assert_eq!(sum, pow2(4));
        assert_eq!(sq, BigInt::from(26));

        for m in 2..=6u32 {
            for ell in 1..=m.min(3) {
                for d in [1u64, 3, (1 << m) - 1, 1 << (m - 1)] {
                    let params = AlgorithmParams::derive(m, 1, Some(ell)).unwrap();
                    let inst = SecretInstance::new(d, params).unwrap();
                    let (sum, sq) = inst.te_moments().unwrap();
                    assert_eq!(sum, pow2(2 * ell + m));
                    assert!(sq >= pow2(3 * ell + m - 1));
                }
            }
        }
    }

    #[test]
    fn exhaustive_guard_trips() {
        let params = AlgorithmParams::derive(24, 1, Some(8)).unwrap();
        let inst = SecretInstance::new(12345, params).unwrap();
        assert!(matches!(
            inst.good_j_count(),
            Err(Error::ExhaustiveModeUnavailable { .. })
        ));
    }
}
