//! Scalable exact sampler for measurement outcomes.
//!
//! Strategy per draw:
//!   1. draw (a, b) uniformly and set e = a - b d, which realizes
//!      P(e) = T_e / 2^{2l+m} exactly;
//!   2. conditioned on e, draw the phase target t from the window weights
//!      w(t), restricted to achievable t (those with 2^kappa dividing
//!      t mod 2^m, kappa the two-adic valuation of d) - the fiber size
//!      2^{l+kappa} is constant over achievable t, so restriction and
//!      renormalization is exact;
//!   3. draw (j, k) uniformly from the fiber {(j,k) : d j + 2^m k = t}.
//!
//! Weight tables depend on the window only through its size, so they are
//! cached keyed by T_e. Tables have 2^{l+m-kappa} entries, which bounds the
//! sampler to l+m of roughly 28 bits.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::prob::phase_window_weight;
use crate::quantum::{OutcomePair, SecretInstance, MAX_SAMPLER_BITS};

/// Cumulative weights over achievable targets tau = t / 2^kappa.
struct WeightTable {
    cum: Vec<f64>,
}

impl WeightTable {
    fn build(count: u64, kappa: u32, width: u32) -> Self {
        let entries = 1u64 << (width - kappa);
        let mut cum = Vec::with_capacity(entries as usize);
        let mut acc = 0.0f64;
        for tau in 0..entries {
            acc += phase_window_weight(count, (tau << kappa) as i64, width);
            cum.push(acc);
        }
        WeightTable { cum }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cum.last().expect("non-empty table");
        let u = rng.gen::<f64>() * total;
        let idx = self.cum.partition_point(|&c| c <= u);
        idx.min(self.cum.len() - 1) as u64
    }
}

/// Draws (j, k, e) with exactly the measurement distribution of the
/// instance. Owns a per-instance weight-table cache; give each worker its
/// own sampler.
pub struct Sampler<'a> {
    inst: &'a SecretInstance,
    kappa: u32,
    d_odd_inv: u64,
    tables: HashMap<u64, WeightTable>,
}

impl<'a> Sampler<'a> {
    pub fn new(inst: &'a SecretInstance) -> Result<Self> {
        let width = inst.params().first_register_bits();
        if width > MAX_SAMPLER_BITS {
            return Err(Error::SamplerUnavailable {
                width,
                limit: MAX_SAMPLER_BITS,
            });
        }
        let kappa = inst.kappa();
        let d_odd = inst.d() >> kappa;
        let d_odd_inv = inv_mod_pow2(d_odd, inst.params().m() - kappa);
        Ok(Sampler {
            inst,
            kappa,
            d_odd_inv,
            tables: HashMap::new(),
        })
    }

    pub fn instance(&self) -> &SecretInstance {
        self.inst
    }

    /// One measurement: the pair (j, k) and the offset e the third register
    /// collapsed to. e is kept for oracle cross-checks only; recovery
    /// discards it.
    pub fn sample_pair<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (OutcomePair, i64) {
        let two_lm = self.inst.two_lm_u64();
        let two_l = self.inst.two_l_u64();
        let a = rng.gen_range(0..two_lm);
        let b = rng.gen_range(0..two_l);
        let e = a as i64 - (b * self.inst.d()) as i64;

        let count = self.inst.b_range(e).count;
        debug_assert!(count >= 1);
        let width = self.inst.params().first_register_bits();
        let kappa = self.kappa;
        let table = self
            .tables
            .entry(count)
            .or_insert_with(|| WeightTable::build(count, kappa, width));
        let tau = table.sample(rng);
        let t = tau << kappa;

        let pair = self
            .sample_fiber(t, rng)
            .expect("t built achievable by construction");
        (pair, e)
    }

    /// Uniform draw from the fiber {(j, k) : d j + 2^m k = t mod 2^{l+m}}.
    ///
    /// With d = 2^kappa d' (d' odd), j must satisfy
    /// d' j = t / 2^kappa (mod 2^{m-kappa}); the high part of j is free
    /// (2^{l+kappa} choices) and k is then determined.
    pub fn sample_fiber<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> Result<OutcomePair> {
        let p = self.inst.params();
        let two_lm = self.inst.two_lm_u64();
        if t >= two_lm {
            return Err(Error::InvalidArgument(format!(
                "target {t} outside [0, 2^{})",
                p.first_register_bits()
            )));
        }
        if t & ((1u64 << self.kappa) - 1) != 0 {
            return Err(Error::UnachievableTarget(format!(
                "2^{} does not divide {t}",
                self.kappa
            )));
        }
        let m = p.m();
        let tau = t >> self.kappa;
        let free_bits = p.ell() + self.kappa;
        let low_mod = 1u64 << (m - self.kappa);
        let j0 = ((tau & (low_mod - 1)) as u128 * self.d_odd_inv as u128 % low_mod as u128) as u64;
        let high = rng.gen_range(0..(1u64 << free_bits));
        let j = j0 + (high << (m - self.kappa));
        let diff = t as i128 - self.inst.d() as i128 * j as i128;
        debug_assert_eq!(diff.rem_euclid(1 << m), 0);
        let k = (diff >> m).rem_euclid(self.inst.two_l_u64() as i128) as u64;
        let pair = OutcomePair { j, k };
        debug_assert_eq!(
            (self.inst.d() as i128 * j as i128 + ((k as i128) << m) - t as i128)
                .rem_euclid(two_lm as i128),
            0
        );
        Ok(pair)
    }
}

/// One-shot sampling without keeping a table cache around.
pub fn sample_pair<R: Rng + ?Sized>(
    inst: &SecretInstance,
    rng: &mut R,
) -> Result<(OutcomePair, i64)> {
    Ok(Sampler::new(inst)?.sample_pair(rng))
}

/// Inverse of odd `a` modulo 2^bits, by Hensel lifting.
fn inv_mod_pow2(a: u64, bits: u32) -> u64 {
    debug_assert!(a % 2 == 1);
    if bits == 0 {
        return 0;
    }
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut x = 1u64; // inverse mod 2
    let mut done = 1;
    while done < bits {
        // x -> x(2 - a x) doubles the number of correct bits
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
        done *= 2;
    }
    x & mask
}
