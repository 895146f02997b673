//! Closed-form outcome probabilities.
//!
//! The probability of observing (j, k) depends only on the offset
//! theta = {d j + 2^m k}_{2^{l+m}} and on the multiset of window sizes T_e:
//!
//!   P(j, k) = 2^{-2(2l+m)} * sum_e w_{T_e}(theta)
//!
//! where w_T(theta) is the squared magnitude of a geometric phase sum over
//! T consecutive b values, evaluated with the sin-ratio closed form and an
//! exact branch at theta = 0 mod 2^{l+m}.

use std::f64::consts::PI;

use crate::arith::centered_i128;
use crate::error::Result;
use crate::quantum::{OutcomePair, SecretInstance};

/// |sum_{b=0}^{count-1} exp(2 pi i b t / 2^width)|^2.
///
/// The start of the b window cancels in the magnitude, so only the window
/// size matters. Both sine arguments are reduced to centered residues first,
/// keeping them in [-pi/2, pi/2] where the evaluation is well conditioned.
pub(crate) fn phase_window_weight(count: u64, t: i64, width: u32) -> f64 {
    let modulus = 1i128 << width;
    let tc = centered_i128(t as i128, modulus);
    if tc == 0 {
        return (count as f64) * (count as f64);
    }
    let num_arg = centered_i128(count as i128 * tc, modulus);
    let num = (PI * num_arg as f64 / modulus as f64).sin();
    let den = (PI * tc as f64 / modulus as f64).sin();
    let r = num / den;
    r * r
}

/// Precomputed histogram of window sizes, so per-pair probabilities cost
/// one weight evaluation per distinct T value instead of one per offset.
#[derive(Debug, Clone)]
pub struct ProbabilityModel<'a> {
    inst: &'a SecretInstance,
    /// (window size, number of offsets e with that size), sizes > 0 only.
    size_histogram: Vec<(u64, u64)>,
}

impl<'a> ProbabilityModel<'a> {
    pub fn new(inst: &'a SecretInstance) -> Result<Self> {
        inst.check_exhaustive()?;
        let two_l = inst.two_l_u64();
        // T_e takes values in [1, 2^l]; index by size.
        let mut counts = vec![0u64; two_l as usize + 1];
        for e in inst.offset_support() {
            counts[inst.b_range(e).count as usize] += 1;
        }
        let size_histogram = counts
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, c)| c > 0)
            .map(|(t, c)| (t as u64, c))
            .collect();
        Ok(ProbabilityModel {
            inst,
            size_histogram,
        })
    }

    pub fn instance(&self) -> &SecretInstance {
        self.inst
    }

    /// Marginal probability of any pair with the given offset.
    pub fn offset_probability(&self, theta: i64) -> f64 {
        let width = self.inst.params().first_register_bits();
        let norm = (2f64).powi(-2 * (width as i32 + self.inst.params().ell() as i32));
        let mut acc = 0.0;
        for &(t, mult) in &self.size_histogram {
            acc += mult as f64 * phase_window_weight(t, theta, width);
        }
        acc * norm
    }

    /// Marginal probability of observing exactly this (j, k).
    pub fn pair_probability(&self, pair: &OutcomePair) -> f64 {
        self.offset_probability(self.inst.offset(pair))
    }

    /// Closed-form probabilities for every (j, k), indexed j * 2^l + k.
    pub fn full_marginal(&self) -> Vec<f64> {
        let two_l = self.inst.two_l_u64();
        let mut out = Vec::with_capacity((self.inst.two_lm_u64() * two_l) as usize);
        for j in 0..self.inst.two_lm_u64() {
            for k in 0..two_l {
                out.push(self.pair_probability(&OutcomePair { j, k }));
            }
        }
        out
    }
}

/// One-shot convenience around [`ProbabilityModel`].
pub fn pair_probability(inst: &SecretInstance, pair: &OutcomePair) -> Result<f64> {
    Ok(ProbabilityModel::new(inst)?.pair_probability(pair))
}
