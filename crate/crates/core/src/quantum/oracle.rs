//! Brute-force distribution oracle.
//!
//! Builds the uniform superposition over (a, b), groups amplitudes by
//! e = a - b d, and applies both Fourier transforms by direct summation.
//! Fully independent of the closed-form probability path; exists to
//! cross-check it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{SecretInstance, MAX_STATEVECTOR_BITS};

/// Full table of P(j, k, e) for a tiny instance.
#[derive(Debug, Clone)]
pub struct StateDistribution {
    two_lm: u64,
    two_l: u64,
    e_min: i64,
    /// tables[e - e_min][j * 2^l + k]
    tables: Vec<Vec<f64>>,
}

impl StateDistribution {
    pub fn build(inst: &SecretInstance) -> Result<Self> {
        let p = inst.params();
        let state_bits = 2 * p.ell() + p.m();
        if state_bits > MAX_STATEVECTOR_BITS {
            return Err(Error::ExhaustiveModeUnavailable {
                width: state_bits,
                limit: MAX_STATEVECTOR_BITS,
            });
        }
        let two_lm = inst.two_lm_u64();
        let two_l = inst.two_l_u64();
        let support = inst.offset_support();
        let e_min = *support.start();
        let e_count = (*support.end() - e_min + 1) as usize;
        let jk_count = (two_lm * two_l) as usize;
        if e_count.saturating_mul(jk_count) > 1 << 26 {
            return Err(Error::ExhaustiveModeUnavailable {
                width: state_bits,
                limit: MAX_STATEVECTOR_BITS,
            });
        }

        let d = inst.d();
        let m = p.m();
        let norm = (2f64).powi(-2 * (state_bits as i32));
        let mut tables = vec![vec![0.0f64; jk_count]; e_count];
        for (idx, table) in tables.iter_mut().enumerate() {
            let e = e_min + idx as i64;
            let window = inst.b_range(e);
            if window.count == 0 {
                continue;
            }
            for j in 0..two_lm {
                for k in 0..two_l {
                    let (mut re, mut im) = (0.0f64, 0.0f64);
                    for b in window.b_lo..=window.b_hi {
                        // a = e + b d is the first-register index.
                        let a = (e + (b * d) as i64) as u64;
                        // Reduce the phase index exactly before converting.
                        let raw = a as u128 * j as u128 + ((b as u128 * k as u128) << m);
                        let reduced = (raw % two_lm as u128) as u64;
                        let phase = 2.0 * PI * reduced as f64 / two_lm as f64;
                        re += phase.cos();
                        im += phase.sin();
                    }
                    table[(j * two_l + k) as usize] = (re * re + im * im) * norm;
                }
            }
        }
        Ok(StateDistribution {
            two_lm,
            two_l,
            e_min,
            tables,
        })
    }

    pub fn prob(&self, j: u64, k: u64, e: i64) -> f64 {
        let idx = e - self.e_min;
        if idx < 0 || idx as usize >= self.tables.len() {
            return 0.0;
        }
        self.tables[idx as usize][(j * self.two_l + k) as usize]
    }

    /// Total mass on a given offset e.
    pub fn e_mass(&self, e: i64) -> f64 {
        let idx = e - self.e_min;
        if idx < 0 || idx as usize >= self.tables.len() {
            return 0.0;
        }
        self.tables[idx as usize].iter().sum()
    }

    /// Marginal over e: probabilities per (j, k), indexed j * 2^l + k.
    pub fn marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; (self.two_lm * self.two_l) as usize];
        for table in &self.tables {
            for (acc, p) in out.iter_mut().zip(table) {
                *acc += p;
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.tables.iter().flatten().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{tiny_instance, ProbabilityModel};

    #[test]
    fn total_mass_is_one() {
        let inst = tiny_instance();
        let dist = StateDistribution::build(&inst).unwrap();
        assert!((dist.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_windows_carry_no_mass() {
        let inst = tiny_instance();
        let dist = StateDistribution::build(&inst).unwrap();
        for e in [-200i64, -4, 8, 300] {
            assert_eq!(inst.b_range(e).count, 0);
            assert_eq!(dist.e_mass(e), 0.0);
        }
    }

    #[test]
    fn marginal_matches_closed_form() {
        let inst = tiny_instance();
        let dist = StateDistribution::build(&inst).unwrap();
        let closed = ProbabilityModel::new(&inst).unwrap().full_marginal();
        for (a, b) in dist.marginal().iter().zip(&closed) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn guard_rejects_large_instances() {
        let params = crate::quantum::AlgorithmParams::derive(20, 2, Some(10)).unwrap();
        let inst = SecretInstance::new(999, params).unwrap();
        assert!(matches!(
            StateDistribution::build(&inst),
            Err(Error::ExhaustiveModeUnavailable { .. })
        ));
    }
}
