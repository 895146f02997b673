//! Classical post-processing: build the recovery lattice and target from a
//! subset of measured pairs, reduce, enumerate close vectors, and extract
//! verified exponent candidates.
//!
//! For pairs (j_i, k_i) the lattice is spanned by the rows
//! (j_1 .. j_s, 1) and 2^{l+m} e_i, and the target is
//! ({-2^m k_1} .. {-2^m k_s}, 0) with centered residues. When the pairs are
//! good, the vector whose last coordinate is the secret lies strictly
//! inside squared radius (s/4 + 1) * 2^{2m} of the target; the radius test
//! is done as 4 |u - v|^2 < (s + 4) * 2^{2m} in exact integers.

mod enumerate;
mod lll;

pub use enumerate::enumerate_within;
pub use lll::{default_delta, lll_reduce};

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{centered_reduce, pow2};
use crate::error::{Error, Result};
use crate::quantum::{AlgorithmParams, OutcomePair};

/// Cap on enumerated candidates; close-vector counts are expected to be
/// tiny, but the search must terminate regardless.
pub const CANDIDATE_CAP: usize = 1_000_000;

/// Square integer row basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    rows: Vec<Vec<BigInt>>,
}

impl LatticeBasis {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidBasis("empty basis".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidBasis("basis must be square".into()));
        }
        Ok(LatticeBasis { rows })
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Exact determinant via rational elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        use num_rational::BigRational;
        let n = self.dim();
        let mut a: Vec<Vec<BigRational>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(BigInt::zero());
            };
            if pivot != col {
                a.swap(col, pivot);
                det = -det;
            }
            det *= &a[col][col];
            let p = a[col][col].clone();
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = &a[r][col] / &p;
                for c in col..n {
                    let sub = &factor * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
        debug_assert!(det.is_integer());
        Ok(det.to_integer())
    }
}

/// The close-vector target built from the measured pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetVector {
    pub components: Vec<BigInt>,
}

/// A lattice vector inside the search radius, tagged with the exponent
/// candidate read off its last coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub vector: Vec<BigInt>,
    pub dist_sq: BigInt,
    pub value: BigInt,
}

/// All vectors satisfying the exact squared-radius inequality, ordered by
/// (distance, value, vector).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

/// Build the recovery lattice and target vector from s pairs with
/// pairwise-distinct j.
pub fn build_problem(
    pairs: &[OutcomePair],
    params: &AlgorithmParams,
) -> Result<(LatticeBasis, TargetVector)> {
    let s = pairs.len();
    if s == 0 {
        return Err(Error::InvalidArgument("at least one pair is required".into()));
    }
    let two_lm = params.two_lm();
    let two_l = params.two_l();
    let mut seen = HashSet::new();
    for pair in pairs {
        if BigInt::from(pair.j) >= two_lm || BigInt::from(pair.k) >= two_l {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) outside register ranges",
                pair.j, pair.k
            )));
        }
        if !seen.insert(pair.j) {
            return Err(Error::DegenerateSubset(format!(
                "duplicate j value {}",
                pair.j
            )));
        }
    }

    let n = s + 1;
    let mut rows = vec![vec![BigInt::zero(); n]; n];
    for (i, pair) in pairs.iter().enumerate() {
        rows[0][i] = BigInt::from(pair.j);
    }
    rows[0][s] = BigInt::one();
    for i in 1..n {
        rows[i][i - 1] = two_lm.clone();
    }

    let two_m = pow2(params.m());
    let mut components = Vec::with_capacity(n);
    for pair in pairs {
        let raw = -(&two_m * BigInt::from(pair.k));
        components.push(centered_reduce(&raw, &two_lm)?.into_value());
    }
    components.push(BigInt::zero());

    Ok((LatticeBasis::from_rows(rows)?, TargetVector { components }))
}

/// Run the full recovery on one subset: build, reduce, enumerate within the
/// squared radius (s + 4) * 2^{2m} / 4, and return the first candidate c
/// with 0 < c < 2^m accepted by `verify`. `None` means this subset failed,
/// which is a legal outcome. The verifier never sees the secret; candidates
/// with +-u symmetry are only tested on the positive side.
pub fn recover_d<F>(
    pairs: &[OutcomePair],
    params: &AlgorithmParams,
    verify: F,
) -> Result<Option<BigInt>>
where
    F: Fn(&BigInt) -> bool,
{
    let (basis, target) = build_problem(pairs, params)?;
    let reduced = lll_reduce(&basis, default_delta())?;
    let num = BigInt::from(pairs.len() + 4) * pow2(2 * params.m());
    let den = BigInt::from(4);
    let set = enumerate_within(&reduced, &target, &num, &den, CANDIDATE_CAP)?;

    let two_m = pow2(params.m());
    let mut tested = HashSet::new();
    for cand in &set.candidates {
        let c = &cand.value;
        if c.is_positive() && *c < two_m && tested.insert(c.clone()) && verify(c) {
            return Ok(Some(c.clone()));
        }
    }
    Ok(None)
}
