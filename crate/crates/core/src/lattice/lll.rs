//! Lattice reduction with exact rational Gram-Schmidt.
//!
//! Dimensions here are tiny (s + 1, with s a small constant), so exact
//! arithmetic is cheap and the result is reproducible bit for bit.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;

/// The Lovasz parameter used by the recovery pipeline.
pub fn default_delta() -> Rational64 {
    Rational64::new(99, 100)
}

/// Exact Gram-Schmidt data: coefficients mu[i][j] for j < i and the squared
/// norms of the orthogonalized rows. Fails on rank deficiency.
pub(crate) fn gram_schmidt(
    rows: &[Vec<BigInt>],
) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let mut bstar: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut norms: Vec<BigRational> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<BigRational> = rows[i]
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        for j in 0..i {
            let mut dot = BigRational::zero();
            for t in 0..dim {
                dot += BigRational::from_integer(rows[i][t].clone()) * &bstar[j][t];
            }
            let coeff = dot / &norms[j];
            for t in 0..dim {
                let sub = &coeff * &bstar[j][t];
                v[t] -= sub;
            }
            mu[i][j] = coeff;
        }
        let mut norm = BigRational::zero();
        for x in &v {
            norm += x * x;
        }
        if norm.is_zero() {
            return Err(Error::InvalidBasis(format!("row {i} is linearly dependent")));
        }
        norms.push(norm);
        bstar.push(v);
    }
    Ok((mu, norms))
}

/// Nearest integer to a rational, ties rounded up.
pub(crate) fn round_nearest(x: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (x + half).floor().to_integer()
}

/// LLL reduction: returns a size-reduced basis (|mu_ij| <= 1/2) satisfying
/// the Lovasz condition with the given delta, spanning the same lattice.
pub fn lll_reduce(basis: &LatticeBasis, delta: Rational64) -> Result<LatticeBasis> {
    let quarter = Rational64::new(1, 4);
    if delta <= quarter || delta >= Rational64::one() {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (1/4, 1), got {delta}"
        )));
    }
    let delta = BigRational::new(BigInt::from(*delta.numer()), BigInt::from(*delta.denom()));

    let mut rows = basis.rows().to_vec();
    let n = rows.len();
    let dim = rows[0].len();
    let (mut mu, mut norms) = gram_schmidt(&rows)?;
    if n == 1 {
        return LatticeBasis::from_rows(rows);
    }

    let mut k = 1usize;
    while k < n {
        for j in (0..k).rev() {
            let r = round_nearest(&mu[k][j]);
            if !r.is_zero() {
                for t in 0..dim {
                    let sub = &r * &rows[j][t];
                    rows[k][t] -= sub;
                }
                let refreshed = gram_schmidt(&rows)?;
                mu = refreshed.0;
                norms = refreshed.1;
            }
        }
        let mu_sq = &mu[k][k - 1] * &mu[k][k - 1];
        let threshold = (&delta - &mu_sq) * &norms[k - 1];
        if norms[k] >= threshold {
            k += 1;
        } else {
            rows.swap(k, k - 1);
            let refreshed = gram_schmidt(&rows)?;
            mu = refreshed.0;
            norms = refreshed.1;
            k = k.max(2) - 1;
        }
    }
    LatticeBasis::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::tests::assert_same_lattice;
    use num_traits::Signed;

    fn basis(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn orthogonal_basis_is_untouched() {
        let b = basis(&[&[1, 0], &[0, 2]]);
        let reduced = lll_reduce(&b, default_delta()).unwrap();
        assert_eq!(reduced.rows(), b.rows());
    }

    #[test]
    fn reduction_preserves_the_lattice() {
        let b = basis(&[&[1, 1, 1], &[-1, 0, 2], &[3, 5, 6]]);
        let reduced = lll_reduce(&b, default_delta()).unwrap();
        assert_same_lattice(&b, &reduced);
        assert_eq!(
            b.determinant().unwrap().abs(),
            reduced.determinant().unwrap().abs()
        );
    }

    #[test]
    fn size_reduction_holds() {
        let b = basis(&[&[201, 37], &[1648, 297]]);
        let reduced = lll_reduce(&b, default_delta()).unwrap();
        let (mu, _) = gram_schmidt(reduced.rows()).unwrap();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        for i in 0..reduced.dim() {
            for j in 0..i {
                assert!(mu[i][j].abs() <= half, "mu[{i}][{j}] = {}", mu[i][j]);
            }
        }
    }

    #[test]
    fn rejects_rank_deficiency_and_bad_delta() {
        let singular = basis(&[&[1, 2], &[2, 4]]);
        assert!(matches!(
            lll_reduce(&singular, default_delta()),
            Err(Error::InvalidBasis(_))
        ));
        let b = basis(&[&[1, 0], &[0, 1]]);
        assert!(lll_reduce(&b, Rational64::new(1, 4)).is_err());
        assert!(lll_reduce(&b, Rational64::new(1, 1)).is_err());
    }
}
