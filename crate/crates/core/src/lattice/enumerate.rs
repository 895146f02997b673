//! Bounded close-vector enumeration on the Gram-Schmidt ladder.
//!
//! Finds exactly the lattice vectors u with
//! `sq_radius_den * |u - v|^2 < sq_radius_num` (strict). Interior levels
//! prune with exact rational comparisons; the leaf test is pure integer
//! arithmetic, so no floating point touches the result.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::dist_sq;
use crate::error::{Error, Result};
use crate::lattice::lll::{gram_schmidt, round_nearest};
use crate::lattice::{Candidate, CandidateSet, LatticeBasis, TargetVector};

/// Rational coordinates of `target` in the row basis (full rank required).
pub(crate) fn solve_coordinates(rows: &[Vec<BigInt>], target: &[BigInt]) -> Result<Vec<BigRational>> {
    let n = rows.len();
    // Augmented system A x = target where column i of A is rows[i].
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|t| {
            (0..n)
                .map(|i| BigRational::from_integer(rows[i][t].clone()))
                .chain(std::iter::once(BigRational::from_integer(target[t].clone())))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidBasis("rank deficient".into()))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..=n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Ok((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
}

struct Enumerator<'a> {
    rows: &'a [Vec<BigInt>],
    mu: Vec<Vec<BigRational>>,
    norms: Vec<BigRational>,
    coords: Vec<BigRational>,
    radius_sq: BigRational,
    target: &'a [BigInt],
    num: &'a BigInt,
    den: &'a BigInt,
    cap: usize,
    x: Vec<BigInt>,
    z: Vec<BigRational>,
    found: Vec<Candidate>,
}

impl Enumerator<'_> {
    fn run(&mut self) -> Result<()> {
        let top = self.rows.len() - 1;
        self.descend(top, BigRational::zero())
    }

    fn descend(&mut self, level: usize, partial: BigRational) -> Result<()> {
        let n = self.rows.len();
        let mut center = self.coords[level].clone();
        for j in level + 1..n {
            let sub = &self.mu[j][level] * &self.z[j];
            center -= sub;
        }
        let start = round_nearest(&center);

        // Walk outward from the nearest integer in both directions; the
        // level term grows monotonically with the distance from center.
        let mut x = start.clone();
        while self.try_value(level, &partial, &center, &x)? {
            x += 1;
        }
        let mut x = &start - 1;
        while self.try_value(level, &partial, &center, &x)? {
            x -= 1;
        }
        Ok(())
    }

    /// Returns whether the walk should continue in this direction.
    fn try_value(
        &mut self,
        level: usize,
        partial: &BigRational,
        center: &BigRational,
        x: &BigInt,
    ) -> Result<bool> {
        let diff = BigRational::from_integer(x.clone()) - center;
        let term = &self.norms[level] * &diff * &diff;
        let total = partial + &term;
        if total > self.radius_sq {
            return Ok(false);
        }
        self.x[level] = x.clone();
        self.z[level] = BigRational::from_integer(x.clone()) - &self.coords[level];
        if level == 0 {
            self.emit()?;
        } else {
            self.descend(level - 1, total)?;
        }
        Ok(true)
    }

    fn emit(&mut self) -> Result<()> {
        let n = self.rows.len();
        let mut u = vec![BigInt::zero(); n];
        for (i, xi) in self.x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for t in 0..n {
                u[t] += xi * &self.rows[i][t];
            }
        }
        let d2 = dist_sq(&u, self.target);
        if &d2 * self.den < *self.num {
            if self.found.len() >= self.cap {
                return Err(Error::TooManyCandidates { cap: self.cap });
            }
            let value = u[n - 1].clone();
            self.found.push(Candidate {
                vector: u,
                dist_sq: d2,
                value,
            });
        }
        Ok(())
    }
}

/// Enumerate all lattice vectors u with
/// `sq_radius_den * |u - target|^2 < sq_radius_num`. The basis need not be
/// reduced for correctness; reduction just tightens the search tree.
pub fn enumerate_within(
    basis: &LatticeBasis,
    target: &TargetVector,
    sq_radius_num: &BigInt,
    sq_radius_den: &BigInt,
    cap: usize,
) -> Result<CandidateSet> {
    let n = basis.dim();
    if target.components.len() != n {
        return Err(Error::InvalidArgument(format!(
            "target has {} components, basis dimension is {n}",
            target.components.len()
        )));
    }
    if !sq_radius_den.is_positive() {
        return Err(Error::InvalidArgument(
            "squared radius denominator must be positive".into(),
        ));
    }
    if !sq_radius_num.is_positive() {
        return Ok(CandidateSet { candidates: vec![] });
    }
    let (mu, norms) = gram_schmidt(basis.rows())?;
    let coords = solve_coordinates(basis.rows(), &target.components)?;
    let radius_sq = BigRational::new(sq_radius_num.clone(), sq_radius_den.clone());
    let mut en = Enumerator {
        rows: basis.rows(),
        mu,
        norms,
        coords,
        radius_sq,
        target: &target.components,
        num: sq_radius_num,
        den: sq_radius_den,
        cap,
        x: vec![BigInt::zero(); n],
        z: vec![BigRational::zero(); n],
        found: Vec::new(),
    };
    en.run()?;
    let mut candidates = en.found;
    candidates.sort_by(|a, b| {
        (&a.dist_sq, &a.value, &a.vector).cmp(&(&b.dist_sq, &b.value, &b.vector))
    });
    Ok(CandidateSet { candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn basis(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn target(v: &[i64]) -> TargetVector {
        TargetVector {
            components: v.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    #[test]
    fn tiny_radius_finds_only_the_lattice_point() {
        let b = basis(&[&[3, 1], &[8, 0]]);
        let set = enumerate_within(&b, &target(&[0, 0]), &BigInt::one(), &BigInt::one(), 100)
            .unwrap();
        assert_eq!(set.candidates.len(), 1);
        assert_eq!(set.candidates[0].vector, vec![BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn worked_example_radius_sq_20() {
        // 4 |u|^2 < 5 * 16: all u with |u| < sqrt(20).
        let b = basis(&[&[3, 1], &[8, 0]]);
        let set = enumerate_within(
            &b,
            &target(&[0, 0]),
            &BigInt::from(5 * 16),
            &BigInt::from(4),
            100,
        )
        .unwrap();
        let vectors: Vec<Vec<i64>> = set
            .candidates
            .iter()
            .map(|c| c.vector.iter().map(|x| x.try_into().unwrap()).collect())
            .collect();
        assert!(vectors.contains(&vec![1, 3]), "missing (1,3): {vectors:?}");
        assert!(vectors.contains(&vec![0, 0]));
        for c in &set.candidates {
            assert!(c.dist_sq < BigInt::from(20));
        }
        // Matches a plain coefficient-box search.
        let mut expected = vec![];
        for x0 in -16i64..=16 {
            for x1 in -16i64..=16 {
                let u = vec![3 * x0 + 8 * x1, x0];
                let d2 = u[0] * u[0] + u[1] * u[1];
                if 4 * d2 < 80 {
                    expected.push(u);
                }
            }
        }
        expected.sort_by_key(|u| (u[0] * u[0] + u[1] * u[1], u[1], u.clone()));
        assert_eq!(vectors, expected);
    }

    #[test]
    fn empty_results_and_caps() {
        let b = basis(&[&[1, 0], &[0, 1]]);
        let empty = enumerate_within(&b, &target(&[0, 0]), &BigInt::zero(), &BigInt::one(), 10)
            .unwrap();
        assert!(empty.candidates.is_empty());

        let err = enumerate_within(
            &b,
            &target(&[0, 0]),
            &BigInt::from(10_000),
            &BigInt::one(),
            5,
        );
        assert!(matches!(err, Err(Error::TooManyCandidates { cap: 5 })));
    }

    #[test]
    fn strictness_at_the_boundary() {
        // |u - v|^2 = 1 must be excluded by den * d2 < num with num/den = 1.
        let b = basis(&[&[1, 0], &[0, 1]]);
        let set = enumerate_within(&b, &target(&[0, 0]), &BigInt::one(), &BigInt::one(), 100)
            .unwrap();
        assert_eq!(set.candidates.len(), 1); // the origin only
    }
}
