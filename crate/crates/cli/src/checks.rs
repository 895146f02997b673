//! Lemma and claim verification used by `analyze` and `selftest`.
//!
//! Each check measures a quantity, compares it against its bound, and
//! reports the margin (non-negative iff the bound held).

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sdlog::arith::pow2;
use sdlog::lattice::{default_delta, enumerate_within, lll_reduce, LatticeBasis, TargetVector};
use sdlog::quantum::{
    AlgorithmParams, OutcomePair, ProbabilityModel, Sampler, SecretInstance, StateDistribution,
};
use sdlog::Result;

use crate::report::BoundCheck;

fn check(name: &str, pass: bool, measured: f64, bound: f64, margin: f64, details: String) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        pass,
        measured,
        bound,
        margin,
        details,
    }
}

fn instances(m: u32, ell: u32, ds: &[u64]) -> Result<Vec<SecretInstance>> {
    let params = AlgorithmParams::derive(m, 1, Some(ell))?;
    ds.iter()
        .map(|&d| SecretInstance::new(d, params))
        .collect()
}

/// Sum T_e = 2^{2l+m} and sum T_e^2 >= 2^{3l+m-1}, exactly.
pub fn window_moment_check(m: u32, ell: u32, ds: &[u64]) -> Result<BoundCheck> {
    let mut failures = 0usize;
    for inst in instances(m, ell, ds)? {
        let (sum, sq) = inst.te_moments()?;
        if sum != pow2(2 * ell + m) || sq < pow2(3 * ell + m - 1) {
            failures += 1;
        }
    }
    Ok(check(
        "window_moment_identities",
        failures == 0,
        failures as f64,
        0.0,
        -(failures as f64),
        format!("{} instances at m={m} ell={ell}, exact", ds.len()),
    ))
}

/// Count of good j is at least 2^{l+m-1}, with equality at d = 2^{m-1}.
pub fn good_count_check(m: u32, ell: u32, ds: &[u64]) -> Result<BoundCheck> {
    let floor = 1u64 << (ell + m - 1);
    let mut min_count = u64::MAX;
    let mut equality_ok = true;
    for inst in instances(m, ell, ds)? {
        let count = inst.good_j_count()?;
        min_count = min_count.min(count);
        if inst.d() == 1 << (m - 1) && count != floor {
            equality_ok = false;
        }
    }
    let pass = min_count >= floor && equality_ok;
    Ok(check(
        "good_pair_count",
        pass,
        min_count as f64,
        floor as f64,
        min_count as f64 - floor as f64,
        format!(
            "min over {} instances at m={m} ell={ell}; equality at d=2^(m-1): {equality_ok}",
            ds.len()
        ),
    ))
}

/// Every good pair has probability at least 2^{-m-l-2} (slack 1e-9).
pub fn good_probability_check(m: u32, ell: u32, ds: &[u64]) -> Result<BoundCheck> {
    let floor = (2f64).powi(-(m as i32 + ell as i32 + 2));
    let mut min_p = f64::INFINITY;
    for inst in instances(m, ell, ds)? {
        let model = ProbabilityModel::new(&inst)?;
        for j in inst.good_j_values()? {
            let pair = OutcomePair {
                j,
                k: inst.best_k(j),
            };
            min_p = min_p.min(model.pair_probability(&pair));
        }
    }
    Ok(check(
        "good_pair_probability",
        min_p - floor >= -1e-9,
        min_p,
        floor,
        min_p - floor,
        format!("min over all good pairs at m={m} ell={ell}"),
    ))
}

/// Aggregate good-pair mass is at least 1/8 (slack 1e-9).
pub fn good_mass_check(m: u32, ell: u32, ds: &[u64]) -> Result<BoundCheck> {
    let mut min_mass = f64::INFINITY;
    for inst in instances(m, ell, ds)? {
        let model = ProbabilityModel::new(&inst)?;
        let mass: f64 = inst
            .good_j_values()?
            .map(|j| {
                model.pair_probability(&OutcomePair {
                    j,
                    k: inst.best_k(j),
                })
            })
            .sum();
        min_mass = min_mass.min(mass);
    }
    Ok(check(
        "good_pair_mass",
        min_mass - 0.125 >= -1e-9,
        min_mass,
        0.125,
        min_mass - 0.125,
        format!("min over instances at m={m} ell={ell}"),
    ))
}

/// Brute-force state oracle vs closed form, per-entry agreement to 1e-9.
/// Returns None when the instance is too large for the oracle.
pub fn oracle_check(m: u32, ell: u32, ds: &[u64]) -> Result<Option<BoundCheck>> {
    if 2 * ell + m > 20 {
        return Ok(None);
    }
    let mut max_diff = 0.0f64;
    let mut max_mass_err = 0.0f64;
    for inst in instances(m, ell, ds)? {
        let dist = StateDistribution::build(&inst)?;
        let closed = ProbabilityModel::new(&inst)?.full_marginal();
        for (a, b) in dist.marginal().iter().zip(&closed) {
            max_diff = max_diff.max((a - b).abs());
        }
        max_mass_err = max_mass_err.max((dist.total_mass() - 1.0).abs());
    }
    Ok(Some(check(
        "oracle_marginal_agreement",
        max_diff <= 1e-9 && max_mass_err <= 1e-9,
        max_diff,
        1e-9,
        1e-9 - max_diff,
        format!("max per-entry diff over {} instances at m={m} ell={ell}", ds.len()),
    )))
}

/// Total-variation distance between the sampler's empirical law and the
/// closed-form distribution. The 0.02 floor is calibrated for small
/// outcome spaces at large sample counts; for K outcomes and n samples the
/// expected TV of a perfect sampler is on the order of sqrt(K / (2 pi n)),
/// so the bound widens accordingly.
pub fn sampler_tv_check(
    m: u32,
    ell: u32,
    d: u64,
    samples: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let params = AlgorithmParams::derive(m, 1, Some(ell))?;
    let inst = SecretInstance::new(d, params)?;
    let exact = ProbabilityModel::new(&inst)?.full_marginal();
    let two_l = 1u64 << ell;
    let mut counts = vec![0u64; exact.len()];
    let mut sampler = Sampler::new(&inst)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (pair, _) = sampler.sample_pair(&mut rng);
        counts[(pair.j * two_l + pair.k) as usize] += 1;
    }
    let tv: f64 = exact
        .iter()
        .zip(&counts)
        .map(|(p, &c)| (p - c as f64 / samples as f64).abs())
        .sum::<f64>()
        / 2.0;
    let noise = 2.0 * (exact.len() as f64 / (2.0 * std::f64::consts::PI * samples as f64)).sqrt();
    let bound = 0.02f64.max(noise);
    Ok(check(
        "sampler_tv_distance",
        tv < bound,
        tv,
        bound,
        bound - tv,
        format!(
            "{samples} samples over {} outcomes at m={m} ell={ell} d={d}",
            exact.len()
        ),
    ))
}

/// Fraction of recovery lattices from uniformly sampled good-j tuples that
/// contain a nonzero vector with all coordinates below 2^{m-3}; bounded by
/// 2^{-s-1} plus three standard errors. Runs at ell = ceil(m/s), the only
/// regime where the bound applies (it needs s * ell >= m).
pub fn short_vector_check(m: u32, s: u32, trials: usize, seed: u64) -> Result<BoundCheck> {
    let ell = m.div_ceil(s);
    let params = AlgorithmParams::derive(m, s, None)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let coord_bound = pow2(m - 3);
    // Ball of squared radius (s+1)(2^{m-3}-1)^2 covers the coordinate box.
    let num = BigInt::from(s + 1) * (&coord_bound - 1) * (&coord_bound - 1) + 1;
    let den = BigInt::from(1);
    for _ in 0..trials {
        let d = rng.gen_range(1..(1u64 << m));
        let inst = SecretInstance::new(d, params)?;
        let good: Vec<u64> = inst.good_j_values()?.collect();
        let mut tuple: Vec<u64> = Vec::new();
        while tuple.len() < s as usize {
            let j = good[rng.gen_range(0..good.len())];
            if !tuple.contains(&j) {
                tuple.push(j);
            }
        }
        let n = s as usize + 1;
        let mut rows = vec![vec![BigInt::from(0); n]; n];
        for (i, &j) in tuple.iter().enumerate() {
            rows[0][i] = BigInt::from(j);
        }
        rows[0][n - 1] = BigInt::from(1);
        for (i, row) in rows.iter_mut().enumerate().skip(1) {
            row[i - 1] = pow2(ell + m);
        }
        let basis = lll_reduce(&LatticeBasis::from_rows(rows)?, default_delta())?;
        let target = TargetVector {
            components: vec![BigInt::from(0); n],
        };
        let set = enumerate_within(&basis, &target, &num, &den, 1_000_000)?;
        if set.candidates.iter().any(|c| {
            !c.dist_sq.is_zero() && c.vector.iter().all(|x| x.abs() < coord_bound)
        }) {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    let se = (rate * (1.0 - rate) / trials as f64).sqrt();
    let base = (2f64).powi(-(s as i32) - 1);
    let bound = base + 3.0 * se;
    Ok(check(
        "short_vector_rate",
        rate <= bound,
        rate,
        bound,
        bound - rate,
        format!("{trials} lattices at m={m} s={s} ell={ell}; base bound {base}"),
    ))
}

/// Chi-square uniformity of fiber sampling at significance 0.01.
pub fn fiber_uniformity_check(
    m: u32,
    ell: u32,
    d: u64,
    draws: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let params = AlgorithmParams::derive(m, 1, Some(ell))?;
    let inst = SecretInstance::new(d, params)?;
    let sampler = Sampler::new(&inst)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Sample the fiber of the smallest achievable nonzero target.
    let kappa = d.trailing_zeros();
    let t = 1u64 << kappa;
    let mut counts: std::collections::HashMap<OutcomePair, u64> = Default::default();
    for _ in 0..draws {
        let pair = sampler.sample_fiber(t, &mut rng)?;
        *counts.entry(pair).or_default() += 1;
    }
    let fiber_size = 1u64 << (ell + kappa);
    let expected = draws as f64 / fiber_size as f64;
    let mut chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // Fiber members never drawn contribute (0 - expected)^2 / expected.
    chi2 += (fiber_size - counts.len() as u64) as f64 * expected;
    let df = (fiber_size - 1) as f64;
    let crit = chi_square_critical_001(df);
    Ok(check(
        "fiber_uniformity_chi_square",
        chi2 < crit,
        chi2,
        crit,
        crit - chi2,
        format!("{draws} draws, fiber size {fiber_size}, alpha 0.01"),
    ))
}

/// 0.99 quantile of chi-square: exact for df = 1, Wilson-Hilferty above.
fn chi_square_critical_001(df: f64) -> f64 {
    if df <= 1.0 {
        return 6.635;
    }
    let z = 2.326_347_874_040_841; // standard normal 0.99 quantile
    let term = 1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt();
    df * term.powi(3)
}

/// All d values for a given m.
pub fn all_secrets(m: u32) -> Vec<u64> {
    (1..(1u64 << m)).collect()
}
