//! End-to-end pipelines: accumulate measurement pairs, search subsets,
//! recover the exponent, and the reductions that recast RSA factoring and
//! order finding with side information as short-dlog solves.
//!
//! Architectural boundary: the secret enters only the sampler. Recovery and
//! verification work from public data, so a successful run demonstrates the
//! algorithm rather than leaking the answer.

pub mod fixtures;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::arith::{isqrt_exact, pow2};
use crate::error::{Error, Result};
use crate::group::{GroupElement, MulGroup, SampledElement};
use crate::lattice::recover_d;
use crate::quantum::{AlgorithmParams, OutcomePair, Sampler, SecretInstance};
use fixtures::RsaFixture;

/// Knobs for one solve: subset width s, samples per round (t = 8 s by
/// default), round and subset caps, and the seeded rng stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub s: u32,
    pub ell: Option<u32>,
    pub samples_per_round: usize,
    pub max_rounds: u32,
    pub subset_cap: u64,
    pub seed: u64,
    /// Distinct trials use distinct streams of the same seed, so trial
    /// results are independent of scheduling.
    pub stream: u64,
}

impl SolveConfig {
    pub fn new(s: u32) -> Self {
        SolveConfig {
            s,
            ell: None,
            samples_per_round: 8 * s as usize,
            max_rounds: 3,
            subset_cap: 10_000,
            seed: 0,
            stream: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64, stream: u64) -> Self {
        self.seed = seed;
        self.stream = stream;
        self
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// What a successful pipeline run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recovered {
    Dlog(BigInt),
    Factors { p: BigInt, q: BigInt },
    Order(BigInt),
}

/// Trace of one solve: the recovered value (when verification succeeded)
/// plus counters and the per-round pair lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub recovered: Option<Recovered>,
    pub rounds: u32,
    pub samples_drawn: u64,
    pub subsets_tried: u64,
    pub good_pairs: u64,
    pub pairs_per_round: Vec<Vec<OutcomePair>>,
}

impl SolveOutcome {
    fn empty() -> Self {
        SolveOutcome {
            recovered: None,
            rounds: 0,
            samples_drawn: 0,
            subsets_tried: 0,
            good_pairs: 0,
            pairs_per_round: Vec::new(),
        }
    }
}

/// Repeatedly draw batches of pairs, accumulate a deduplicated pool, and
/// run the lattice recovery over size-s subsets with distinct j in
/// lexicographic order (capped per round). Returns on the first verified
/// value; exhausting `max_rounds` yields a failure outcome, not an error.
pub fn solve_short_dlog<F>(
    inst: &SecretInstance,
    verify: F,
    cfg: &SolveConfig,
) -> Result<SolveOutcome>
where
    F: Fn(&BigInt) -> bool,
{
    solve_with_rng(inst, &verify, cfg, &mut cfg.rng())
}

fn solve_with_rng<F>(
    inst: &SecretInstance,
    verify: &F,
    cfg: &SolveConfig,
    rng: &mut ChaCha20Rng,
) -> Result<SolveOutcome>
where
    F: Fn(&BigInt) -> bool,
{
    let s = inst.params().s() as usize;
    if cfg.samples_per_round < s {
        return Err(Error::InvalidArgument(format!(
            "samples_per_round {} below the subset size {s}",
            cfg.samples_per_round
        )));
    }
    if cfg.max_rounds == 0 || cfg.subset_cap == 0 {
        return Err(Error::InvalidArgument("round and subset caps must be positive".into()));
    }
    let mut sampler = Sampler::new(inst)?;
    let mut outcome = SolveOutcome::empty();
    let mut pool: Vec<OutcomePair> = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();

    for _ in 0..cfg.max_rounds {
        outcome.rounds += 1;
        let mut drawn = Vec::with_capacity(cfg.samples_per_round);
        for _ in 0..cfg.samples_per_round {
            let (pair, _e) = sampler.sample_pair(rng);
            outcome.samples_drawn += 1;
            if inst.is_good(&pair) {
                outcome.good_pairs += 1;
            }
            drawn.push(pair);
        }
        let old_len = pool.len();
        for pair in &drawn {
            if seen.insert((pair.j, pair.k)) {
                pool.push(*pair);
            }
        }
        outcome.pairs_per_round.push(drawn);
        if pool.len() < s {
            continue;
        }

        let mut tried_this_round = 0u64;
        let mut found = None;
        let mut js = Vec::with_capacity(s);
        visit_combinations(pool.len(), s, |idx| {
            // Subsets entirely inside the old pool were already visited in
            // an earlier round (or fell past its cap); only new-pair
            // subsets are attempted, keeping the order deterministic.
            if idx[s - 1] < old_len {
                return Ok(true);
            }
            js.clear();
            js.extend(idx.iter().map(|&i| pool[i].j));
            js.sort_unstable();
            if js.windows(2).any(|w| w[0] == w[1]) {
                return Ok(true);
            }
            if tried_this_round >= cfg.subset_cap {
                return Ok(false);
            }
            tried_this_round += 1;
            outcome.subsets_tried += 1;
            let subset: Vec<OutcomePair> = idx.iter().map(|&i| pool[i]).collect();
            match recover_d(&subset, inst.params(), verify) {
                Ok(Some(d)) => {
                    found = Some(d);
                    Ok(false)
                }
                Ok(None) => Ok(true),
                // A pathological subset with a huge candidate cloud is an
                // infeasible search, i.e. a failed subset.
                Err(Error::TooManyCandidates { .. }) => Ok(true),
                Err(e) => Err(e),
            }
        })?;
        if let Some(d) = found {
            outcome.recovered = Some(Recovered::Dlog(d));
            return Ok(outcome);
        }
    }
    Ok(outcome)
}

/// Visit size-s index combinations of [0, n) in lexicographic order until
/// the callback asks to stop (returns false).
fn visit_combinations<F>(n: usize, s: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<bool>,
{
    if s == 0 || s > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        if !f(&idx)? {
            return Ok(());
        }
        // Advance to the next combination.
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + n - s {
                idx[i] += 1;
                for j in i + 1..s {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Configuration of the factoring reduction on top of the solve knobs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorConfig {
    pub solve: SolveConfig,
    /// Use the shorter exponent (N - 1) - 2^n instead of (N - 1) / 2.
    pub reduced_exponent: bool,
    /// m = n instead of the conservative default m = n + 1.
    pub tight_m: bool,
    pub max_generator_attempts: u32,
}

impl FactorConfig {
    pub fn new(s: u32) -> Self {
        FactorConfig {
            solve: SolveConfig::new(s),
            reduced_exponent: false,
            tight_m: false,
            max_generator_attempts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorOutcome {
    /// (p, q) with p >= q and p q = N, when factoring succeeded.
    pub factors: Option<(BigInt, BigInt)>,
    /// A randomly drawn g shared a factor with N; zero samples were used.
    pub gcd_shortcut: bool,
    pub generator_attempts: u32,
    pub rounds: u32,
    pub samples_drawn: u64,
    pub subsets_tried: u64,
    pub good_pairs: u64,
    pub n_half: u32,
    pub params: AlgorithmParams,
    /// Index t = phi(N) / ord(g) of the working subgroup, when computable.
    pub subgroup_index: Option<BigInt>,
    /// Whether t < 2^{n - l - 4}, the requirement for the run to count as
    /// order-requirement-satisfied.
    pub order_requirement_met: Option<bool>,
}

/// p and q from their half sum c = (p + q) / 2: the roots of the quadratic
/// are c +- sqrt(c^2 - N) when the discriminant is an exact square.
pub fn factors_from_half_sum(n: &BigInt, c: &BigInt) -> Option<(BigInt, BigInt)> {
    let disc = c * c - n;
    if disc.is_negative() {
        return None;
    }
    let (root, exact) = isqrt_exact(&disc).ok()?;
    if !exact {
        return None;
    }
    let p = c + &root;
    let q = c - &root;
    if q > BigInt::one() && &p * &q == *n {
        Some((p, q))
    } else {
        None
    }
}

/// Factor an RSA integer by recasting it as a short dlog problem:
/// x = g^{(N-1)/2} equals g^{(p+q-2)/2}, the logarithm is recovered by the
/// solve pipeline, and (p, q) follow from the quadratic.
///
/// The sampler needs the secret half sum, so a fixture is required for any
/// path that actually draws samples; recovery and verification only ever
/// see (g, x, N).
pub fn factor_rsa(
    n: &BigInt,
    n_hint: Option<u32>,
    cfg: &FactorConfig,
    fixture: Option<&RsaFixture>,
) -> Result<FactorOutcome> {
    if n.bits() > 64 {
        return Err(Error::InvalidArgument("N beyond 64-bit desk scale".into()));
    }
    if !n.is_odd() || *n < BigInt::from(15) {
        return Err(Error::InvalidArgument("N must be an odd composite >= 15".into()));
    }
    if crate::group::is_prime(n) {
        return Err(Error::InvalidArgument("N is prime".into()));
    }
    if let Some(f) = fixture {
        if f.n() != *n {
            return Err(Error::InvalidArgument("fixture does not match N".into()));
        }
    }
    let n_half = n_hint.unwrap_or_else(|| (n.bits() as u32).div_ceil(2));
    let m = if cfg.reduced_exponent || cfg.tight_m {
        n_half
    } else {
        n_half + 1
    };
    let params = AlgorithmParams::derive(m, cfg.solve.s, cfg.solve.ell)?;

    let secret: Option<BigInt> = fixture.map(|f| {
        if cfg.reduced_exponent {
            &f.p + &f.q - 2 - pow2(n_half)
        } else {
            f.half_sum_secret()
        }
    });

    let group = MulGroup::new(n.clone())?;
    let exponent = if cfg.reduced_exponent {
        n - 1 - pow2(n_half)
    } else {
        (n - 1) / 2
    };

    let mut outcome = FactorOutcome {
        factors: None,
        gcd_shortcut: false,
        generator_attempts: 0,
        rounds: 0,
        samples_drawn: 0,
        subsets_tried: 0,
        good_pairs: 0,
        n_half,
        params,
        subgroup_index: None,
        order_requirement_met: None,
    };

    let mut rng = cfg.solve.rng();
    for _ in 0..cfg.max_generator_attempts {
        outcome.generator_attempts += 1;
        let g = match group.random_element(&mut rng) {
            SampledElement::NontrivialGcd(f) => {
                let other = n / &f;
                let (p, q) = if f >= other { (f, other) } else { (other, f) };
                outcome.factors = Some((p, q));
                outcome.gcd_shortcut = true;
                return Ok(outcome);
            }
            SampledElement::Unit(g) => g,
        };
        let x = g.pow(&exponent)?;
        if x.is_identity() {
            if cfg.reduced_exponent {
                // d' = 0 means p + q = 2^n + 2, independent of g; solve the
                // quadratic directly before retrying for the small-order case.
                let c = pow2(n_half - 1) + 1;
                if let Some(pq) = factors_from_half_sum(n, &c) {
                    outcome.factors = Some(pq);
                    finish_accounting(&mut outcome, n, &g, n_half);
                    return Ok(outcome);
                }
            }
            continue; // ord(g) divides the secret; resample g
        }

        let Some(secret) = secret.as_ref() else {
            return Err(Error::FixtureRequired(
                "sampling the quantum stage needs the fixture's secret half sum".into(),
            ));
        };
        if !secret.is_positive() || *secret >= pow2(m) {
            return Err(Error::InvalidArgument(format!(
                "fixture secret {secret} outside (0, 2^{m}); not an RSA-shaped N"
            )));
        }
        let d = secret.to_u64().expect("secret < 2^m <= 2^62");
        let inst = SecretInstance::new(d, params)?;
        let verify = |c: &BigInt| g.pow(c).map(|y| y == x).unwrap_or(false);
        let sub = solve_with_rng(&inst, &verify, &cfg.solve, &mut rng)?;
        outcome.rounds += sub.rounds;
        outcome.samples_drawn += sub.samples_drawn;
        outcome.subsets_tried += sub.subsets_tried;
        outcome.good_pairs += sub.good_pairs;

        if let Some(Recovered::Dlog(c)) = sub.recovered {
            let sum_pq: BigInt = if cfg.reduced_exponent {
                c + pow2(n_half) + 2
            } else {
                (c + 1) * 2
            };
            if sum_pq.is_odd() {
                continue; // inconsistent candidate, retry with a new g
            }
            let half = sum_pq / 2;
            if let Some(pq) = factors_from_half_sum(n, &half) {
                outcome.factors = Some(pq);
                finish_accounting(&mut outcome, n, &g, n_half);
                return Ok(outcome);
            }
            // Verified candidate with a non-square discriminant: retry.
            continue;
        }
    }
    Ok(outcome)
}

/// Order accounting once the factors are known: t = phi / ord(g) and the
/// requirement t < 2^{n - l - 4}.
fn finish_accounting(outcome: &mut FactorOutcome, n: &BigInt, g: &GroupElement, n_half: u32) {
    let Some((p, q)) = outcome.factors.clone() else {
        return;
    };
    if &p * &q != *n {
        return;
    }
    let phi = (&p - 1) * (&q - 1);
    let Ok(ord) = fixtures::element_order(g, &phi) else {
        return;
    };
    let t = &phi / &ord;
    let ell = outcome.params.ell();
    let met = if n_half > ell + 4 {
        t < pow2(n_half - ell - 4)
    } else {
        false
    };
    outcome.subgroup_index = Some(t);
    outcome.order_requirement_met = Some(met);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderOutcome {
    pub order: Option<BigInt>,
    /// The hint already was the order; no samples were drawn.
    pub skipped_sampling: bool,
    pub rounds: u32,
    pub samples_drawn: u64,
    pub subsets_tried: u64,
    pub good_pairs: u64,
}

/// Recover the order r of g from an approximation r0 with
/// 0 <= r - r0 < 2^m, as the short dlog of x = g^{-r0}. The group must
/// carry its known order (simulation fixture); verification only powers g.
pub fn order_with_hint(
    group: &MulGroup,
    g: &GroupElement,
    r0: &BigInt,
    m: u32,
    cfg: &SolveConfig,
) -> Result<OrderOutcome> {
    let r = group
        .known_order()
        .ok_or_else(|| Error::FixtureRequired("simulation needs the known order".into()))?;
    if r0.is_negative() {
        return Err(Error::InvalidArgument("r0 must be non-negative".into()));
    }
    let d_big = r - r0;
    if d_big.is_negative() || d_big >= pow2(m) {
        return Err(Error::InvalidArgument(format!(
            "hint violates 0 <= r - r0 < 2^{m}"
        )));
    }

    // d = 0 is detected directly, before any sampling. r0 = 0 is excluded:
    // g^0 is trivially the identity and says nothing about the order.
    if r0.is_positive() && g.pow(r0)?.is_identity() {
        return Ok(OrderOutcome {
            order: Some(r0.clone()),
            skipped_sampling: true,
            rounds: 0,
            samples_drawn: 0,
            subsets_tried: 0,
            good_pairs: 0,
        });
    }

    let params = AlgorithmParams::derive(m, cfg.s, cfg.ell)?;
    let d = d_big.to_u64().expect("d < 2^m <= 2^62");
    let inst = SecretInstance::new(d, params)?;
    if *r < inst.order_requirement() {
        return Err(Error::InvalidArgument(format!(
            "order {r} below the requirement {}; lower ell or enlarge the group",
            inst.order_requirement()
        )));
    }

    let x = g.pow(&-r0)?;
    debug_assert_eq!(g.pow(&d_big)?, x);
    let identity = x.pow(&BigInt::zero())?;
    let verify = |c: &BigInt| {
        let e = c + r0;
        e.is_positive() && g.pow(&e).map(|y| y == identity).unwrap_or(false)
    };
    let sub = solve_with_rng(&inst, &verify, cfg, &mut cfg.rng())?;
    let order = match &sub.recovered {
        Some(Recovered::Dlog(c)) => Some(r0 + c),
        _ => None,
    };
    Ok(OrderOutcome {
        order,
        skipped_sampling: false,
        rounds: sub.rounds,
        samples_drawn: sub.samples_drawn,
        subsets_tried: sub.subsets_tried,
        good_pairs: sub.good_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fixtures::{make_dlog_fixture, make_rsa_fixture};
    use rand::SeedableRng;

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        visit_combinations(4, 2, |idx| {
            seen.push(idx.to_vec());
            Ok(true)
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn quadratic_recovery_identities() {
        // N = 143: d = 11, c = 12, disc = 1.
        let got = factors_from_half_sum(&BigInt::from(143), &BigInt::from(12)).unwrap();
        assert_eq!(got, (BigInt::from(13), BigInt::from(11)));
        // N = 221: d = 14, c = 15, disc = 4.
        let got = factors_from_half_sum(&BigInt::from(221), &BigInt::from(15)).unwrap();
        assert_eq!(got, (BigInt::from(17), BigInt::from(13)));
        assert!(factors_from_half_sum(&BigInt::from(143), &BigInt::from(13)).is_none());
    }

    #[test]
    fn solve_recovers_single_good_pair_instance() {
        // s = 1: a single good pair suffices.
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(21);
        let fixture = make_dlog_fixture(6, 1, None, None, None, &mut rng).unwrap();
        let cfg = SolveConfig::new(1).with_seed(9, 0);
        let out = solve_short_dlog(&fixture.instance, |c| fixture.verify(c), &cfg).unwrap();
        match out.recovered {
            Some(Recovered::Dlog(d)) => assert_eq!(d, BigInt::from(fixture.instance.d())),
            other => panic!("expected recovery, got {other:?}"),
        }
    }

    #[test]
    fn solve_is_deterministic_per_seed() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(22);
        let fixture = make_dlog_fixture(8, 2, None, None, Some(201), &mut rng).unwrap();
        let cfg = SolveConfig::new(2).with_seed(5, 3);
        let a = solve_short_dlog(&fixture.instance, |c| fixture.verify(c), &cfg).unwrap();
        let b = solve_short_dlog(&fixture.instance, |c| fixture.verify(c), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solve_failure_is_an_outcome() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(23);
        let fixture = make_dlog_fixture(8, 2, None, None, Some(77), &mut rng).unwrap();
        let cfg = SolveConfig {
            max_rounds: 1,
            samples_per_round: 2,
            ..SolveConfig::new(2).with_seed(1, 0)
        };
        let out = solve_short_dlog(&fixture.instance, |_| false, &cfg).unwrap();
        assert!(out.recovered.is_none());
        assert_eq!(out.rounds, 1);
        assert_eq!(out.samples_drawn, 2);
    }

    #[test]
    fn factor_rsa_requires_fixture_for_sampling() {
        let cfg = FactorConfig::new(2);
        let err = factor_rsa(&BigInt::from(143), None, &cfg, None);
        assert!(matches!(err, Err(Error::FixtureRequired(_))));
    }

    #[test]
    fn gcd_shortcut_factors_without_sampling() {
        // 105 = 3 * 5 * 7: roughly half of the residues share a factor, so
        // some seed hits the shortcut on its first draw, needing no fixture.
        let mut found = false;
        for seed in 0..50u64 {
            let mut cfg = FactorConfig::new(2);
            cfg.solve = cfg.solve.with_seed(seed, 0);
            cfg.max_generator_attempts = 1;
            if let Ok(out) = factor_rsa(&BigInt::from(105), None, &cfg, None) {
                if out.gcd_shortcut {
                    assert_eq!(out.samples_drawn, 0);
                    let (p, q) = out.factors.unwrap();
                    assert_eq!(&p * &q, BigInt::from(105));
                    assert!(q > BigInt::from(1));
                    found = true;
                    break;
                }
            }
        }
        assert!(found, "no seed hit the gcd shortcut");
    }

    #[test]
    fn solve_propagates_sampler_guard() {
        // l + m beyond the table bound: the solve surfaces the guard error
        // instead of silently failing.
        let params = AlgorithmParams::derive(40, 2, Some(20)).unwrap();
        let inst = SecretInstance::new(12345, params).unwrap();
        let cfg = SolveConfig::new(2);
        assert!(matches!(
            solve_short_dlog(&inst, |_| false, &cfg),
            Err(Error::SamplerUnavailable { .. })
        ));
    }

    #[test]
    fn factor_rsa_validates_inputs() {
        let cfg = FactorConfig::new(2);
        assert!(factor_rsa(&BigInt::from(144), None, &cfg, None).is_err()); // even
        assert!(factor_rsa(&BigInt::from(607), None, &cfg, None).is_err()); // prime
    }

    #[test]
    fn factor_rsa_small_fixture() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(24);
        let fixture = make_rsa_fixture(6, &mut rng).unwrap();
        let n = fixture.n();
        let mut cfg = FactorConfig::new(2);
        cfg.solve = cfg.solve.with_seed(11, 0);
        let out = factor_rsa(&n, Some(6), &cfg, Some(&fixture)).unwrap();
        if let Some((p, q)) = &out.factors {
            assert_eq!(p * q, n);
            assert!(p >= q);
        } else {
            panic!("expected 12-bit N to factor, outcome {out:?}");
        }
        assert_eq!(out.params.m(), 7); // paper default m = n + 1
    }
}
