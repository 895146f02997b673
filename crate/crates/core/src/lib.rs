//! Classical simulation and verification toolkit for short discrete
//! logarithm recovery.
//!
//! The crate models the measurement stage of a short-dlog procedure with
//! tradeoff parameter s (closed-form outcome probabilities, a brute-force
//! oracle for tiny parameters, and an exact scalable sampler), implements
//! the lattice-based classical post-processing that combines s good pairs
//! into the logarithm, and layers the two reductions on top: factoring RSA
//! integers and order finding under side information.
//!
//! Everything correctness-critical is exact integer or rational
//! arithmetic; floating point only appears in probability values and
//! statistical summaries.

pub mod arith;
pub mod error;
pub mod group;
pub mod lattice;
pub mod pipelines;
pub mod quantum;

pub use error::{Error, Result};
pub use num_bigint::BigInt;

pub use group::{make_safe_prime_group, GroupElement, MulGroup, SampledElement};
pub use lattice::{
    build_problem, enumerate_within, lll_reduce, Candidate, CandidateSet, LatticeBasis,
    TargetVector,
};
pub use pipelines::fixtures::{
    make_fixture, DlogFixture, Fixture, FixtureRequest, OrderFixture, RsaFixture,
};
pub use pipelines::{
    factor_rsa, factors_from_half_sum, order_with_hint, solve_short_dlog, FactorConfig,
    FactorOutcome, OrderOutcome, Recovered, SolveConfig, SolveOutcome,
};
pub use quantum::{
    pair_probability, sample_pair, AlgorithmParams, BRange, OutcomePair, ProbabilityModel,
    Sampler, SecretInstance, StateDistribution,
};
