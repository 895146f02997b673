use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the arithmetic, group, sampling, lattice and
/// pipeline layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be positive, got {0}")]
    InvalidModulus(BigInt),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Inversion failed; the gcd is kept because a nontrivial gcd with an
    /// RSA modulus is an immediate factor.
    #[error("not invertible: gcd with modulus is {gcd}")]
    NotInvertible { gcd: BigInt },

    #[error("elements belong to different groups")]
    MismatchedGroups,

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("degenerate subset: {0}")]
    DegenerateSubset(String),

    #[error("exhaustive mode unavailable: register width {width} exceeds limit {limit}")]
    ExhaustiveModeUnavailable { width: u32, limit: u32 },

    #[error("sampler unavailable: weight tables for width {width} exceed limit {limit}")]
    SamplerUnavailable { width: u32, limit: u32 },

    #[error("target residue not achievable: {0}")]
    UnachievableTarget(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("enumeration exceeded the candidate cap of {cap}")]
    TooManyCandidates { cap: usize },

    #[error("fixture required: {0}")]
    FixtureRequired(String),
}
