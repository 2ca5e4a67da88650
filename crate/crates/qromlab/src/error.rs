//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A requested enumeration or allocation exceeds a configured cap.
    #[error("capacity exceeded for {what}: requested {requested}, cap {cap}")]
    Capacity {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    /// A structural precondition on arguments failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An index or value lies outside the domain or range it must belong to.
    #[error("{what} out of range: {value} not below {bound}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    /// A matrix failed the unitarity check.
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// A matrix failed the projector (idempotent, self-adjoint) check.
    #[error("matrix is not a projector (max deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    /// A basis-map table failed the bijection check.
    #[error("index map is not a permutation (first collision at image {index})")]
    NotPermutation { index: usize },

    /// A state that must be normalized is not, and cannot be fixed up.
    #[error("state has squared norm {norm2:.3e}, expected 1")]
    NotNormalized { norm2: f64 },

    /// A harness forced a measurement outcome whose probability is zero.
    #[error("forced measurement outcome {outcome} has zero probability")]
    ZeroProbabilityBranch { outcome: usize },

    /// An adversary left amplitude outside the |0> branch of the query
    /// response register at the end of a full run.
    #[error("response register not returned to |0> (stray mass {mass:.3e})")]
    ResponseConvention { mass: f64 },

    /// A projective predicate has no projector for the requested cell.
    #[error("predicate undefined at cell (x = {x}, theta = {theta})")]
    UndefinedPredicateCell { x: usize, theta: usize },

    /// No irreducible polynomial is tabulated for the requested field size.
    #[error("unsupported binary field GF(2^{m})")]
    UnsupportedField { m: u32 },

    /// The group parameters do not describe a prime-order subgroup.
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    /// Witness extraction failed.
    #[error("extraction failed: {0}")]
    Extraction(ExtractFailure),

    /// The Fiat-Shamir prover exhausted its retry budget.
    #[error("proof search exhausted after {iterations} iterations")]
    ProofSearchExhausted { iterations: u32 },
}

/// Why a transcript-combining extractor returned no witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExtractFailure {
    #[error("challenge collision")]
    ChallengeCollision,
    #[error("a transcript fails verification")]
    RejectedTranscript,
    #[error("too few transcripts: got {got}, need {need}")]
    TooFewTranscripts { got: usize, need: usize },
    #[error("protocol does not support extraction")]
    Unsupported,
}
