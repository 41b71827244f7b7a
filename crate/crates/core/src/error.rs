use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed linear program: {0}")]
    MalformedProgram(String),

    #[error("delta {0} is outside the admissible range {1}")]
    DeltaOutOfRange(Rational, &'static str),

    #[error("generators do not span the ambient space (rank {rank} < dimension {dimension})")]
    DegenerateBall { rank: usize, dimension: usize },

    #[error("zero vector at index {0}")]
    ZeroVector(usize),

    #[error("duplicate input vectors at indices {0} and {1}")]
    DuplicateInput(usize, usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("witness does not satisfy the dual system")]
    InvalidWitness,

    #[error("candidate {index} has gauge {gauge}, expected 1")]
    InvalidCandidate { index: usize, gauge: Rational },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
