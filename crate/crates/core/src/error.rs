use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("degenerate vocabulary: no negative distinct from the context word can be drawn")]
    DegenerateVocabulary,

    #[error("negative table size {size} is smaller than the vocabulary ({vocab} words)")]
    TableTooSmall { size: usize, vocab: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("zero-norm embedding")]
    ZeroNorm,

    #[error("vector is not normalized (squared norm off by {0:e})")]
    NotNormalized(f64),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    InvalidQubit { qubit: usize, n_qubits: usize },

    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("expected {expected} circuit parameters, got {got}")]
    ParamCount { expected: usize, got: usize },

    #[error("unknown ansatz id {0:?}")]
    UnknownAnsatz(String),

    #[error("ansatz shapes differ")]
    AnsatzMismatch,

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("undefined correlation: constant input")]
    UndefinedCorrelation,

    #[error("only {covered} of {total} pairs covered; at least 2 are needed")]
    TooFewPairs { covered: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
