use thiserror::Error;

/// Errors produced anywhere in the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integer overflow in {0}; use the log-space path instead")]
    Overflow(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "enumeration of {required} subsets exceeds the budget of {budget}; \
         use the Amari field or the GB upper bound / Monte Carlo estimate"
    )]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("ensemble is not block structured")]
    NotBlockEnsemble,

    #[error("probe must have exactly one active neuron per block")]
    ProbeNotBlockStructured,

    #[error("oracle size guard violated: {0}")]
    OracleTooLarge(String),

    #[error("capacity {value:.3e} exceeds the cap of {cap}")]
    CapacityCap { value: f64, cap: u64 },

    #[error("field convention {field:?} does not match threshold convention {threshold:?}")]
    ConventionMismatch {
        field: crate::fields::Convention,
        threshold: crate::fields::Convention,
    },

    #[error("field and threshold are within the log-space tie band at neuron {neuron}")]
    ThresholdTie { neuron: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
