use thiserror::Error;

/// Errors raised by the model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("probability {value} has no finite odds (0 and 1 are hardline beliefs)")]
    HardlineProbability { value: f64 },

    #[error("{what} must be finite and positive, got {value}")]
    NotPositiveFinite { what: &'static str, value: f64 },

    #[error("{what} overflowed the representable log range")]
    Overflow { what: &'static str },

    #[error("{what} requires a non-empty sequence")]
    EmptySequence { what: &'static str },

    #[error("suspect pool must contain at least one suspect")]
    EmptyPool,

    #[error("{what}: value {value} outside {bound}")]
    Domain {
        what: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("relevance: conditioning event {event} has zero mass")]
    ZeroMassEvent { event: String },

    #[error("relevance: joint is missing variable {name}")]
    MissingVariable { name: String },

    #[error("relevance: {0}")]
    Schema(String),

    #[error("grid: {0}")]
    Grid(String),

    #[error("thresholds must be strictly decreasing positive integers, got {0:?}")]
    Thresholds((u32, u32, u32)),
}

pub type Result<T> = std::result::Result<T, Error>;
