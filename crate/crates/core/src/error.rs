use thiserror::Error;

/// Errors raised while validating or combining designs, codes and outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SqgtError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("entry {value} at test {test}, subject {subject} is outside the alphabet [0, {q})")]
    EntryOutOfAlphabet {
        value: u32,
        test: usize,
        subject: usize,
        q: u32,
    },

    #[error("entry {value} at test {test}, subject {subject} is not binary")]
    NonBinary {
        value: u32,
        test: usize,
        subject: usize,
    },

    #[error("subject index {index} out of range for {len} subjects")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate subject index {0}")]
    DuplicateIndex(usize),

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("outcome {value} at test {test} is outside [0, {levels})")]
    OutcomeOutOfRange {
        value: u32,
        test: usize,
        levels: u32,
    },

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("estimated work {work} exceeds the configured cap {cap}")]
    WorkLimit { work: u128, cap: u128 },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SqgtError>;
