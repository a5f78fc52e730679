use thiserror::Error;

pub type Result<T> = std::result::Result<T, EndosError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EndosError {
    #[error("basis configuration has {got} sites but the register has {expected}")]
    MismatchedRegister { expected: usize, got: usize },

    #[error("site index {site} out of range for a register of {size} sites")]
    InvalidSite { site: usize, size: usize },

    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    InvalidQubit { qubit: usize, num_qubits: usize },

    #[error("pulse on {channel} requires the tip to sit on a qubit, but it is parked")]
    TipParked { channel: &'static str },

    #[error("tip is at {actual} but qubit {expected} was addressed")]
    TipElsewhere { expected: usize, actual: String },

    #[error("state norm {norm:e} is too small to renormalize")]
    DegenerateState { norm: f64 },

    #[error("CNOT control and target are both qubit {0}")]
    SameQubit(usize),

    #[error("ill-formed program at instruction {index}: {reason}")]
    IllFormedProgram { index: usize, reason: String },

    #[error("frequency {frequency} Hz matches {matches} readout lines within {tolerance} Hz")]
    UnclassifiableFrequency {
        frequency: f64,
        tolerance: f64,
        matches: usize,
    },

    #[error("sample rate {sample_rate} Hz does not exceed twice the highest line {max_frequency} Hz")]
    AliasingError {
        sample_rate: f64,
        max_frequency: f64,
    },

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl EndosError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        EndosError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
