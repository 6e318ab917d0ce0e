use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: u64, max: u64 },
    #[error("{0} is divisible by the modulus {1}")]
    NotCoprime(u64, u64),
    #[error("dual-side truncation not certified: {0}")]
    TruncationNotCertified(String),
    #[error("support [{0}, {1}] too short for Q = {2}")]
    DegenerateSupport(f64, f64, f64),
    #[error("delta {0} outside (0, 1/2)")]
    InvalidDelta(f64),
    #[error("quadrature for y = {0} exceeds the oscillation budget")]
    OscillationBudgetExceeded(f64),
    #[error("integer overflow at n = {0}")]
    Overflow(usize),
    #[error("tail not certified: {0}")]
    TailNotCertified(String),
    #[error("range {0}..={1} outside [1, {2}]")]
    RangeOutOfBounds(u64, u64, u64),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("exponent tuple invalid: {0}")]
    TupleInvariantViolated(String),
    #[error("grid step {0} too coarse")]
    GridTooCoarse(f64),
    #[error("no convergence: {0}")]
    ConvergenceFailure(String),
    #[error("degenerate Gauss sum for character {0}")]
    GaussSumDegenerate(u64),
    #[error("cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
