use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported filter: {family} with {number} vanishing moments")]
    UnsupportedFilter { family: String, number: usize },
    #[error("inner product matrix is numerically singular (rcond = {rcond:e})")]
    SingularInnerProductMatrix { rcond: f64 },
    #[error("series length {0} is not dyadic (2^J with J >= 2)")]
    NonDyadicLength(usize),
    #[error("lag table for T = {0} exceeds the supported maximum of 2^14")]
    TooLong(usize),
    #[error("eigen iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is indefinite (eigenvalue {0:e} below clamp threshold)")]
    IndefiniteMatrix(f64),
    #[error("spectrum slice at level {level}, location {location} is indefinite")]
    IndefiniteSpectrum { level: usize, location: usize },
    #[error("kernel half-width {m} too wide for series length {t}")]
    KernelTooWide { m: usize, t: usize },
    #[error("kernel has w(0) = {0} >= 1; GCV undefined")]
    DegenerateKernel(f64),
    #[error("kernel {given} does not match the kernel {expected} recorded with the spectrum")]
    KernelMismatch { given: String, expected: String },
    #[error("non-positive diagonal entry at channel {channel}, level {level}, location {location}")]
    ZeroDiagonal {
        channel: usize,
        level: usize,
        location: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("argument outside domain: {0}")]
    DomainError(String),
    #[error("bootstrap replicate {0} failed: {1}")]
    ReplicateFailed(usize, String),
    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseError { row: usize, col: usize, msg: String },
    #[error("non-positive value {value} at row {row}, column {col}")]
    NonPositiveValue { row: usize, col: usize, value: f64 },
    #[error("plot info does not match array: {0}")]
    InfoMismatch(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable kebab-case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnsupportedFilter { .. } => "unsupported-filter",
            Error::SingularInnerProductMatrix { .. } => "singular-inner-product-matrix",
            Error::NonDyadicLength(_) => "non-dyadic-length",
            Error::TooLong(_) => "too-long",
            Error::NoConvergence(_) => "no-convergence",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::IndefiniteMatrix(_) => "indefinite-matrix",
            Error::IndefiniteSpectrum { .. } => "indefinite-spectrum",
            Error::KernelTooWide { .. } => "kernel-too-wide",
            Error::DegenerateKernel(_) => "degenerate-kernel",
            Error::KernelMismatch { .. } => "kernel-mismatch",
            Error::ZeroDiagonal { .. } => "zero-diagonal",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::IndexOutOfRange(_) => "index-out-of-range",
            Error::DomainError(_) => "domain-error",
            Error::ReplicateFailed(..) => "replicate-failed",
            Error::ParseError { .. } => "parse-error",
            Error::NonPositiveValue { .. } => "non-positive-value",
            Error::InfoMismatch(_) => "info-mismatch",
            Error::InvalidBundle(_) => "invalid-bundle",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
