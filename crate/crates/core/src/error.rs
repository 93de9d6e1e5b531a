use thiserror::Error;

/// Errors raised by the phase-space toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("array violates the half-period sign symmetry (max deviation {deviation:e})")]
    SymmetryViolation { deviation: f64 },
    #[error("the restricted even-even basis is incomplete for even d = {0}")]
    EvenDimension(usize),
    #[error("the double phase space lattice Z_d^4 does not give a complete superoperator basis for even d = {0}")]
    IncompleteDoubleBasis(usize),
    #[error("direction (0, 0) has no translation order")]
    ZeroDirection,
    #[error("expected a {expected} array, got a {found} array")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("states are not orthogonal (|<psi1|psi2>| = {overlap:e})")]
    NonOrthogonal { overlap: f64 },
    #[error("operator is not unitary (max |U^dag U - 1| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("operator list is empty")]
    EmptyList,
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
    #[error("labels {0} and {1} have different parity; no integer center and half-chord exist")]
    ParityMismatch(String, String),
    #[error("matrix is not square {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
