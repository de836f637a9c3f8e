use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families: validation failures (bad input,
/// malformed configuration) and numerical-contract violations (a matrix
/// that should be unitary is not, an eigensolver that did not converge,
/// a residual above its gate). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N must be odd and at least 3 (got N = {0})")]
    InvalidChainLength(usize),

    #[error("site {site} is outside the chain 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("the zero-magnon state is not part of this basis")]
    ZeroMagnonUnavailable,

    #[error("site collision: {0}")]
    SiteCollision(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |A - A^H| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (||W^H W - I||_F = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("eigensolver did not converge after {sweeps} iterations (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("eigen-residual {residual:.3e} exceeds the gate {gate:.1e}")]
    ResidualGate { residual: f64, gate: f64 },

    #[error("state is not normalized (norm^2 = {0:.15})")]
    NotNormalized(f64),

    #[error("invalid tau grid: {0}")]
    InvalidGrid(String),

    #[error("invalid threshold {0}: must lie in (0.5, 1]")]
    InvalidThreshold(f64),

    #[error("N = {n} exceeds the full-space cap of {cap} qubits")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid processor layout: {0}")]
    InvalidLayout(String),

    #[error("gate arity mismatch: gate acts on {expected} qubits, register B has {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for residual, unitarity and convergence failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotUnitary { .. } | Error::NoConvergence { .. } | Error::ResidualGate { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
