use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("function is undefined at retained eigenvalue {0:e}")]
    FunctionUndefined(f64),

    /// The first argument has weight outside the support of the second; the
    /// divergence is +infinity.
    #[error("support of the first argument is not contained in the support of the second (divergence is infinite)")]
    InfiniteDivergence,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("dimension cap exceeded: {needed} > {cap}")]
    DimensionCap { needed: u128, cap: u128 },

    #[error("enumeration cap exceeded: {count} > {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("duality gap {gap:.3e} not closed; best bracket [{lo:e}, {hi:e}]")]
    DualityGap { gap: f64, lo: f64, hi: f64 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("channel is not declared covariant with an irreducible input representation")]
    NotCovariant,

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
