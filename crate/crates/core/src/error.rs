use thiserror::Error;

/// Errors raised by kernel construction and the spectral analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MhError {
    #[error("invalid {what}: {reason}")]
    InvalidKernel { what: &'static str, reason: String },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chain is reducible: state {from} cannot reach state {to}")]
    ReducibleChain { from: usize, to: usize },

    #[error("stationary solve produced a non-positive entry {value:e} at state {state}")]
    NonPositiveStationary { state: usize, value: f64 },

    #[error("distribution is not stationary for the kernel (residual {residual:e})")]
    NotStationary { residual: f64 },

    #[error("base generator fails detailed balance (residual {residual:e})")]
    NotReversibleBase { residual: f64 },

    #[error("operator is not self-adjoint in L2(pi) (asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("precondition violated at state {state}: {reason}")]
    PreconditionViolated { state: usize, reason: String },

    #[error("pseudospectral reconstruction mismatch at ({x}, {y}): deviation {deviation:e}")]
    ReconstructionMismatch { x: usize, y: usize, deviation: f64 },

    #[error("MH-spectral gap is zero; bound is vacuous")]
    ZeroGap,

    #[error("resolvent I - (P - Pi) is numerically singular")]
    SingularResolvent,

    #[error("truncation discards {tail_mass:e} of the stationary mass")]
    BadTruncation { tail_mass: f64 },

    #[error("dominant-eigenvalue assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("set has degenerate stationary mass {mass}")]
    DegenerateSet { mass: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("problem too large: {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("bad parameters: {0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, MhError>;
