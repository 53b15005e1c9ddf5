//! Crate-wide error type.

use thiserror::Error;

/// Coarse error category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed input: bad config files, invalid cutoffs, mismatched spaces.
    Config,
    /// Physically meaningless parameter regime (e.g. heating regime).
    Physics,
    /// Numerical failure during an otherwise valid computation.
    Numerical,
}

#[derive(Error, Debug)]
pub enum Error {
    // ---- construction / validation ----
    #[error("Fock cutoff must be at least {min}, got {got}")]
    InvalidCutoff { min: usize, got: usize },

    #[error("momentum lattice cutoff must be at least {min}, got {got}")]
    InvalidLattice { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator/state spaces do not match: {0}")]
    SpaceMismatch(String),

    #[error("sparse entry ({row}, {col}) outside a {dim}-dimensional space")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("operator flagged Hermitian deviates from M† by {deviation:.3e} (tolerance {tol:.0e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("state vector flagged normalized has ‖ψ‖² = {norm_sqr:.12} (tolerance {tol:.0e})")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    #[error("density matrix validation failed: {0}")]
    InvalidDensityMatrix(String),

    #[error("partial trace requires a non-empty set of kept factors")]
    EmptyKeepSet,

    #[error("factor index {index} out of range for a space with {count} factors")]
    FactorOutOfRange { index: usize, count: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("expected factor structure {expected}, got {got}")]
    WrongFactorStructure { expected: String, got: String },

    #[error("momentum lattice too small: ground-state width needs cutoff ≥ {needed}, have {have}")]
    LatticeTooSmall { needed: usize, have: usize },

    #[error("dimension {dim} exceeds the dense-solver guard of {guard}")]
    DimensionGuard { dim: usize, guard: usize },

    // ---- physics regime ----
    #[error("no steady state in the heating regime: {0}")]
    HeatingRegime(String),

    #[error("parameters outside the stable regime: {0} (pass the unstable-regime flag to override)")]
    UnstableRegime(String),

    #[error("nothing to herald: jump probability {weight:.3e} is below {tol:.0e}")]
    NothingToHerald { weight: f64, tol: f64 },

    #[error("correlation coefficient undefined: momentum variances ({var1:.3e}, {var2:.3e})")]
    UndefinedCorrelation { var1: f64, var2: f64 },

    // ---- numerics ----
    #[error("squared norm increased by {increase:.3e} in one step (limit {tol:.0e}); drift term is inconsistent")]
    NormIncrease { increase: f64, tol: f64 },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); the problem is too stiff for the configured tolerances")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("no convergence after {t:.3e} time units; residual ‖Δρ‖₁ = {residual:.3e}")]
    NonConvergence { t: f64, residual: f64 },

    #[error("covariance matrix lost physicality: min symplectic eigenvalue {nu_min:.9} < 1/2 − {tol:.0e} at t = {t:.6e}")]
    UnphysicalCovariance { nu_min: f64, t: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    // ---- configuration / IO ----
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Category used for CLI exit codes (2 config, 3 physics, 4 numerical).
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidCutoff { .. }
            | InvalidLattice { .. }
            | DimensionMismatch { .. }
            | SpaceMismatch(_)
            | IndexOutOfRange { .. }
            | NotHermitian { .. }
            | NotNormalized { .. }
            | InvalidDensityMatrix(_)
            | EmptyKeepSet
            | FactorOutOfRange { .. }
            | InvalidParams(_)
            | WrongFactorStructure { .. }
            | LatticeTooSmall { .. }
            | DimensionGuard { .. }
            | Config(_)
            | Io { .. } => ErrorCategory::Config,
            HeatingRegime(_)
            | UnstableRegime(_)
            | NothingToHerald { .. }
            | UndefinedCorrelation { .. } => ErrorCategory::Physics,
            NormIncrease { .. }
            | StepSizeUnderflow { .. }
            | NonConvergence { .. }
            | UnphysicalCovariance { .. }
            | Numerical(_) => ErrorCategory::Numerical,
            Trajectory { source, .. } => source.category(),
        }
    }
}
