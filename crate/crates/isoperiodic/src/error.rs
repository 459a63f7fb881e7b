use thiserror::Error;

/// Failures reported by the engine. Numerical payloads are stored as `f64` for reporting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ordering violated: {0}")]
    OrderingViolation(String),
    #[error("path passes within {distance:e} of branch point {index} (clearance {clearance:e})")]
    PathTooClose {
        index: usize,
        distance: f64,
        clearance: f64,
    },
    #[error("cycle contour cannot separate encircled points: {0}")]
    ContourInfeasible(String),
    #[error("quadrature did not converge with {nodes} nodes (estimate {estimate:e})")]
    NoConvergence { nodes: usize, estimate: f64 },
    #[error("singular period matrix: {0}")]
    SingularPeriodMatrix(String),
    #[error("singular Jacobian in Newton projection")]
    SingularJacobian,
    #[error("Newton projection made no progress (residual {residual:e})")]
    NoProgress { residual: f64 },
    #[error("Omega vanishes at P_u{0}; flow undefined")]
    VanishingOmegaAtU(usize),
    #[error("singular locus reached: {0}")]
    SingularLocus(String),
    #[error("drift {drift:e} exceeds tolerance {tol:e}")]
    DriftExceeded { drift: f64, tol: f64 },
    #[error("argument lies on the period lattice")]
    LatticePoint,
    #[error("root localization failed: {0}")]
    RootLocalizationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
