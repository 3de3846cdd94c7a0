use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration blow-up at step {step} (t = {t})")]
    Blowup { step: usize, t: f64 },
    #[error("front not found (no downward crossing of level {level})")]
    FrontNotFound { level: f64 },
    #[error("front not converged: alignment residual {residual:.3e}")]
    FrontNotConverged { residual: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("window too small: {crossings} crossings")]
    WindowTooSmall { crossings: usize },
    #[error("leading edge spans too few decades ({decades:.2})")]
    InsufficientDecades { decades: f64 },
    #[error("newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("no oscillation: {0}")]
    Regime(String),
    #[error("integrand changes sign near u = {at}")]
    SingularIntegrand { at: f64 },
    #[error("double root iteration diverged")]
    NoRoot,
    #[error("pinching undetermined: tracked roots did not separate")]
    PinchingUndetermined,
    #[error("no spreading speed bracket in c in (0, 5)")]
    NoSpreadingSpeed,
    #[error("branch ambiguity at nu = {nu}: competing eigenvalue at distance {gap:.3e}")]
    BranchAmbiguity { nu: f64, gap: f64 },
    #[error("kernel multiplicity: {0}")]
    Multiplicity(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("eigensolver failure: {0}")]
    Solver(String),
    #[error("correlation peak {peak:.3} below coherence threshold")]
    LowCoherence { peak: f64 },
    #[error("fit failed (residual {residual:.3e})")]
    FitFailed { residual: f64 },
    #[error("flat misfit landscape: phase undetermined")]
    PhaseUndetermined,
    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
