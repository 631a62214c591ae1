use thiserror::Error;

/// Every failure the library can report. Numerical "soft" failures carry the
/// best value found so far where that makes sense.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point does not escape under p within {max_iter} iterations")]
    NonEscaping { max_iter: usize },
    #[error("branch of a telescoping factor could not be continued at level {level}")]
    BranchFailure { level: usize },
    #[error("|w| too close to 1: |w|^(2^N) stays below the truncation radius for N <= {max_iter}")]
    PrecisionLoss { max_iter: usize },
    #[error("limit did not converge: last Cauchy gap {gap:e} after {steps} steps")]
    SlowConvergence { gap: f64, steps: usize },
    #[error("Jacobian a = 0: the map is not invertible")]
    ZeroJacobian,
    #[error("point does not enter V+ within {max_iter} forward iterations")]
    NotEscaping { max_iter: usize },
    #[error("point does not enter V- within {max_iter} backward iterations")]
    NotEscapingBackward { max_iter: usize },
    #[error("loop vertex {index} does not lie in U+")]
    NotInUplus { index: usize },
    #[error("adaptive loop refinement exceeded {limit} segments")]
    SubdivisionLimit { limit: usize },
    #[error("Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("continuation stalled at a = {at_a:e} (step halving exhausted)")]
    ContinuationStall { at_a: f64 },
    #[error("solution left the primary component: |x - gamma(xi)| = {distance}")]
    WrongComponent { distance: f64 },
    #[error("points are not on one leaf (difference stopped contracting at step {step})")]
    NotSameLeaf { step: usize },
    #[error("degenerate triple: |B - C| below resolution")]
    DegenerateTriple,
    #[error("gauge function vanishes at theta = {theta}")]
    ZeroGauge { theta: f64 },
    #[error("angle is not periodic under doubling with period {period}")]
    NotPeriodic { period: usize },
    #[error("no unique periodic point near the degenerate seed: {reason}")]
    MatchFailure { reason: String },
    #[error("landing points differ by {gap:e}: angles are not identified")]
    NotIdentified { gap: f64 },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("separating neighborhood failed for element {j}/2^{k} at xi = {xi_arg}, z = ({z_re}, {z_im})")]
    CertificateFailure {
        j: i64,
        k: u32,
        xi_arg: f64,
        z_re: f64,
        z_im: f64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
