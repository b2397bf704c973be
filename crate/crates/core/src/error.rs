use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("theta = {theta} lies outside the exponent domain [{lo}, {hi}]")]
    Domain { theta: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    DomainMsg(String),

    #[error("root finding did not converge: {0}")]
    Convergence(String),

    #[error("no positive Cramer root: psi < 0 on (0, theta_max)")]
    NoCramerRoot,

    #[error("proportion v = {v} is not feasible (psi' range is ({lo}, {hi}))")]
    InfeasibleProportion { v: f64, lo: f64, hi: f64 },

    #[error("proportion v = {v} is too close to the regime boundary psi'(gamma) = {boundary}")]
    BoundaryProportion { v: f64, boundary: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("Laplace inversion lost precision (estimated error {estimate:e})")]
    PrecisionLoss { estimate: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("path covers [0, {have}] but [0, {need}] is required")]
    Horizon { need: f64, have: f64 },

    #[error("effective sample size {ess:.1} below floor {floor:.1}")]
    EffectiveSampleSize { ess: f64, floor: f64 },

    #[error("tail function underflows at u = {u}")]
    Underflow { u: f64 },

    #[error("condition {0} violated")]
    ConditionViolated(String),

    #[error("assembled probability {value} lies outside [0, 1]")]
    NumericRange { value: f64 },

    #[error("argument r = {r} is within {gap:e} of the pole Phi(s) = {pole}")]
    PoleProximity { r: f64, pole: f64, gap: f64 },
}
