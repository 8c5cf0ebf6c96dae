use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("laguerre recurrence produced a non-finite entry at n = {n}")]
    LaguerreOverflow { n: usize },

    #[error("singular boundary system; conflicting conditions: {0}")]
    SingularBoundary(String),

    #[error("endpoint limit of delta failed at t = {t}")]
    EndpointLimit { t: f64 },

    #[error("branch selection failed: |Im Ω| = {im:e} at t = {t} exceeds tolerance")]
    BranchSelection { t: f64, im: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} > {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(&'static str),

    #[error("schedule is not calibrated (e_j / epsilon missing)")]
    Uncalibrated,

    #[error("step size underflow at t = {t} (stiff or non-finite dynamics)")]
    StepUnderflow { t: f64 },

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("renormalization undefined: cat-subspace population {p_s:e} at t = {t}")]
    Renormalization { t: f64, p_s: f64 },

    /// `location` is e.g. `line 3`, `flag --t_f` or `defaults`.
    #[error("config error ({location}): {reason}")]
    Config { location: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether the failure is a validation problem (as opposed to a numerical one).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidParameter { .. }
                | Error::Config { .. }
                | Error::Uncalibrated
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
