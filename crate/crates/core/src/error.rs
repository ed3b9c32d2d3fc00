use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The Euler-Lagrange equation is singular at a vanishing abatement rate.
    #[error("singular state: {0}")]
    Singular(String),

    #[error("damage calibration failed: {0}")]
    Calibration(String),

    /// The abatement rate collapsed to zero or diverged during integration.
    #[error("trajectory failed at t = {time:.4} yr: {reason}")]
    Trajectory { time: f64, reason: String },

    #[error("infeasible boundary problem: {0}")]
    Infeasible(String),

    #[error("shooting solver: {0}")]
    Solver(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
