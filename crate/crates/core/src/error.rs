use thiserror::Error;

use crate::mse::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is outside the surface domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("ball of radius {radius} around {center:?} leaves the graph chart")]
    ChartTooSmall { center: Vec<f64>, radius: f64 },

    #[error("point {point:?} does not lie on the surface (offset {offset:e})")]
    NotOnSurface { point: Vec<f64>, offset: f64 },

    #[error("solver did not converge after {} iterations (residual {:e})", .0.iterations, .0.final_residual())]
    NoConvergence(Box<SolverReport>),

    #[error("linearized system is not positive definite")]
    SingularLinearSystem,

    #[error("test surface is not below the target surface at {point:?} (excess {excess:e})")]
    NotTangentBelow { point: Vec<f64>, excess: f64 },

    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
