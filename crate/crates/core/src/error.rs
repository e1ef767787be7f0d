use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("datum has no point of negative slope; no shock forms")]
    NoShock,
    #[error("third derivative at the steepest point is not positive ({0:e})")]
    DegenerateShock(f64),
    #[error("steepest slope attained at separated points {0} and {1}")]
    NonUniqueMin(f64, f64),
    #[error("value {value} lies outside the inversion window (-{half_width}, {half_width})")]
    OutOfWindow { value: f64, half_width: f64 },
    #[error("characteristics cross at t = {0}")]
    CharacteristicsCrossed(f64),
    #[error("point (t = {t}, x = {x}) is outside the inversion window")]
    WindowRequired { t: f64, x: f64 },
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    ToleranceNotMet { tol: f64, estimate: f64 },
    #[error("viscosity {0:e} is below the supported floor 1e-7")]
    NuTooSmall(f64),
    #[error("time step restriction cannot be met: {0}")]
    UnstableParameters(String),
    #[error("no grid points inside the requested window")]
    EmptyGrid,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
