use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto two CLI exit classes: configuration problems and
/// numerical failures (see [`Error::is_config_error`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hamiltonian sample {index} is not Hermitian (deviation {deviation:e})")]
    NonHermitianInput { index: usize, deviation: f64 },

    #[error("quasi-energies are degenerate: |eps+ - eps-| = {splitting:e} (mod omega_L)")]
    DegenerateQuasiEnergies { splitting: f64 },

    #[error("sample grids differ: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("grid of {grid} samples cannot resolve {n_max} Fourier modes (need >= {required})")]
    GridTooCoarse { grid: usize, n_max: i64, required: usize },

    #[error("channel frequencies collide at omega = {omega} ({first} vs {second})")]
    AssumptionViolated { omega: f64, first: String, second: String },

    #[error("jump weight {weight:e} is zero for channel {channel}")]
    ZeroWeight { channel: usize, weight: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("no tabulated rate for omega = {omega}")]
    MissingRate { omega: f64 },

    #[error("total jump intensity vanished at t = {t}")]
    NumericalLeak { t: f64 },

    #[error("zone window overflow: {detail}")]
    WindowOverflow { detail: String },

    #[error("step rejected at t = {t}: {detail}")]
    StepRejected { t: f64, detail: String },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::DegenerateQuasiEnergies { .. } => "DegenerateQuasiEnergies",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::AssumptionViolated { .. } => "AssumptionViolated",
            Error::ZeroWeight { .. } => "ZeroWeight",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::MissingRate { .. } => "MissingRate",
            Error::NumericalLeak { .. } => "NumericalLeak",
            Error::WindowOverflow { .. } => "WindowOverflow",
            Error::StepRejected { .. } => "StepRejected",
            Error::InvalidPath(_) => "InvalidPath",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Config { .. } => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidParameter(_) | Error::Io(_))
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
