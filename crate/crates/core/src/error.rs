use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("degenerate update: likelihood vanishes on every grid node")]
    DegenerateUpdate,

    #[error(
        "impossible outcome {eta:+} at phi = {phi} for a point distribution at lambda0 = {lambda0}"
    )]
    ImpossibleOutcome { lambda0: f64, phi: f64, eta: i8 },

    #[error("unsupported representation: {0}")]
    Unsupported(String),

    #[error("measurement budget exhausted: {requested} requested, {available} available")]
    Budget { requested: usize, available: usize },

    #[error("series contains no measurements")]
    EmptySeries,

    #[error("mean direction undefined (concentration {0:.3e})")]
    UndefinedDirection(f64),

    #[error("{len} measurements exceed the enumeration cap of {cap}")]
    TooManyMeasurements { len: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("config write error: {0}")]
    ConfigWrite(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::ConfigParse(_)
                | Error::Unsupported(_)
                | Error::Budget { .. }
                | Error::EmptySeries
                | Error::TooManyMeasurements { .. }
        )
    }
}
