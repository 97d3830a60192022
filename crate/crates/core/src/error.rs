use thiserror::Error;

pub type Result<T> = std::result::Result<T, MudError>;

#[derive(Debug, Error)]
pub enum MudError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size {dt} s exceeds the stability limit {limit} s")]
    StepSize { dt: f64, limit: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl MudError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        MudError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MudError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
