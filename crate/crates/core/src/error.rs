use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different tensor spaces ({left} vs {right})")]
    SpaceMismatch { left: String, right: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown polariton level `{0}`")]
    UnknownLevel(String),

    #[error("invalid level pair: {0}")]
    InvalidPair(String),

    #[error("trace drifted by {drift:.3e} (bound {bound:.1e})")]
    TraceDrift { drift: f64, bound: f64 },

    #[error("population {population:.3e} at the top photon levels exceeds {bound:.1e}; raise n_cut")]
    CutoffViolation { population: f64, bound: f64 },

    #[error("population {population:.3e} near the ladder wrap-around exceeds {bound:.1e}; raise the ladder dimension")]
    WrapAround { population: f64, bound: f64 },

    #[error("minimum eigenvalue {eigenvalue:.3e} below −{bound:.1e}")]
    Positivity { eigenvalue: f64, bound: f64 },

    #[error("step-halving changed a reported probability by {change:.3e} (bound {bound:.1e})")]
    NotConverged { change: f64, bound: f64 },

    #[error("total state is mixed (purity {purity:.12})")]
    MixedState { purity: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("gate identity failed: {0}")]
    GateIdentity(String),

    #[error("all {0} sweep points failed")]
    AllPointsFailed(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical integration itself, as opposed to
    /// malformed inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TraceDrift { .. }
                | Error::CutoffViolation { .. }
                | Error::WrapAround { .. }
                | Error::Positivity { .. }
                | Error::NotConverged { .. }
                | Error::AllPointsFailed(_)
        )
    }

    /// Process exit code: 2 for bad input, 3 for numerical failure, 4 for a
    /// failed gate identity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            e if e.is_numerical() => 3,
            Error::GateIdentity(_) | Error::Calibration(_) => 4,
            Error::Config { .. }
            | Error::Json(_)
            | Error::InvalidParameter(_)
            | Error::UnknownLevel(_)
            | Error::InvalidPair(_)
            | Error::UnknownLabel(_)
            | Error::DuplicateLabel(_) => 2,
            _ => 1,
        }
    }
}
