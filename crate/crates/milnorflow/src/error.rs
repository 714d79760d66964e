use thiserror::Error;

/// Pipeline stage that produced a construction error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Trochoid,
    Closing,
    Sphere,
    Kuiper,
    Smoothing,
    ArcLength,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Trochoid => "trochoid",
            Stage::Closing => "closing",
            Stage::Sphere => "sphere",
            Stage::Kuiper => "kuiper",
            Stage::Smoothing => "smoothing",
            Stage::ArcLength => "arc-length",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("lambda {0} out of supported range [0.5, 6]")]
    LambdaRange(f64),
    #[error("singular parametrization at t = {t} (speed {speed:e})")]
    Singular { t: f64, speed: f64 },
    #[error("construction failed in stage {stage}: {msg}")]
    Construction { stage: Stage, msg: String },
    #[error("leaf lookup failed (best residual {residual:e})")]
    LeafLookup { residual: f64 },
    #[error("unsupported bundle ({h}, {j}): field extension defined only for (0,1) and (1,0)")]
    UnsupportedBundle { h: i64, j: i64 },
    #[error("point outside neighbourhood: |x| = {norm} >= r_max = {r_max}")]
    OutOfNeighbourhood { norm: f64, r_max: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("stationary point: initial speed {0:e}")]
    Stationary(f64),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn construction(stage: Stage, msg: impl Into<String>) -> Self {
        Error::Construction { stage, msg: msg.into() }
    }
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

pub type Result<T> = std::result::Result<T, Error>;
