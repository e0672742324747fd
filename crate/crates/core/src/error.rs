use thiserror::Error;

use crate::tracer::TrajectoryLog;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("CFL violation at t = {t:.6}: courant number {courant:.4} exceeds {limit}")]
    Cfl { t: f64, courant: f64, limit: f64 },

    #[error("non-finite value in field after step {step} (t = {t:.6})")]
    NonFinite { step: u64, t: f64 },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("tracer '{label}' left the box at t = {t:.6}")]
    TracerExit {
        label: String,
        t: f64,
        partial: Box<TrajectoryLog>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Format { .. } => "format",
            Error::Config(_) => "config",
            Error::Cfl { .. } => "cfl",
            Error::NonFinite { .. } => "non_finite",
            Error::Construction(_) => "construction",
            Error::TracerExit { .. } => "tracer_exit",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
