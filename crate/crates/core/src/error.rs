use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("external flux {quanta:.4} Φ₀ is outside the open domain |Φ| < Φ₀/2")]
    FluxOutOfRange { quanta: f64 },

    #[error("current {current:.4e} A exceeds the critical current {critical:.4e} A")]
    OverCritical { current: f64, critical: f64 },

    #[error("state became non-finite at t = {t:.6e} s")]
    NonFinite { t: f64 },

    #[error("time step {dt:.4e} s exceeds the stability limit {limit:.4e} s")]
    CourantViolation { dt: f64, limit: f64 },

    #[error("time step {dt:.4e} s exceeds the resolution limit {limit:.4e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("drive frequency {omega:.4e} rad/s is outside the pass band (limit {limit:.4e} rad/s)")]
    BandLimit { omega: f64, limit: f64 },

    #[error("wavenumber {k:.4e} 1/m is outside the first Brillouin zone |k| <= {limit:.4e} 1/m")]
    OutOfBand { k: f64, limit: f64 },

    #[error("coordinate {x:.4e} m is outside the profile range [{min:.4e}, {max:.4e}] m")]
    OutOfRange { x: f64, min: f64, max: f64 },

    #[error("no localized packet in trajectory")]
    NoPacket,

    #[error("velocity profile has no horizon")]
    NoHorizon,

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error("phase fit failed: {0}")]
    FitFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
