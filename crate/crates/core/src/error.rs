use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: norm deviates from 1 by {deviation:.3e}")]
    InvalidState { deviation: f64 },

    #[error("degenerate drive: Rabi frequency and detuning are both zero")]
    DegenerateDrive,

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("step size {dt:.3e} s too large, need at most {max_dt:.3e} s")]
    StepSize { dt: f64, max_dt: f64 },

    #[error("adiabatic elimination is singular for zero intermediate detuning")]
    EliminationSingularity,

    #[error("time order violated: t2 = {t2} must exceed t1 = {t1}")]
    TimeOrder { t1: f64, t2: f64 },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("ambiguous fringe: {0}")]
    AmbiguousFringe(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("PSD coverage: {0}")]
    Coverage(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
