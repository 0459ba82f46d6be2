use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Compton wavelength is infinite for a massless lattice (depth = 0)")]
    InfiniteWavelength,

    #[error("degenerate bands at Q = {quasimomentum}, depth = {depth}: band assignment is ambiguous")]
    Degenerate { quasimomentum: f64, depth: f64 },

    #[error("eigensolver did not converge at Q = {quasimomentum}, depth = {depth}")]
    NoConvergence { quasimomentum: f64, depth: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("propagation of ensemble member at Q0 = {quasimomentum} failed: {source}")]
    MemberFailed {
        quasimomentum: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: need at least {needed} samples in the fit window, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("ensemble under-sampled: need at least {needed} states, got {got}")]
    UnderSampled { needed: usize, got: usize },

    #[error("blur sigma {0} is too large for a meaningful |k| = 1 partition (max 0.1)")]
    IllPosedPartition(f64),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InfiniteWavelength => "infinite-wavelength",
            Error::Degenerate { .. } => "degenerate",
            Error::NoConvergence { .. } => "no-convergence",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::MemberFailed { .. } => "member-failed",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::UnderSampled { .. } => "under-sampled",
            Error::IllPosedPartition(_) => "ill-posed-partition",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
