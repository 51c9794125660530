use alloc::string::String;
use alloc::vec::Vec;

use crate::phase::PhasePoint;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An operation was invoked in a state it does not accept.
    #[error("usage error: {0}")]
    Usage(String),

    /// A single-path power that must be positive was not.
    #[error("single-path power P_{path} = {value} must be positive")]
    NonPositivePower { path: char, value: f64 },

    /// A value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data do not carry enough information for the requested statistic.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A model configuration violates its declared constraints.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// No candidate phase point lies nearest to the `n = 0` plane.
    #[error("ambiguous reconstruction: all {} candidates are nearest to an n = ±1 plane", candidates.len())]
    AmbiguousReconstruction { candidates: Vec<PhasePoint> },

    /// A record-level failure while processing a log.
    #[error("record {index}: {reason}")]
    Record { index: usize, reason: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("fit did not converge after {iterations} iterations (best residual norm {best_residual_norm})")]
    FitNotConverged {
        iterations: usize,
        best_params: Vec<f64>,
        best_residual_norm: f64,
    },

    #[error("parameters are not identifiable from the data: {0}")]
    Unidentifiable(String),

    /// A measurement log lacks shutter configurations needed by the analysis.
    #[error("missing data: {0}")]
    MissingData(String),
}
