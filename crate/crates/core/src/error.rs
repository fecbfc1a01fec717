use thiserror::Error;

/// Errors raised by the models in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} must be finite")]
    NonFinite(&'static str),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("v1*v2 = {product} is below the uncertainty bound {bound}")]
    BelowUncertaintyBound { product: f64, bound: f64 },

    #[error("expected variances in the {expected} convention, got {found}")]
    ConventionMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("efficiency {0} outside (0, 1]")]
    Efficiency(f64),

    #[error("no measured pairs supplied")]
    EmptyInput,

    #[error("pair {index} shows no squeezing (v1 = {v1})")]
    NoSqueezing { index: usize, v1: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("pump ratio {0} is not in [0, 1)")]
    PumpRatio(f64),

    #[error("model has no squeezing at zero frequency")]
    DegenerateModel,

    #[error("need at least {required} data points, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("frequencies must be positive and strictly increasing (row {0})")]
    NonMonotone(usize),

    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error(
        "Fock truncation too small in bin {bin} (f = {frequency} Hz): trace deficit {deficit}"
    )]
    TruncationInsufficient {
        bin: usize,
        frequency: f64,
        deficit: f64,
    },

    #[error("oracle workspace did not converge up to dimension {0}")]
    OracleWorkspace(usize),

    #[error("span {span} Hz is not an integer number of {bin_width} Hz bins")]
    BinMismatch { span: f64, bin_width: f64 },

    #[error("distribution has no weight above n = 0")]
    NoClicks,

    #[error("reference variance {reference} does not exceed dark variance {dark}")]
    UnphysicalCalibration { reference: f64, dark: f64 },

    #[error("phase moves {per_window} rad per window; at most 0.05 allowed")]
    RotationTooFast { per_window: f64 },

    #[error("need at least {required} samples, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

impl Error {
    /// True for failures of a numerical procedure to converge, as opposed to
    /// inputs that violate a model invariant.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::TruncationInsufficient { .. } | Error::OracleWorkspace(_)
        )
    }
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
