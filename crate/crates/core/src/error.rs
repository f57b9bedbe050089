use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unstable configuration: total mechanical damping {gamma_tot} rad/s is not positive")]
    Instability { gamma_tot: f64 },

    #[error("outside the validity window: {0}")]
    Validity(String),

    #[error("probe couplings are unbalanced: G- = {g_minus}, G+ = {g_plus}")]
    Unbalanced { g_minus: f64, g_plus: f64 },

    #[error("fit did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("rank-deficient regression: {0}")]
    RankDeficient(String),

    #[error("integration step rejected: {0}")]
    StepSize(String),
}

impl Error {
    /// Stable name of the failing gate, as printed by the command-line front end.
    pub fn gate_name(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameterError",
            Error::Instability { .. } => "InstabilityError",
            Error::Validity(_) => "ValidityError",
            Error::Unbalanced { .. } => "UnbalancedError",
            Error::NonConvergence { .. } => "NonConvergenceError",
            Error::DegenerateData(_) => "DegenerateDataError",
            Error::RankDeficient(_) => "RankDeficientError",
            Error::StepSize(_) => "StepSizeError",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
