use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the documented domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The arcs recursion collapses the state space to "number of uncovered
    /// coupons", which is only valid when every package is a cyclic window of
    /// size at least half the circle.
    #[error("state collapse invalid: arcs recursion requires floor(n/2) <= s <= n-1, got n={n}, s={s}")]
    StateCollapse { n: u64, s: u64 },

    /// The rotation scheme needs at least two packages, i.e. floor(n/(n-s)) >= 2.
    #[error("rotation scheme undefined: needs s >= n/2 so that m = floor(n/(n-s)) >= 2, got n={n}, s={s}")]
    RotationDegenerate { n: u64, s: u64 },

    /// A package inside a distribution failed validation.
    #[error("package {index}: {message}")]
    InvalidPackage { index: usize, message: String },

    /// The distribution as a whole failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Some coupon appears in no package of positive probability, so the
    /// expected number of rounds is infinite.
    #[error("coverage violation: coupon {coupon} appears in no support package")]
    Coverage { coupon: u32 },

    /// The request exceeds a documented size budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Exact arithmetic was requested for a distribution that only carries
    /// floating point probabilities.
    #[error("exact mode unavailable: {0}")]
    ExactUnavailable(String),

    /// Malformed distribution or certificate JSON.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
