use thiserror::Error;

/// Errors raised by the solvers and enumerators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracket index n = {n} exceeds the precision cap {cap}")]
    PrecisionExhausted { n: u64, cap: u64 },

    #[error("root solve did not converge: {0}")]
    NotConverged(String),

    #[error("enumeration would produce about {estimated} records, above the budget of {budget}")]
    Capacity { estimated: u64, budget: u64 },

    #[error("lambda = {lambda} lies outside the enumerated range (cutoff {cutoff})")]
    OutOfRange { lambda: f64, cutoff: f64 },

    #[error("no sign change on [{sigma_lo}, {sigma_hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoSignChange {
        sigma_lo: f64,
        sigma_hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("no witness for n1 <= {n_max}; closest fractional part {best_frac} at n1 = {best_n1}")]
    WitnessNotFound {
        n_max: u64,
        best_n1: u64,
        best_frac: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
