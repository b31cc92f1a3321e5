use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("moment of order {order} does not exist for {model}")]
    MomentDoesNotExist { order: u32, model: &'static str },

    #[error("no closed-form derivative bound for {model}")]
    NoClosedForm { model: &'static str },

    #[error("the model has no finite exponential moment needed for the martingale drift")]
    NoMartingale,

    #[error("integral of |u|^{order} |phi(u)| diverged")]
    IntegralDiverged { order: u32 },

    #[error("quadrature failed to reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("payoff vanishes on [-M, M] (log-threshold {threshold} <= -M = {lower})")]
    DegeneratePayoff { threshold: f64, lower: f64 },

    #[error("density is not in C_b^{required} (largest admissible J is {available:?})")]
    NoSmoothness {
        required: u32,
        available: Option<u32>,
    },

    #[error("tolerance too loose: condition {condition} needs L >= {required}, got L = {actual}")]
    ToleranceTooLoose {
        condition: &'static str,
        required: f64,
        actual: f64,
    },

    #[error("damping factor {damping} is not admissible for {model}")]
    DampingInadmissible { damping: f64, model: &'static str },

    #[error("series length {value:e} does not fit in memory-addressable range")]
    SeriesTooLong { value: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
