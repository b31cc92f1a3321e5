//! Experiment runner around `cos-core`: config parsing, CSV output, timing,
//! the benchmark studies and convergence sweeps.

pub mod config;
pub mod experiments;
pub mod table;
pub mod timing;
pub mod validity;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Pricing(#[from] cos_core::Error),

    #[error("error tolerance {eps:e} not reached with N <= {cap}")]
    NotReachedWithinCap { eps: f64, cap: usize },

    #[error("no reference value available for {0}")]
    ReferenceUnavailable(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        use cos_core::Error as E;
        match self {
            Self::Usage(_) | Self::Config { .. } => exit::USAGE,
            Self::Pricing(E::InvalidParameter { .. }) => exit::USAGE,
            Self::Pricing(E::ToleranceTooLoose { .. } | E::NoSmoothness { .. } | E::SeriesTooLong { .. }) => {
                exit::INFEASIBLE
            }
            Self::NotReachedWithinCap { .. } => exit::INFEASIBLE,
            Self::Pricing(_) | Self::ReferenceUnavailable(_) => exit::NUMERIC,
            Self::Io(_) | Self::Csv(_) => exit::IO,
        }
    }
}
