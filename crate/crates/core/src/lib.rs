//! Fourier-cosine (COS) option pricing with a-priori choice of the
//! truncation range and the number of series terms.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod cos;
pub mod error;
pub mod inversion;
pub mod models;
pub mod quadrature;
pub mod reference;
pub mod special;
pub mod summation;
pub mod tuning;

pub use error::{Error, Result};
pub use models::{
    central_moment, centralized_cf, tail_profile, CentralizedCF, HeavyTail, MarketContext, ModelSpec,
    SemiHeavyTail, TailProfile,
};
