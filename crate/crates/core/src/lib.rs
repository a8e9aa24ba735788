// NaN must fail the positivity checks, hence `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeff;
pub mod error;
pub mod estimator;
pub mod expansion;
pub mod exponent;
pub mod fbm;
pub mod harness;
pub mod interval;
pub mod numeric;
pub mod rng;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/fbm.md")]
    mod fbm {}
    #[doc = include_str!("../../../book/src/sde.md")]
    mod sde {}
    #[doc = include_str!("../../../book/src/estimator.md")]
    mod estimator {}
    #[doc = include_str!("../../../book/src/expansion.md")]
    mod expansion {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    mod exponents {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
