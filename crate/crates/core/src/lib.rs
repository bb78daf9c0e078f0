//! Chaining functionals, order-statistics decompositions and Monte Carlo
//! checks for multiplier, product and quadratic empirical processes over
//! finite classes.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaining;
pub mod dist;
pub mod error;
pub mod lambda;
pub mod norms;
pub mod orderstats;
pub mod processes;
pub mod projection;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
