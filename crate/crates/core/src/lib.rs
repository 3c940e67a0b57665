// NaN-rejecting comparisons such as `!(x > 0.0)` are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod measures;
pub mod numerics;
pub mod quasi_lorentzian;
pub mod rank_one;
pub mod sturm_liouville;

pub use error::{Error, Result};
