//! Numerical companion for free-energy upper bounds on the dilute
//! two-dimensional Bose gas at positive temperature.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod idealgas;
pub mod lattice;
pub mod paramsweep;
pub mod quad;
pub mod scattering;
pub mod specialfn;
pub mod trialbound;

pub use error::{Error, Result};
