//! Steady states and dynamics of a qubit coupled to a bosonic bath, from the
//! second- and fourth-order time-convolutionless generators and from the
//! mean-force Gibbs state.

// `!(x > 0.0)` also rejects NaN; small dense matrices read best indexed
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bathcorr;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod numerics;
pub mod spectral;
pub mod steadystate;

pub use error::{Error, Result};
