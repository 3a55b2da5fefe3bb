//! Variable-step L2 approximation of the Caputo derivative and a compact
//! fourth-order, energy-dissipating scheme for the time-fractional
//! Cahn-Hilliard equation.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caputo;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod report;
pub mod solver;
pub mod spatial;
pub mod verify;

pub use error::{Error, Result};
