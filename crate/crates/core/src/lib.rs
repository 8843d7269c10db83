//! Desk-scale symbolic dynamics on Z^d and Z_+^d.
//!
//! Builds block subshifts whose topological entropy lands in a prescribed
//! interval and whose invariant measures stay close to a reference measure,
//! then checks those claims with exact counts and interval arithmetic.

pub mod cli;
pub mod construction;
pub mod counting;
pub mod error;
pub mod lattice;
pub mod measures;
pub mod report;
pub mod separation;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
