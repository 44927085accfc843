//! Deterministic capacity and entropy bounds for energy-constrained,
//! band-limited signals observed over a finite window.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod comparison;
pub mod error;
pub mod geometry;
pub mod params;
pub mod sampling;
pub mod seed;
pub mod simulation;
pub mod spectrum;

pub use error::{Error, Result};
pub use params::SignalSpaceParams;
