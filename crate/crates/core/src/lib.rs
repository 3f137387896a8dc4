//! Stratified Monte Carlo along linear projections of Gaussian drivers,
//! with direction engines for Black-Scholes and CIR Asian options.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod directions;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod linalg;
pub mod models;
pub mod payoffs;
pub mod presets;
pub mod selftest;
pub mod stratified;

pub use error::{Error, Result};
