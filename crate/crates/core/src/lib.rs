//! Numerical laboratory for localization errors of the stochastic heat
//! equation on `[-L, L]` versus the whole line.
//!
//! The crate is layered:
//! - [`kernels`]: heat kernel, interval Green's functions and their bounds;
//! - [`gronwall`]: space-time convolution kernels and their resolvents;
//! - [`solver`]: coupled finite-difference Monte Carlo solver;
//! - [`experiments`]: localization sweeps, rate fits, and result tables;
//! - [`cli`]: the `heatwave` command-line front end.

pub mod error;
pub mod numfmt;
pub mod quadrature;
pub mod special;

pub mod cli;
pub mod experiments;
pub mod gronwall;
pub mod kernels;
pub mod solver;

pub use error::{Error, Result};
