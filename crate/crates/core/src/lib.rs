//! Simulation of sandwiched stochastic differential equations
//!
//! ```text
//! Y(t) = Y(0) + ∫₀ᵗ b(s, Y(s)) ds + Z(t)
//! ```
//!
//! where the drift `b` explodes at a lower bound `φ` (and optionally an upper
//! bound `ψ`) and `Z` is a Hölder-continuous Gaussian process. The
//! drift-implicit Euler scheme keeps every iterate strictly inside the
//! sandwich `φ < Ŷ (< ψ)`.
//!
//! Modules:
//! - [`model`]: drift families, bound functions, assumption checks, mesh
//!   limits and explicit bound constants.
//! - [`noise`]: Brownian, fractional and multifractional Brownian drivers on
//!   uniform grids, Hölder constant estimation.
//! - [`solver`]: closed-form and generic implicit steps, path simulation and
//!   sandwich checks.
//! - [`analysis`]: strong-error studies on nested grids and the CKLS
//!   consistency check.
//! - [`config`]: the JSON run configuration shared by the CLI and the C API.

pub mod analysis;
pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod model;
pub mod noise;
pub mod solver;

pub use error::{Error, Result};
