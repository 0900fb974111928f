//! Stochastic Lagrangian descriptor fields for stochastic differential
//! equations.
//!
//! The descriptor of an initial condition is the p-power sum of its state
//! increments along one noise realization, integrated backward and forward
//! from the anchor time. Over a grid of initial conditions its singular
//! minima trace stationary orbits (random fixed points) and their stable
//! and unstable manifolds, giving a phase portrait of the stochastic
//! dynamics. The crate bundles:
//!
//! - seeded two-sided Wiener paths with Ito quadrature ([`wiener`])
//! - benchmark SDEs and a custom-system hook ([`systems`])
//! - forward/backward Euler-Maruyama stepping, the closed-form noisy-saddle
//!   map, and convergence-order studies ([`integrator`])
//! - descriptor points, fields, and ensemble means ([`descriptor`])
//! - structure extraction and verification oracles ([`analysis`])
//! - field/path/image persistence ([`gridio`])
//! - a runnable experiment layer used by the `sld` binary ([`cli`])
//!
//! Every quantity is deterministic in `(seed, path_id)` and independent of
//! the thread count. See the `examples/` directory for one runnable program
//! per capability.

pub mod analysis;
pub mod cli;
pub mod descriptor;
pub mod error;
pub mod gridio;
pub mod integrator;
mod stats;
pub mod systems;
pub mod wiener;

pub use error::{Error, Result};
