//! Simulation and exact theory for degree-degree correlations in
//! generalized preferential attachment graphs.
//!
//! * [`params`]: `(m, A, B, D)` model parameters and the generator map.
//! * [`theory`]: `c(m, d)`, `M(d)`, `E d_nn(d)` and their asymptotics.
//! * [`oracle`]: deterministic integration of the expectation recurrences.
//! * [`graph`]: the multigraph and its generator.
//! * [`metrics`]: `N(d)`, `S(d)`, `d_nn(d)`, clustering, assortativity.
//! * [`experiments`]: multi-seed scenarios, fits and figure presets.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod params;
mod special;
pub mod theory;

pub use error::{Error, Result};
pub use special::ln_gamma_ratio;
