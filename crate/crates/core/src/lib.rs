//! General random intersection graphs `G(n, m, p)`: seeded sampling, the
//! intersection graph and its components, realized and surrogate exploration
//! processes, closed-form analysis of the component phase transition, and a
//! Monte Carlo harness that checks the analysis against simulation.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod genbip;
pub mod graph;
pub mod model;
pub mod rng;
pub mod surrogate;

pub use error::{Result, RigError};
