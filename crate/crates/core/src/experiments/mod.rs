//! Monte Carlo harness: sweeps, comparison of the surrogate against realized
//! explorations, the attachment-dependence and sprinkling demonstrations, and
//! the statistical tests they report.

pub mod config;
mod demos;
pub mod stats;
pub mod sweep;

pub use config::ConfigFile;
pub use demos::{
    dependence_demo, edge_frequency, sprinkle_demo, sprinkle_profile, surrogate_vs_faithful,
    DependenceReport, SprinkleReport, SprinkledProfile, SurrogateReport, TraceAudit,
};
pub use sweep::{sweep, sweep_csv, SweepCell, SweepRow, SweepSpec};
