//! Config-driven experiment harness: simulates systems, runs the
//! estimators, evaluates the failure-bound formulas, and emits CSV tables
//! plus self-contained plot scripts.

pub mod config;
pub mod plots;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation error: {0}")]
    Sim(#[from] sysid_sim::SimError),
    #[error("estimator error: {0}")]
    Sme(#[from] sme_core::SmeError),
    #[error("baseline error: {0}")]
    Lse(#[from] lse_baseline::LseError),
    #[error("bound error: {0}")]
    Bound(#[from] theory_bounds::BoundError),
    #[error("control error: {0}")]
    Rampc(#[from] rampc_demo::RampcError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub use config::ExperimentConfig;
pub use runner::{run_experiment, Summary};
