//! Config-driven scenario runner for the `fedband` simulator: JSON configs,
//! CSV artifacts, run manifests and the `fedband` command line.

pub mod config;
pub mod csvio;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod run;

pub use config::{load_config, FileConfig};
pub use error::{HarnessError, Result};
pub use manifest::RunManifest;
pub use run::{execute_scenario, run_scenario, run_stability, run_walkthrough};
