//! Experiment files, parameter sweeps, CSV output and S-1/S-2 comparison
//! on top of `mmcache-core`.

pub mod compare;
pub mod config;
pub mod experiment;

pub use compare::{compare_csv, CompareError, CompareReport};
pub use config::{load_spec, parse_spec, write_spec, ConfigError, ExperimentSpec, SweepParam};
pub use experiment::{build_pool, run_experiment, workers_from_env, ExperimentError, ExperimentSummary};
