//! Config-driven experiment pipeline: data, preprocessing, clustering,
//! explanation, baseline, and report files.

mod config;
mod run;

pub use config::{
    BaselineConfig, ClusteringConfig, DataConfig, ExperimentConfig, ExplainConfig, G2pcConfig,
    GroupingConfig, L2pcConfig, PfiConfig, PreprocessConfig, SelectConfig, DATA_SOURCES,
    DEFAULT_EPS_GRID, DEFAULT_SELECT_MAX, DEFAULT_SELECT_MIN, GROUPING_SOURCES,
};
pub use run::{load_config, run, run_path, validate, Overrides, RunFailure, RunReport};
