//! Configuration, Monte Carlo drivers and the market-data pipeline behind the
//! `lscov` command line tool.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod market;
pub mod stats;

pub use config::{ConfigFile, Experiment, ExperimentConfig, Overrides};
pub use experiments::{emit_qq, run_cov_experiment, run_pred_experiment, CellSummary, ExperimentReport};
pub use market::{analyze_csv, MarketSeries};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no finite values left after cleaning")]
    EmptyAfterCleaning,
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Estimation(#[from] lscov::Error),
    #[error(transparent)]
    Simulation(#[from] lscov_sim::SimError),
}
