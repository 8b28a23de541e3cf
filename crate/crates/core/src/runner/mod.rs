//! Experiment orchestration, reports and the command line.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod kv;
pub mod report;

pub use cli::cli_main;
pub use config::{ExperimentConfig, Gamma, PolySettings, RbfSettings};
pub use experiment::{
    evaluate, fit_fold, predict_fold, run_experiment, Column, DatasetLog, ExperimentResults, FoldModels,
    PredictionLog, PredictionRecord, ResultGrid, CONCATENATED_ROW,
};
pub use report::{emit_reports, load_predictions, ReportFormat};
