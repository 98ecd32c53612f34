//! Experiment configuration, orchestration, fitting and reporting.

mod config;
mod fit;
mod output;
mod repro;
mod run;

pub use config::{
    parse_config, validate_config, BarrierParams, CompareParams, DilutionParams, EsParams, ExperimentConfig, ExperimentKind,
    ModelParams, OutputSpec, Schedule, Seeds, TensionParams, XLambdaParams,
};
pub use fit::{fit_power_law, fit_power_law_with, Bootstrap, PowerLawFit, MIN_POINTS, R2_THRESHOLD};
pub use output::{config_hash, content_hash, csv_file, embedded_config, json_file, FileDigest, OutputFile, RunOutput, Summary};
pub use repro::{criterion_index, fuzzed_profiles, repro, CriterionOutcome, CRITERIA};
pub use run::{
    box_shapes, compare_dilute_vs_pure, es_marginal_errors, run, run_with_workers, BarrierReport, CompareReport, EsEntry,
    GridReport,
};
