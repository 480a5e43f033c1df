//! Experiment commands behind the CLI.

pub mod commands;
pub mod config;
pub mod prep;

pub use commands::{
    cmd_capacity_sweep, cmd_fpfn_sweep, cmd_generate_cohort, cmd_pipeline, cmd_simulate, cmd_summarize,
    sim_patients_from_table,    summarize_reports, summarize_table, FeatureSummary, PairwiseTest, PipelineOutput, ReplicationSummary, RunOptions,
    SweepRow,
};
pub use config::{
    load_config, CapacitySweepConfig, ClassifierSpec, DataSource, FpFnSweepConfig, GridPoint, NamedClassifier,
    NamedTrainer, PipelineConfig, RatePair, SimulateConfig, SummarizeConfig, CONFIG_SCHEMA_VERSION,
};
pub use prep::{FittedPipeline, PreprocessConfig, RARE_TEST_FEATURE};
