//! Simulation settings, Monte Carlo sweeps, real-data runs and CSV/JSON output.

mod dataset;
mod experiment;
mod export;
mod settings;

pub use dataset::{
    read_metadata, run_dataset, write_dataset_outputs, DatasetReport, DatasetSource, MetadataReport, BUILTIN_DATASETS,
};
pub use experiment::{run_experiment, write_run, MethodOutcome, MethodTally, ReplicationSummary, RunRecord, Timings};
pub use export::{emit_heatmap, read_heatmap, slice_path, HeatmapRow};
pub use settings::{
    build_setting, Balance, CustomSetting, ExperimentConfig, Growth, Method, SettingGenerator, SettingId,
};
