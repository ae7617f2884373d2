//! Experiment driver: presets, multi-seed training, metrics export and
//! melody playback.

mod config;
mod melody;
mod metrics;
mod run;

pub use config::{
    baseline, preset, preset_on, supports, Platform, Preset, RunConfig, PRESET_NAMES,
};
pub use melody::{pad_melody, parse_melody, parse_note, play_melody, MelodyStep, MelodyTrace};
pub use metrics::{
    aggregate, aggregate_csv, episodes_csv, export_metrics, percentile, EpochMetrics, SeedHistory,
    TestEpisode, AGGREGATE_HEADER, EPISODE_HEADER,
};
pub use run::{
    run_config, run_preset, train_run, train_run_with, write_summary, RunSummary, SeedRun, Trainer,
};

/// Environment variable that overrides the default output root.
pub const OUT_DIR_ENV: &str = "TDG_OUT_DIR";
