//! Configuration-driven experiment runs.
//!
//! A run loads features, trains the selected representation, clusters it
//! once per seed and writes a versioned report:
//!
//! ```text
//! out/
//!   config.toml            effective configuration, loadable with --config
//!   report.json            metrics, per-run records, configuration
//!   runs/run_<i>/
//!     log.jsonl            per-epoch training log
//!     labels.txt           predicted cluster per sample
//!     latent.stce          final representation
//!     model.stck           trained network checkpoint
//! ```

mod config;
mod run;
mod sweep;

pub use config::{FeatureSource, PipelineConfig, PipelineKind, Reseed};
pub use run::{load_inputs, run_pipeline, run_with_inputs, Inputs, PipelineReport, RunRecord, REPORT_SCHEMA_VERSION};
pub use sweep::{run_sweep, write_sweep_csv, SweepAxis, SweepRow};
