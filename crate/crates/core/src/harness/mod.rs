//! Experiment orchestration: layered configuration, seeded training runs,
//! evaluation on unseen deployments, w-sweeps and metrics files.

mod algorithm;
mod config;
mod metrics;
mod run;
mod summary;

pub use algorithm::{Aggregation, Algorithm};
pub use config::{ExperimentConfig, Preset, RunSeeds};
pub use metrics::{last_episode, read_metrics, MetricsRow, MetricsWriter, METRICS_HEADER};
pub use run::{
    cmd_eval, cmd_heuristic, cmd_sweep_w, cmd_train, load_model, save_checkpoint, train_run, EvalReport, EvalRequest,
    SweepRow, TrainReport, DEFAULT_W_SWEEP,
};
pub use summary::{aggregate_curves, ci95, confidence_interval, write_curves, CurvePoint, Interval, RunSummary, SUMMARY_WINDOW};
