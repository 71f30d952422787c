//! Config-driven experiments: seeded multi-trial runs over scale levels and
//! jitter sizes, summary statistics, rate fits, and CSV/JSON/gnuplot output.

mod config;
mod report;
mod run;
pub mod verify;

pub use config::{
    Deltas, ExperimentConfig, JitterSpec, LambdaMode, ResolvedConfig, DEFAULT_GRID_CAP, GRID_OVERSAMPLING,
    SINC_BOX_RATIO,
};
pub use report::{
    emit_results, parse_csv, summarize, to_csv, to_gnuplot, DeltaRate, ExperimentReport, OutputFormat, SummaryRow,
    TrialRecord, CSV_HEADER,
};
pub use run::{
    reconstruct, run_experiment, sweep_jitter, sweep_rate, trial_seed, Reconstruction, MAX_TERM_EVALUATIONS,
};
