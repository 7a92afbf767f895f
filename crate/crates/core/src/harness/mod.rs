//! Config-driven experiment runner and CSV emission.
//!
//! [`run_experiment`] computes everything in memory; [`write_outputs`] puts
//! the tidy CSV files on disk. Every replicate draws its data from a stream
//! derived from `(seed, n index, d index, replicate)`, so results do not
//! depend on scheduling.

mod config;
mod output;
mod runner;

pub use config::{EstimatorKind, EstimatorParams, ExperimentConfig, ExperimentKind, Grid, Regime};
pub use output::{
    fmt_f64, ledger_csv, mask_csv, matrix_csv, read_matrix_csv, render_outputs, results_csv, slopes_csv, summary_csv,
    write_outputs, LEDGER_HEADER, REGIONS_HEADER, RESULTS_HEADER, SLOPES_HEADER, SUMMARY_HEADER,
};
pub use runner::{
    data_stream, fit_slopes, run_experiment, summarize, ExperimentOutput, LedgerRow, ResultRecord, SlopeRow, Snapshot,
    SummaryRow,
};
