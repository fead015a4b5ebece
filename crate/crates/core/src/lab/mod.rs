//! Experiment harness: JSON configs, deterministic parallel execution of
//! `(n, trial)` grids, CSV tables and run manifests.
//!
//! Every trial draws from `trial_seed(seed, n, trial)`, rows are written in
//! task order and flushed one by one, and floats use the shortest
//! round-trip decimal form. The number of workers never changes a byte of
//! the CSV outputs; wall-clock data goes to the manifest and `timings.csv`.

mod config;
mod converge;
mod diagnose;
mod manifest;
mod runner;

pub use config::{load_config, parse_config, ConfigSource, DiagnosticKind, DiagnosticParams, ExperimentConfig, Metric};
pub use converge::{
    convergence_trial, reference_measure, run_convergence, summary_rows, TrialRecord, CONVERGENCE_FILE,
    CONVERGENCE_HEADER, SUMMARY_FILE, TIMINGS_FILE,
};
pub use diagnose::{diagnostic_file, diagnostic_summary_file, run_diagnostic, PJ_FLOOR};
pub use manifest::{file_sha256, OutputFile, RunCommand, RunManifest, TrialSeed, MANIFEST_FILE, MANIFEST_VERSION};

/// Result of a finished run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// Trials whose critical-point solve hit the sweep cap.
    pub nonconverged: usize,
    /// Convergence rows; empty for diagnostics.
    pub records: Vec<TrialRecord>,
}

/// Replays the run recorded in `manifest` into `config.output_dir`
/// (pass a modified manifest to redirect or change the worker count).
pub fn rerun(manifest: &RunManifest) -> crate::Result<RunOutcome> {
    match manifest.command {
        RunCommand::Converge => run_convergence(&manifest.config),
        RunCommand::Diagnose { name } => run_diagnostic(name.name(), &manifest.config),
    }
}
