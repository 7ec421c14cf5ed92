//! Scenario runner: configuration, the experiment suite and report files.

mod config;
mod report;
mod scenarios;

use thiserror::Error;

pub use config::{load_config, parse_config, InitialData, RunConfig, Scenario, ScatterSpec, ThresholdSpec, Tolerances};
pub use report::{emit_report, read_series_csv, ReportPaths, RunSummary};
pub use scenarios::{
    classify_outcome, criteria_verdicts, criteria_vs_outcome, identity_residuals, run_scenario, scattering_probe, scattering_probe_at,
    simulate, threshold_bisection, verify_identities, CriteriaReport, DampedRun, DatumReport, IdentityReport,
    OutcomeClass, ResidualMaxima, ScatterPoint, ScatterReport, ScenarioReport, SimulationReport, ThresholdResult,
    ThresholdRun,
};

/// Environment variable holding the worker count of parallel scenarios.
pub const WORKERS_ENV: &str = "DNLS_WORKERS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("non-monotone outcome: blow-up at a = {blowup} above a global run at a = {global}")]
    NonMonotone { blowup: f64, global: f64 },
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Cutoff(#[from] crate::cutoff::CutoffError),
    #[error(transparent)]
    Criteria(#[from] crate::criteria::CriteriaError),
    #[error(transparent)]
    Diagnostics(#[from] crate::diagnostics::DiagnosticsError),
    #[error(transparent)]
    Snapshot(#[from] crate::snapshot::SnapshotError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// Whether the error is a violated precondition (as opposed to a failure while running).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Precondition(_)
                | ExperimentError::NonMonotone { .. }
                | ExperimentError::Model(_)
                | ExperimentError::Cutoff(_)
                | ExperimentError::Json(_)
        )
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Maps `f` over `items` on up to [`worker_count`] threads, keeping the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let workers = worker_count().min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}
