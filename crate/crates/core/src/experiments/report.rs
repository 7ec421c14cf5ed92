use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{write_csv, DiagnosticSample, CSV_COLUMNS};

use super::config::RunConfig;
use super::scenarios::ScenarioReport;
use super::ExperimentError;

/// Contents of `<hash>.summary.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub config_hash: String,
    pub passed: bool,
    pub report: serde_json::Value,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportPaths {
    pub summary: PathBuf,
    pub series: Option<PathBuf>,
}

/// Writes the run summary and, when the scenario produced one, the CSV series
/// into `cfg.output_dir`. File names are the config hash prefix.
pub fn emit_report(cfg: &RunConfig, report: &ScenarioReport, wall_time_s: f64) -> Result<ReportPaths, ExperimentError> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let stem = cfg.short_hash();
    let summary = RunSummary {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        passed: report.passed(),
        report: report.to_json(),
        wall_time_s,
    };
    let summary_path = dir.join(format!("{stem}.summary.json"));
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    let series = match report.samples() {
        Some(samples) => {
            let path = dir.join(format!("{stem}.series.csv"));
            let mut buf = Vec::new();
            write_csv(samples, &mut buf)?;
            std::fs::write(&path, buf)?;
            Some(path)
        }
        None => None,
    };
    Ok(ReportPaths {
        summary: summary_path,
        series,
    })
}

/// Reads a series written by [`emit_report`].
pub fn read_series_csv(path: &Path) -> Result<Vec<DiagnosticSample>, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_COLUMNS.join(",") {
        return Err(ExperimentError::Config(format!("unexpected CSV header in {}", path.display())));
    }
    lines
        .map(|line| {
            let row: Vec<f64> = line
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ExperimentError::Config(format!("bad CSV value: {e}")))?;
            DiagnosticSample::from_row(&row).ok_or_else(|| ExperimentError::Config("bad CSV row length".into()))
        })
        .collect()
}
