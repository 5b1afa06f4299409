//! Experiment orchestration for the transfer laboratory: instance
//! generation, roster runs, reports and plots.

pub mod bounds;
pub mod config;
pub mod error;
pub mod generate;
pub mod report;
pub mod roster;
pub mod svg;

use std::path::Path;

pub use config::{Algorithm, ExperimentConfig, GeneratorSpec};
pub use error::{HarnessError, Result};
pub use generate::generate_instance;
pub use report::Report;

/// Runs the roster and, when `out` is given, writes raw results plus the
/// report (under `out/report`).
pub fn run_roster(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    cfg.validate()?;
    let bundle = roster::load_or_generate(cfg)?;
    let outcomes = roster::run_trials(cfg, &bundle)?;
    let raw = roster::collect_raw(&outcomes, &bundle)?;
    let report = Report::from_raw(&raw)?;
    if let Some(dir) = out.or(cfg.output_dir.as_deref()) {
        roster::write_run(dir, cfg, &bundle, &outcomes, &raw)?;
        report.write(&dir.join("report"))?;
    }
    Ok(report)
}
