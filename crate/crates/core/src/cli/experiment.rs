//! Replicated benchmark experiments and their aggregated report.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{kde, summarize, AxisSpec, PosteriorSummary};
use crate::cli::config::ResolvedConfig;
use crate::data::DataSet;
use crate::discrepancy::DiscrepancyKind;
use crate::engine::{accepted_sample, posterior_estimate, run_isabc_multi, select_epsilon, AbcRun};
use crate::error::Result;
use crate::models::{simulate, Theta};
use crate::rand_dist::{mix_seed, RngState};

/// Stream reserved for the observed data of a replication.
pub const OBSERVED_STREAM: u64 = u64::MAX;

/// Seed of replication `r`.
pub fn replication_seed(master_seed: u64, r: usize) -> u64 {
    mix_seed(master_seed, r as u64)
}

/// Observed data of replication `r`, drawn at the configured true parameter.
pub fn observed_data(cfg: &ResolvedConfig, r: usize) -> Result<DataSet> {
    let mut rng = RngState::new(replication_seed(cfg.master_seed, r), OBSERVED_STREAM);
    simulate(&cfg.model, &cfg.model.true_theta, cfg.n, &mut rng)
}

/// Outcome of one (replication, discrepancy) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub replication: usize,
    pub kind: DiscrepancyKind,
    pub outcome: std::result::Result<CellOutput, String>,
}

#[derive(Debug, Clone)]
pub struct CellOutput {
    pub eps: f64,
    pub accepted: Vec<Theta>,
    /// Weighted posterior mean under the configured weight function.
    pub estimate: Vec<f64>,
    pub summary: PosteriorSummary,
}

/// One row of the aggregated table: estimator by parameter, statistic per column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub parameter: String,
    pub theta0: f64,
    pub estimator: String,
    pub mean: f64,
    pub sd_mean: f64,
    pub median: f64,
    pub sd_median: f64,
    pub mae: f64,
    pub sd_mae: f64,
    pub rmse: f64,
    pub sd_rmse: f64,
    pub replications: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub model: String,
    pub rows: Vec<ReportRow>,
    /// `(replication, estimator, message)` of every failed cell.
    pub failures: Vec<(usize, String, String)>,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn row(&self, estimator: &str, parameter: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.parameter == parameter)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn evaluate_cell(cfg: &ResolvedConfig, run: &AbcRun) -> Result<CellOutput> {
    let eps = select_epsilon(run, cfg.keep_fraction)?;
    let accepted = accepted_sample(run, &eps);
    let estimate = posterior_estimate(run, &cfg.weight, &eps, |t| t.to_vec())?;
    let summary = summarize(&accepted, &cfg.model.true_theta)?;
    Ok(CellOutput { eps: eps.value, accepted, estimate, summary })
}

fn write_cell_artifacts(cfg: &ResolvedConfig, dir: &Path, cell: &CellOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let names = cfg.model.model_id.parameter_names();
    let mut w = csv::Writer::from_path(dir.join("accepted.csv"))?;
    w.write_record(&names)?;
    for t in &cell.accepted {
        w.write_record(t.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    cell.summary.write_csv(&names, fs::File::create(dir.join("summary.csv"))?)?;
    for (j, name) in names.iter().enumerate() {
        let col: Vec<Vec<f64>> = cell.accepted.iter().map(|t| vec![t[j]]).collect();
        match kde(&col, &[AxisSpec::Padded { pad: 4.0, points: cfg.kde_points }]) {
            Ok(grid) => grid.write_csv(&[name.clone()], fs::File::create(dir.join(format!("kde_{name}.csv")))?)?,
            Err(e) => log::warn!("no KDE for {name} in {}: {e}", dir.display()),
        }
    }
    Ok(())
}

/// Runs every replication and discrepancy, writing per-cell artifacts under
/// `out` when given. Cell failures are recorded and the run continues.
pub fn run_experiment(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<(BenchReport, Vec<CellResult>)> {
    let mut cells = Vec::new();
    for r in 0..cfg.replications {
        let seed = replication_seed(cfg.master_seed, r);
        let observed = observed_data(cfg, r)?;
        log::info!("replication {r}: N={} m={} seed={seed}", cfg.n_records, cfg.m);
        let runs = run_isabc_multi(&cfg.model, &observed, cfg.n_records, cfg.m, &cfg.discrepancies, seed)?;
        for (kind, run) in cfg.discrepancies.iter().zip(runs) {
            let outcome = run.and_then(|run| evaluate_cell(cfg, &run)).map_err(|e| e.to_string());
            if let (Some(out), Ok(cell)) = (out, &outcome) {
                write_cell_artifacts(cfg, &out.join(format!("rep{r}")).join(kind.label()), cell)?;
            }
            if let Err(msg) = &outcome {
                log::error!("replication {r}, {}: {msg}", kind.label());
            }
            cells.push(CellResult { replication: r, kind: *kind, outcome });
        }
    }
    let report = aggregate(cfg, &cells);
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        report.write_csv(fs::File::create(out.join("report.csv"))?)?;
    }
    Ok((report, cells))
}

/// Averages per-replication summaries into table rows.
pub fn aggregate(cfg: &ResolvedConfig, cells: &[CellResult]) -> BenchReport {
    let names = cfg.model.model_id.parameter_names();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for kind in &cfg.discrepancies {
        let mine: Vec<&CellResult> = cells.iter().filter(|c| c.kind == *kind).collect();
        let ok: Vec<&CellOutput> = mine.iter().filter_map(|c| c.outcome.as_ref().ok()).collect();
        for c in &mine {
            if let Err(msg) = &c.outcome {
                failures.push((c.replication, kind.label().to_string(), msg.clone()));
            }
        }
        let status = match (ok.len(), mine.len()) {
            (0, _) => "failed".to_string(),
            (a, b) if a == b => "ok".to_string(),
            (a, b) => format!("partial {a}/{b}"),
        };
        for (j, name) in names.iter().enumerate() {
            let stat = |f: &dyn Fn(&CellOutput) -> f64| mean_sd(&ok.iter().map(|c| f(c)).collect::<Vec<_>>());
            let (mean, sd_mean) = stat(&|c| c.estimate[j]);
            let (median, sd_median) = stat(&|c| c.summary.coords[j].median);
            let (mae, sd_mae) = stat(&|c| c.summary.coords[j].mae);
            let (rmse, sd_rmse) = stat(&|c| c.summary.coords[j].rmse);
            rows.push(ReportRow {
                parameter: name.clone(),
                theta0: cfg.model.true_theta[j],
                estimator: kind.label().to_string(),
                mean,
                sd_mean,
                median,
                sd_median,
                mae,
                sd_mae,
                rmse,
                sd_rmse,
                replications: ok.len(),
                status: status.clone(),
            });
        }
    }
    BenchReport { model: cfg.model.model_id.name().to_string(), rows, failures }
}
