//! Wall-clock scaling of simulation plus discrepancy evaluation in `n`.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::cli::config::ResolvedConfig;
use crate::cli::experiment::{replication_seed, OBSERVED_STREAM};
use crate::discrepancy::{DiscrepancyKind, PreparedObserved};
use crate::engine::draw_record;
use crate::error::{Error, Result};
use crate::models::simulate;
use crate::rand_dist::RngState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub model: String,
    pub estimator: String,
    pub n: usize,
    pub records: usize,
    pub seconds: f64,
    pub log_n: f64,
    pub log_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    /// Least-squares slope of `log seconds` on `log n` for one estimator.
    pub fn slope(&self, estimator: &str) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.estimator == estimator)
            .map(|r| (r.log_n, r.log_seconds))
            .collect();
        log_log_slope(&pts)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `estimator, slope` rows.
    pub fn write_slopes_csv<W: Write>(&self, kinds: &[DiscrepancyKind], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["estimator", "slope"])?;
        for kind in kinds {
            let s = self.slope(kind.label()).map_or_else(|| "NaN".to_string(), |s| s.to_string());
            w.write_record([kind.label(), s.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ordinary least-squares slope; `None` for fewer than two distinct abscissae.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times `records` simulate-and-compare steps per discrepancy at each
/// `n` (with `m = n`), keeping the fastest of `repeats` passes. Observed data
/// generation is excluded; the observed-side preparation is included.
pub fn bench_timing(cfg: &ResolvedConfig, n_list: &[usize], records: usize, repeats: usize) -> Result<TimingReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::Config(vec!["n-list must be non-empty, positive and strictly ascending".into()]));
    }
    if records == 0 || repeats == 0 {
        return Err(Error::Config(vec!["records and repeats must be >= 1".into()]));
    }
    let seed = replication_seed(cfg.master_seed, 0);
    let mut rows = Vec::new();
    for &n in n_list {
        let mut rng = RngState::new(seed, OBSERVED_STREAM);
        let observed = simulate(&cfg.model, &cfg.model.true_theta, n, &mut rng)?;
        for kind in &cfg.discrepancies {
            let mut best = f64::INFINITY;
            for _ in 0..repeats {
                let start = Instant::now();
                let prepared = PreparedObserved::new(&observed, std::slice::from_ref(kind))?;
                for k in 0..records {
                    let (_, y) = draw_record(&cfg.model, k, n, seed);
                    std::hint::black_box(prepared.evaluate(0, &y?)?);
                }
                best = best.min(start.elapsed().as_secs_f64());
            }
            log::info!("{} n={n}: {best:.4} s", kind.label());
            rows.push(TimingRow {
                model: cfg.model.model_id.name().to_string(),
                estimator: kind.label().to_string(),
                n,
                records,
                seconds: best,
                log_n: (n as f64).ln(),
                log_seconds: best.ln(),
            });
        }
    }
    Ok(TimingReport { rows })
}
