//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "model": "ma2",
//!   "N": 100000,
//!   "keep_fraction": 0.0005,
//!   "replications": 10,
//!   "master_seed": 1,
//!   "discrepancies": [{"kind": "energy_v"}, {"kind": "kl_nn"}],
//!   "weight": {"kind": "rejection"}
//! }
//! ```
//!
//! `model` is either a model id or a full model object. Omitted
//! fields take the benchmark defaults; `m` defaults to `n`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::discrepancy::DiscrepancyKind;
use crate::engine::{kept_count, WeightFn};
use crate::error::{Error, Result};
use crate::models::{ModelId, ModelSpec, Theta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Id(ModelId),
    Spec(Box<ModelSpec>),
}

fn default_records() -> usize {
    100_000
}

fn default_keep() -> f64 {
    0.0005
}

fn default_replications() -> usize {
    10
}

fn default_kinds() -> Vec<DiscrepancyKind> {
    DiscrepancyKind::benchmark_set()
}

fn default_kde_points() -> usize {
    256
}

fn default_bench_records() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    #[serde(default)]
    pub true_theta: Option<Theta>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(rename = "N", default = "default_records")]
    pub n_records: usize,
    #[serde(default = "default_keep")]
    pub keep_fraction: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_kinds")]
    pub discrepancies: Vec<DiscrepancyKind>,
    #[serde(default = "default_weight")]
    pub weight: WeightFn,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Grid points per KDE axis.
    #[serde(default = "default_kde_points")]
    pub kde_points: usize,
    /// Records per timing measurement.
    #[serde(default = "default_bench_records")]
    pub bench_records: usize,
}

fn default_weight() -> WeightFn {
    WeightFn::Rejection
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub m: usize,
    pub n_records: usize,
    pub keep_fraction: f64,
    pub master_seed: u64,
    pub replications: usize,
    pub discrepancies: Vec<DiscrepancyKind>,
    pub weight: WeightFn,
    pub output_dir: PathBuf,
    pub kde_points: usize,
    pub bench_records: usize,
}

impl ExperimentConfig {
    /// Benchmark defaults for a model.
    pub fn for_model(id: ModelId) -> Self {
        Self {
            model: ModelChoice::Id(id),
            true_theta: None,
            n: None,
            m: None,
            n_records: default_records(),
            keep_fraction: default_keep(),
            master_seed: 0,
            replications: default_replications(),
            discrepancies: default_kinds(),
            weight: default_weight(),
            output_dir: None,
            kde_points: default_kde_points(),
            bench_records: default_bench_records(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Divides `N` and multiplies the keep fraction by `scale`, holding the
    /// accepted-sample size fixed.
    pub fn scaled(mut self, scale: f64) -> Result<Self> {
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(Error::Config(vec![format!("scale must be >= 1, got {scale}")]));
        }
        self.n_records = (self.n_records as f64 / scale).round() as usize;
        self.keep_fraction *= scale;
        Ok(self)
    }

    /// Checks every field, reporting all problems together.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let mut errs = Vec::new();
        let mut model = match &self.model {
            ModelChoice::Id(id) => ModelSpec::default_for(*id),
            ModelChoice::Spec(spec) => (**spec).clone(),
        };
        if let Some(t) = &self.true_theta {
            model.true_theta = t.clone();
        }
        if let Err(e) = model.validate() {
            errs.push(format!("model: {e}"));
        }
        let n = self.n.unwrap_or_else(|| model.model_id.default_n());
        let m = self.m.unwrap_or(n);
        if n == 0 {
            errs.push("n must be >= 1".into());
        }
        if m == 0 {
            errs.push("m must be >= 1".into());
        }
        if self.n_records == 0 {
            errs.push("N must be >= 1".into());
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            errs.push(format!("keep_fraction must be in (0, 1], got {}", self.keep_fraction));
        } else if self.keep_fraction * (self.n_records as f64) < 1.0 - 1e-9 {
            errs.push(format!(
                "keep_fraction * N = {} keeps no record",
                self.keep_fraction * self.n_records as f64
            ));
        }
        if self.replications == 0 {
            errs.push("replications must be >= 1".into());
        }
        if self.discrepancies.is_empty() {
            errs.push("discrepancies must not be empty".into());
        }
        for kind in &self.discrepancies {
            if let Err(e) = kind.validate() {
                errs.push(format!("discrepancy {kind}: {e}"));
            }
            match kind {
                DiscrepancyKind::Wasserstein { .. } if n != m => {
                    errs.push(format!("{kind} needs m == n, got n={n}, m={m}"));
                }
                DiscrepancyKind::KlNn | DiscrepancyKind::MmdU { .. } if n < 2 || m < 2 => {
                    errs.push(format!("{kind} needs n, m >= 2"));
                }
                _ => {}
            }
        }
        if let Err(e) = self.weight.validate() {
            errs.push(format!("weight: {e}"));
        }
        if self.kde_points < 2 {
            errs.push("kde_points must be >= 2".into());
        }
        if self.bench_records == 0 {
            errs.push("bench_records must be >= 1".into());
        }
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(ResolvedConfig {
            model,
            n,
            m,
            n_records: self.n_records,
            keep_fraction: self.keep_fraction,
            master_seed: self.master_seed,
            replications: self.replications,
            discrepancies: self.discrepancies.clone(),
            weight: self.weight,
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            kde_points: self.kde_points,
            bench_records: self.bench_records,
        })
    }
}

impl ResolvedConfig {
    /// Accepted-sample size per run.
    pub fn kept(&self) -> usize {
        kept_count(self.keep_fraction, self.n_records)
    }
}
