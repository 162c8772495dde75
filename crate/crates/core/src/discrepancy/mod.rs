//! Summary-free discrepancies between two empirical measures.

mod energy;
mod knn;
mod mmd;
mod wasserstein;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::error::{Error, Result};

pub use energy::{energy_vstat, energy_vstat_1d_fast};
pub use knn::{kl_knn, KdTree, TIE_FLOOR_RELATIVE};
pub use mmd::{mmd_ustat, mmd_vstat};
pub use wasserstein::{swap_assignment, wasserstein, SwapAssignment, DEFAULT_MAX_SWEEPS};

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn default_sweeps() -> usize {
    DEFAULT_MAX_SWEEPS
}

/// Which estimator to use, with its settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscrepancyKind {
    EnergyV {
        #[serde(default = "one")]
        beta: f64,
    },
    MmdU {
        #[serde(default = "one")]
        bandwidth: f64,
    },
    MmdV {
        #[serde(default = "one")]
        bandwidth: f64,
    },
    KlNn,
    Wasserstein {
        #[serde(default = "two")]
        p: f64,
        #[serde(default = "default_sweeps")]
        max_sweeps: usize,
    },
}

impl DiscrepancyKind {
    pub const ENERGY: Self = Self::EnergyV { beta: 1.0 };
    pub const MMD_U: Self = Self::MmdU { bandwidth: 1.0 };
    pub const MMD_V: Self = Self::MmdV { bandwidth: 1.0 };
    pub const KL: Self = Self::KlNn;
    pub const WASSERSTEIN: Self = Self::Wasserstein { p: 2.0, max_sweeps: DEFAULT_MAX_SWEEPS };

    /// The four discrepancies compared in the benchmark tables.
    pub fn benchmark_set() -> Vec<Self> {
        vec![Self::ENERGY, Self::KL, Self::WASSERSTEIN, Self::MMD_U]
    }

    /// Short table label.
    pub fn label(&self) -> &'static str {
        match self {
            Self::EnergyV { .. } => "ES",
            Self::MmdU { .. } => "MMD",
            Self::MmdV { .. } => "MMD-V",
            Self::KlNn => "KL",
            Self::Wasserstein { .. } => "WA",
        }
    }

    /// Whether values are guaranteed non-negative.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, Self::MmdU { .. } | Self::KlNn)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::EnergyV { beta } => energy::check_beta(beta),
            Self::MmdU { bandwidth } | Self::MmdV { bandwidth } => {
                mmd::inv_bandwidth_sq(bandwidth).map(|_| ())
            }
            Self::KlNn => Ok(()),
            Self::Wasserstein { p, max_sweeps } => wasserstein::check_params(p, max_sweeps),
        }
    }
}

impl fmt::Display for DiscrepancyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EnergyV { beta } => write!(f, "energy_v(beta={beta})"),
            Self::MmdU { bandwidth } => write!(f, "mmd_u(h={bandwidth})"),
            Self::MmdV { bandwidth } => write!(f, "mmd_v(h={bandwidth})"),
            Self::KlNn => write!(f, "kl_nn"),
            Self::Wasserstein { p, max_sweeps } => write!(f, "wasserstein(p={p}, sweeps={max_sweeps})"),
        }
    }
}

impl FromStr for DiscrepancyKind {
    type Err = Error;

    /// Accepts the table labels and the snake-case names, defaults applied.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "es" | "energy" | "energy_v" => Ok(Self::ENERGY),
            "mmd" | "mmd_u" => Ok(Self::MMD_U),
            "mmd-v" | "mmd_v" => Ok(Self::MMD_V),
            "kl" | "kl_nn" => Ok(Self::KL),
            "wa" | "w2" | "wasserstein" => Ok(Self::WASSERSTEIN),
            other => Err(Error::Parse(format!("unknown discrepancy '{other}'"))),
        }
    }
}

/// A discrepancy value tagged with the estimator that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyValue {
    pub value: f64,
    pub estimator_kind: DiscrepancyKind,
}

pub(crate) fn check_same_dim(x: &DataSet, y: &DataSet) -> Result<()> {
    if x.d() != y.d() {
        return Err(Error::Shape(format!("dimension mismatch: d={} vs d={}", x.d(), y.d())));
    }
    Ok(())
}

/// Observed-side quantities that stay fixed across simulated data sets.
#[derive(Debug, Clone)]
enum ObservedTerm {
    /// Sorted sample and its self sum, for the univariate energy path.
    EnergySorted { sorted: Vec<f64>, self_sum: f64 },
    EnergyPairs { beta: f64, self_sum: f64 },
    MmdU { inv_h2: f64, off_diagonal: f64 },
    MmdV { inv_h2: f64, full: f64 },
    Kl(knn::KlObserved),
    WassersteinSorted { sorted: Vec<f64>, p: f64 },
    Wasserstein { p: f64, max_sweeps: usize },
}

/// An observed data set with per-estimator constants computed once, so that
/// repeated comparisons against simulated data only pay for the
/// simulated-side terms.
#[derive(Debug, Clone)]
pub struct PreparedObserved {
    x: DataSet,
    kinds: Vec<DiscrepancyKind>,
    terms: Vec<ObservedTerm>,
}

impl PreparedObserved {
    pub fn new(x: &DataSet, kinds: &[DiscrepancyKind]) -> Result<Self> {
        let terms = kinds.iter().map(|k| Self::term(x, k)).collect::<Result<_>>()?;
        Ok(Self { x: x.clone(), kinds: kinds.to_vec(), terms })
    }

    fn term(x: &DataSet, kind: &DiscrepancyKind) -> Result<ObservedTerm> {
        kind.validate()?;
        if *kind == (DiscrepancyKind::EnergyV { beta: 2.0 }) {
            log::warn!("energy exponent beta = 2 only compares means");
        }
        Ok(match *kind {
            DiscrepancyKind::EnergyV { beta } if beta == 1.0 && x.d() == 1 => {
                let sorted = energy::sorted_column(x);
                let self_sum = energy::sorted_abs_sum(&sorted, &sorted);
                ObservedTerm::EnergySorted { sorted, self_sum }
            }
            DiscrepancyKind::EnergyV { beta } => {
                ObservedTerm::EnergyPairs { beta, self_sum: energy::pair_sum(x, x, beta) }
            }
            DiscrepancyKind::MmdU { bandwidth } => {
                if x.n() < 2 {
                    return Err(Error::InsufficientSample { needed: 2, found: x.n() });
                }
                let inv_h2 = mmd::inv_bandwidth_sq(bandwidth)?;
                ObservedTerm::MmdU { inv_h2, off_diagonal: mmd::kernel_sum_off_diagonal(x, inv_h2) }
            }
            DiscrepancyKind::MmdV { bandwidth } => {
                let inv_h2 = mmd::inv_bandwidth_sq(bandwidth)?;
                ObservedTerm::MmdV { inv_h2, full: mmd::kernel_sum(x, x, inv_h2) }
            }
            DiscrepancyKind::KlNn => ObservedTerm::Kl(knn::KlObserved::new(x)?),
            DiscrepancyKind::Wasserstein { p, .. } if x.d() == 1 => {
                ObservedTerm::WassersteinSorted { sorted: energy::sorted_column(x), p }
            }
            DiscrepancyKind::Wasserstein { p, max_sweeps } => {
                ObservedTerm::Wasserstein { p, max_sweeps }
            }
        })
    }

    pub fn observed(&self) -> &DataSet {
        &self.x
    }

    pub fn kinds(&self) -> &[DiscrepancyKind] {
        &self.kinds
    }

    /// Value of the `idx`-th prepared discrepancy against `y`.
    pub fn evaluate(&self, idx: usize, y: &DataSet) -> Result<f64> {
        let x = &self.x;
        check_same_dim(x, y)?;
        let (n, m) = (x.n(), y.n());
        Ok(match &self.terms[idx] {
            ObservedTerm::EnergySorted { sorted, self_sum } => {
                energy::energy_sorted(sorted, *self_sum, &energy::sorted_column(y))
            }
            ObservedTerm::EnergyPairs { beta, self_sum } => energy::combine(
                energy::pair_sum(x, y, *beta),
                *self_sum,
                energy::pair_sum(y, y, *beta),
                n,
                m,
            ),
            ObservedTerm::MmdU { inv_h2, off_diagonal } => {
                if m < 2 {
                    return Err(Error::InsufficientSample { needed: 2, found: m });
                }
                mmd::combine_u(
                    mmd::kernel_sum(x, y, *inv_h2),
                    *off_diagonal,
                    mmd::kernel_sum_off_diagonal(y, *inv_h2),
                    n,
                    m,
                )
            }
            ObservedTerm::MmdV { inv_h2, full } => mmd::combine_v(
                mmd::kernel_sum(x, y, *inv_h2),
                *full,
                mmd::kernel_sum(y, y, *inv_h2),
                n,
                m,
            ),
            ObservedTerm::Kl(obs) => obs.evaluate(x, y),
            ObservedTerm::WassersteinSorted { sorted, p } => {
                if n != m {
                    return Err(Error::SizeMismatch { n, m });
                }
                wasserstein::sorted_wasserstein(sorted, &energy::sorted_column(y), *p)
            }
            ObservedTerm::Wasserstein { p, max_sweeps } => wasserstein(x, y, *p, *max_sweeps)?,
        })
    }

    /// All prepared discrepancies against `y`, each with its own outcome.
    pub fn evaluate_all(&self, y: &DataSet) -> Vec<Result<f64>> {
        (0..self.terms.len()).map(|i| self.evaluate(i, y)).collect()
    }
}

/// Dispatches to the estimator selected by `kind`.
pub fn compute(kind: DiscrepancyKind, x: &DataSet, y: &DataSet) -> Result<DiscrepancyValue> {
    check_same_dim(x, y)?;
    let value = PreparedObserved::new(x, &[kind])?.evaluate(0, y)?;
    Ok(DiscrepancyValue { value, estimator_kind: kind })
}
