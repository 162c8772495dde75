//! p-Wasserstein distance between equal-size empirical measures.
//!
//! Univariate samples are matched exactly by sorting. In higher dimension
//! the optimal assignment is approximated by the swapping algorithm: start
//! from the identity permutation and exchange the targets of any pair whose
//! swap lowers the total cost, sweeping until a full pass changes nothing.

use crate::data::DataSet;
use crate::discrepancy::check_same_dim;
use crate::discrepancy::energy::{sorted_column, sq_dist};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWEEPS: usize = 200;

/// Result of a swapping run.
#[derive(Debug, Clone)]
pub struct SwapAssignment {
    /// `perm[i]` is the row of `Y` matched to row `i` of `X`.
    pub perm: Vec<usize>,
    /// Total cost after initialization and after each sweep.
    pub cost_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl SwapAssignment {
    pub fn cost(&self) -> f64 {
        *self.cost_trace.last().expect("trace holds the initial cost")
    }
}

#[inline]
fn ground_cost(d2: f64, p: f64) -> f64 {
    if p == 2.0 {
        d2
    } else if p == 1.0 {
        d2.sqrt()
    } else {
        d2.powf(0.5 * p)
    }
}

pub(crate) fn check_params(p: f64, max_sweeps: usize) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Wasserstein order p must be >= 1, got {p}")));
    }
    if max_sweeps == 0 {
        return Err(Error::Domain("max_sweeps must be >= 1".into()));
    }
    Ok(())
}

fn check_sizes(x: &DataSet, y: &DataSet) -> Result<()> {
    check_same_dim(x, y)?;
    if x.n() != y.n() {
        return Err(Error::SizeMismatch { n: x.n(), m: y.n() });
    }
    Ok(())
}

/// Runs the swapping heuristic on the cost `||x_i - y_j||^p`.
pub fn swap_assignment(x: &DataSet, y: &DataSet, p: f64, max_sweeps: usize) -> Result<SwapAssignment> {
    check_sizes(x, y)?;
    check_params(p, max_sweeps)?;
    let n = x.n();
    let mut cost = vec![0.0; n * n];
    for (i, xi) in x.rows().enumerate() {
        for (j, yj) in y.rows().enumerate() {
            cost[i * n + j] = ground_cost(sq_dist(xi, yj), p);
        }
    }
    let c = |i: usize, j: usize| cost[i * n + j];
    let total = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| c(i, j)).sum::<f64>();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut cost_trace = vec![total(&perm)];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                let (si, sj) = (perm[i], perm[j]);
                let delta = c(i, sj) + c(j, si) - c(i, si) - c(j, sj);
                if delta < 0.0 {
                    perm.swap(i, j);
                    changed = true;
                }
            }
        }
        cost_trace.push(total(&perm));
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(SwapAssignment { perm, cost_trace, sweeps, converged })
}

/// `((1/n) sum_i |x_(i) - y_(i)|^p)^(1/p)` over order statistics.
pub(crate) fn sorted_wasserstein(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    let n = xs.len() as f64;
    let cost: f64 = xs.iter().zip(ys).map(|(a, b)| ground_cost((a - b) * (a - b), p)).sum();
    (cost / n).powf(1.0 / p)
}

/// Wasserstein distance of order `p`; exact for `d = 1`, swapping
/// approximation otherwise.
pub fn wasserstein(x: &DataSet, y: &DataSet, p: f64, max_sweeps: usize) -> Result<f64> {
    check_sizes(x, y)?;
    check_params(p, max_sweeps)?;
    if x.d() == 1 {
        return Ok(sorted_wasserstein(&sorted_column(x), &sorted_column(y), p));
    }
    let assignment = swap_assignment(x, y, p, max_sweeps)?;
    Ok((assignment.cost() / x.n() as f64).powf(1.0 / p))
}
