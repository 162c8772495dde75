//! Energy-statistic V-estimator.
//!
//! All double sums run over the full index range in row order, so that
//! `energy(X, X)` cancels to exactly zero.

use crate::data::DataSet;
use crate::discrepancy::check_same_dim;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `||a - b||^beta` given the squared distance.
#[inline]
pub(crate) fn metric_power(d2: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        d2.sqrt()
    } else if beta == 2.0 {
        d2
    } else {
        d2.powf(0.5 * beta)
    }
}

/// `sum_i sum_j ||x_i - y_j||^beta`.
pub(crate) fn pair_sum(x: &DataSet, y: &DataSet, beta: f64) -> f64 {
    let mut total = 0.0;
    for xi in x.rows() {
        let mut row = 0.0;
        for yj in y.rows() {
            row += metric_power(sq_dist(xi, yj), beta);
        }
        total += row;
    }
    total
}

pub(crate) fn combine(cross: f64, self_x: f64, self_y: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let v = 2.0 * cross / (n * m) - self_x / (n * n) - self_y / (m * m);
    v.max(0.0)
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("energy exponent beta must be in (0, 2], got {beta}")));
    }
    Ok(())
}

/// V-statistic estimate of the energy distance with `delta = ||x - y||^beta`.
///
/// Quadratic in the sample sizes. Rounding residue below zero is clamped.
pub fn energy_vstat(x: &DataSet, y: &DataSet, beta: f64) -> Result<f64> {
    check_same_dim(x, y)?;
    check_beta(beta)?;
    Ok(combine(pair_sum(x, y, beta), pair_sum(x, x, beta), pair_sum(y, y, beta), x.n(), y.n()))
}

/// Sorted copy of a univariate sample.
pub(crate) fn sorted_column(x: &DataSet) -> Vec<f64> {
    let mut v = x.values().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sum_i sum_j |a_i - b_j|` for sorted `a` and `b`, in `O(n + m)` after sorting.
pub(crate) fn sorted_abs_sum(a: &[f64], b: &[f64]) -> f64 {
    let total_b: f64 = b.iter().sum();
    let m = b.len() as f64;
    let mut below = 0usize;
    let mut prefix = 0.0;
    let mut acc = 0.0;
    for &ai in a {
        while below < b.len() && b[below] <= ai {
            prefix += b[below];
            below += 1;
        }
        let k = below as f64;
        acc += (ai * k - prefix) + ((total_b - prefix) - ai * (m - k));
    }
    acc
}

/// Energy V-statistic (`beta = 1`) for univariate samples via sorting and
/// prefix sums.
pub fn energy_vstat_1d_fast(x: &DataSet, y: &DataSet) -> Result<f64> {
    if x.d() != 1 || y.d() != 1 {
        return Err(Error::Shape(format!(
            "fast energy path needs univariate data, got d={} and d={}",
            x.d(),
            y.d()
        )));
    }
    let xs = sorted_column(x);
    let ys = sorted_column(y);
    Ok(energy_sorted(&xs, sorted_abs_sum(&xs, &xs), &ys))
}

pub(crate) fn energy_sorted(xs: &[f64], self_x: f64, ys: &[f64]) -> f64 {
    let cross = sorted_abs_sum(xs, ys);
    let self_y = sorted_abs_sum(ys, ys);
    combine(cross, self_x, self_y, xs.len(), ys.len())
}
