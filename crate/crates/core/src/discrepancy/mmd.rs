//! Gaussian-kernel maximum mean discrepancy, `k(x, y) = exp(-||x - y||^2 / h^2)`.

use crate::data::DataSet;
use crate::discrepancy::check_same_dim;
use crate::discrepancy::energy::sq_dist;
use crate::error::{Error, Result};

#[inline]
fn kernel(d2: f64, inv_h2: f64) -> f64 {
    (-d2 * inv_h2).exp()
}

pub(crate) fn inv_bandwidth_sq(bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Domain(format!("MMD bandwidth must be positive, got {bandwidth}")));
    }
    Ok(1.0 / (bandwidth * bandwidth))
}

/// `sum_i sum_j k(x_i, y_j)` over all pairs.
pub(crate) fn kernel_sum(x: &DataSet, y: &DataSet, inv_h2: f64) -> f64 {
    let mut total = 0.0;
    for xi in x.rows() {
        let mut row = 0.0;
        for yj in y.rows() {
            row += kernel(sq_dist(xi, yj), inv_h2);
        }
        total += row;
    }
    total
}

/// `sum_{i != j} k(x_i, x_j)`.
pub(crate) fn kernel_sum_off_diagonal(x: &DataSet, inv_h2: f64) -> f64 {
    let mut total = 0.0;
    for (i, xi) in x.rows().enumerate() {
        let mut row = 0.0;
        for (j, xj) in x.rows().enumerate() {
            if i != j {
                row += kernel(sq_dist(xi, xj), inv_h2);
            }
        }
        total += row;
    }
    total
}

pub(crate) fn combine_u(cross: f64, off_x: f64, off_y: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    off_x / (n * (n - 1.0)) + off_y / (m * (m - 1.0)) - 2.0 * cross / (n * m)
}

pub(crate) fn combine_v(cross: f64, full_x: f64, full_y: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (full_x / (n * n) + full_y / (m * m) - 2.0 * cross / (n * m)).max(0.0)
}

/// Unbiased U-statistic estimate of the squared MMD. Can be negative.
pub fn mmd_ustat(x: &DataSet, y: &DataSet, bandwidth: f64) -> Result<f64> {
    check_same_dim(x, y)?;
    for s in [x, y] {
        if s.n() < 2 {
            return Err(Error::InsufficientSample { needed: 2, found: s.n() });
        }
    }
    let inv_h2 = inv_bandwidth_sq(bandwidth)?;
    Ok(combine_u(
        kernel_sum(x, y, inv_h2),
        kernel_sum_off_diagonal(x, inv_h2),
        kernel_sum_off_diagonal(y, inv_h2),
        x.n(),
        y.n(),
    ))
}

/// Biased V-statistic estimate of the squared MMD. Always non-negative.
pub fn mmd_vstat(x: &DataSet, y: &DataSet, bandwidth: f64) -> Result<f64> {
    check_same_dim(x, y)?;
    let inv_h2 = inv_bandwidth_sq(bandwidth)?;
    Ok(combine_v(
        kernel_sum(x, y, inv_h2),
        kernel_sum(x, x, inv_h2),
        kernel_sum(y, y, inv_h2),
        x.n(),
        y.n(),
    ))
}
