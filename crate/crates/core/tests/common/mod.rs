//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod props;

use esabc::data::DataSet;
use esabc::rand_dist::RngState;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn mean_over_pairs(x: &DataSet, y: &DataSet, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 0..x.n() {
        for j in 0..y.n() {
            s += f(x.row(i), y.row(j));
        }
    }
    s / (x.n() * y.n()) as f64
}

fn mean_off_diagonal(x: &DataSet, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let n = x.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += f(x.row(i), x.row(j));
            }
        }
    }
    s / (n * (n - 1)) as f64
}

/// `(value, scale)`: the energy V-statistic and the largest of its three terms.
pub fn energy_ref(x: &DataSet, y: &DataSet, beta: f64) -> (f64, f64) {
    let f = |a: &[f64], b: &[f64]| dist(a, b).powf(beta);
    let (xy, xx, yy) = (mean_over_pairs(x, y, f), mean_over_pairs(x, x, f), mean_over_pairs(y, y, f));
    ((2.0 * xy - xx - yy).max(0.0), (2.0 * xy).max(xx).max(yy))
}

fn gauss(a: &[f64], b: &[f64], h: f64) -> f64 {
    (-(dist(a, b).powi(2)) / (h * h)).exp()
}

pub fn mmd_u_ref(x: &DataSet, y: &DataSet, h: f64) -> (f64, f64) {
    let f = |a: &[f64], b: &[f64]| gauss(a, b, h);
    let (xx, yy, xy) = (mean_off_diagonal(x, f), mean_off_diagonal(y, f), mean_over_pairs(x, y, f));
    (xx + yy - 2.0 * xy, xx.max(yy).max(2.0 * xy))
}

pub fn mmd_v_ref(x: &DataSet, y: &DataSet, h: f64) -> (f64, f64) {
    let f = |a: &[f64], b: &[f64]| gauss(a, b, h);
    let (xx, yy, xy) = (mean_over_pairs(x, x, f), mean_over_pairs(y, y, f), mean_over_pairs(x, y, f));
    ((xx + yy - 2.0 * xy).max(0.0), xx.max(yy).max(2.0 * xy))
}

/// 1-NN KL estimate by exhaustive search, with the relative tie floor.
pub fn kl_ref(x: &DataSet, y: &DataSet) -> (f64, f64) {
    let (n, m, d) = (x.n(), y.n(), x.d() as f64);
    let scale = x.values().iter().chain(y.values()).fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = if scale > 0.0 { 1e-12 * scale } else { 1e-12 };
    let fl = |v: f64| if v == 0.0 { floor } else { v };
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for i in 0..n {
        let rho = (0..n).filter(|&j| j != i).map(|j| dist(x.row(i), x.row(j))).fold(f64::INFINITY, f64::min);
        let nu = (0..m).map(|j| dist(x.row(i), y.row(j))).fold(f64::INFINITY, f64::min);
        let t = (fl(nu) / fl(rho)).ln();
        sum += t;
        abs_sum += t.abs();
    }
    let c = (m as f64 / (n as f64 - 1.0)).ln();
    (d / n as f64 * sum + c, d / n as f64 * abs_sum + c.abs())
}

fn cost_matrix(x: &DataSet, y: &DataSet, p: f64) -> Vec<Vec<f64>> {
    (0..x.n()).map(|i| (0..y.n()).map(|j| dist(x.row(i), y.row(j)).powf(p)).collect()).collect()
}

/// Minimum-cost perfect matching by the Hungarian algorithm; returns the total cost.
pub fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

/// Exact `W_p` via optimal assignment.
pub fn wasserstein_exact(x: &DataSet, y: &DataSet, p: f64) -> f64 {
    (hungarian(&cost_matrix(x, y, p)) / x.n() as f64).powf(1.0 / p)
}

/// The swapping heuristic written directly: for each pair in sweep order,
/// swap when the two affected costs decrease, recomputing distances each time.
pub fn wasserstein_swap_ref(x: &DataSet, y: &DataSet, p: f64, max_sweeps: usize) -> f64 {
    let n = x.n();
    let c = |i: usize, j: usize| dist(x.row(i), y.row(j)).powf(p);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..max_sweeps {
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                let before = c(i, perm[i]) + c(j, perm[j]);
                let after = c(i, perm[j]) + c(j, perm[i]);
                if after < before {
                    perm.swap(i, j);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    ((0..n).map(|i| c(i, perm[i])).sum::<f64>() / n as f64).powf(1.0 / p)
}

pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    let denom = want.abs().max(scale.abs()).max(f64::MIN_POSITIVE);
    (got - want).abs() / denom
}

/// A random `n x d` data set with a random location and spread.
pub fn random_dataset(rng: &mut RngState, n: usize, d: usize) -> DataSet {
    let loc = rng.uniform(-2.0, 2.0);
    let spread = rng.uniform(0.2, 3.0);
    DataSet::new((0..n * d).map(|_| loc + spread * rng.std_normal()).collect(), n, d).unwrap()
}

pub fn uni(v: &[f64]) -> DataSet {
    DataSet::univariate(v.to_vec()).unwrap()
}
