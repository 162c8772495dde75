//! 1-nearest-neighbour Kullback-Leibler estimator, backed by a k-d tree.
//!
//! The tree returns the same minimum squared distance as a brute-force scan:
//! distances are evaluated by the same routine and the minimum of a set does
//! not depend on visiting order.

use crate::data::DataSet;
use crate::discrepancy::check_same_dim;
use crate::discrepancy::energy::sq_dist;
use crate::error::{Error, Result};

/// Multiplier of the data scale used in place of a zero neighbour distance.
pub const TIE_FLOOR_RELATIVE: f64 = 1e-12;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { lo: usize, hi: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static k-d tree over the rows of a data set.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    data: &'a DataSet,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(data: &'a DataSet) -> Self {
        let mut tree = Self { data, order: (0..data.n()).collect(), nodes: Vec::new() };
        tree.build_range(0, data.n());
        tree
    }

    fn build_range(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        if hi - lo <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { lo, hi });
            return id;
        }
        let axis = self.widest_axis(lo, hi);
        let mid = lo + (hi - lo) / 2;
        let data = self.data;
        self.order[lo..hi]
            .select_nth_unstable_by(mid - lo, |&a, &b| data.row(a)[axis].total_cmp(&data.row(b)[axis]));
        let value = data.row(self.order[mid])[axis];
        self.nodes.push(Node::Leaf { lo, hi });
        let left = self.build_range(lo, mid);
        let right = self.build_range(mid, hi);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    fn widest_axis(&self, lo: usize, hi: usize) -> usize {
        let d = self.data.d();
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..d {
            let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[lo..hi] {
                let v = self.data.row(i)[axis];
                min = min.min(v);
                max = max.max(v);
            }
            if max - min > best.1 {
                best = (axis, max - min);
            }
        }
        best.0
    }

    /// Smallest squared distance from `query` to a row other than `skip`.
    /// Infinite when every row is skipped.
    pub fn nearest_sq(&self, query: &[f64], skip: Option<usize>) -> f64 {
        let mut best = f64::INFINITY;
        if !self.nodes.is_empty() {
            self.search(0, query, skip, &mut best);
        }
        best
    }

    fn search(&self, node: usize, query: &[f64], skip: Option<usize>, best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { lo, hi } => {
                for &i in &self.order[lo..hi] {
                    if Some(i) == skip {
                        continue;
                    }
                    let d2 = sq_dist(query, self.data.row(i));
                    if d2 < *best {
                        *best = d2;
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, skip, best);
                if diff * diff < *best {
                    self.search(far, query, skip, best);
                }
            }
        }
    }
}

/// Within-sample nearest-neighbour distances of the observed data.
#[derive(Debug, Clone)]
pub(crate) struct KlObserved {
    /// `rho(i) = min_{j != i} ||x_i - x_j||`, before flooring.
    pub rho: Vec<f64>,
    pub max_abs: f64,
}

impl KlObserved {
    pub fn new(x: &DataSet) -> Result<Self> {
        if x.n() < 2 {
            return Err(Error::InsufficientSample { needed: 2, found: x.n() });
        }
        let tree = KdTree::build(x);
        let rho = x.rows().enumerate().map(|(i, xi)| tree.nearest_sq(xi, Some(i)).sqrt()).collect();
        Ok(Self { rho, max_abs: x.max_abs() })
    }

    pub fn evaluate(&self, x: &DataSet, y: &DataSet) -> f64 {
        let scale = self.max_abs.max(y.max_abs());
        let floor = if scale > 0.0 { TIE_FLOOR_RELATIVE * scale } else { TIE_FLOOR_RELATIVE };
        let tree = KdTree::build(y);
        let mut log_ratio = 0.0;
        for (xi, &rho) in x.rows().zip(&self.rho) {
            let nu = tree.nearest_sq(xi, None).sqrt();
            log_ratio += floored(nu, floor).ln() - floored(rho, floor).ln();
        }
        let (n, m, d) = (x.n() as f64, y.n() as f64, x.d() as f64);
        d / n * log_ratio + (m / (n - 1.0)).ln()
    }
}

#[inline]
fn floored(dist: f64, floor: f64) -> f64 {
    if dist == 0.0 {
        floor
    } else {
        dist
    }
}

/// `(d/n) sum_i log(nu_i / rho_i) + log(m / (n - 1))`.
pub fn kl_knn(x: &DataSet, y: &DataSet) -> Result<f64> {
    check_same_dim(x, y)?;
    Ok(KlObserved::new(x)?.evaluate(x, y))
}
