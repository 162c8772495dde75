//! Row-major observation matrices viewed as empirical measures.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An `n x d` matrix of finite observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl DataSet {
    /// Builds a data set from row-major values.
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Shape(format!("data set must be non-empty, got {n}x{d}")));
        }
        if values.len() != n * d {
            return Err(Error::Shape(format!(
                "expected {} values for {n}x{d}, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry {} at row {}, column {}",
                values[pos],
                pos / d,
                pos % d
            )));
        }
        Ok(Self { values, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(rows.iter().flatten().copied().collect(), rows.len(), d)
    }

    /// A `n x 1` data set.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, n, 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Every entry shifted by `offset` (one offset per column).
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.d {
            return Err(Error::Shape(format!(
                "offset has length {}, data has d={}",
                offset.len(),
                self.d
            )));
        }
        let values = self
            .rows()
            .flat_map(|r| r.iter().zip(offset).map(|(x, c)| x + c))
            .collect();
        Self::new(values, self.n, self.d)
    }

    /// SHA-256 over the shape and the little-endian bit patterns of the values.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update((self.d as u64).to_le_bytes());
        for v in &self.values {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
