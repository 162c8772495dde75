//! Deterministic, splittable random streams and the sampling laws the
//! simulators need.
//!
//! A stream is addressed by `(master_seed, stream_id)`. The generator is
//! ChaCha8 keyed from the master seed with the stream id in the cipher's
//! nonce slot, so replicate `k` can be generated on any thread without
//! touching the others.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::error::{Error, Result};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// One independent random stream.
#[derive(Debug, Clone)]
pub struct RngState {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position of the block counter, in 32-bit words.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on (low, high).
    #[inline]
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform_open()
    }

    /// Natural log of a `Gamma(shape, 1)` variate.
    ///
    /// Marsaglia-Tsang squeeze for `shape >= 1`; for `shape < 1` the
    /// variate is boosted from `shape + 1` and kept on the log scale so that
    /// tiny shapes do not underflow to zero.
    pub fn log_gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let boosted = self.log_gamma(shape + 1.0);
            return boosted + self.uniform_open().ln() / shape;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.std_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform_open();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d.ln() + v.ln();
            }
        }
    }

    /// `Gamma(shape, scale)` variate.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        scale * self.log_gamma(shape).exp()
    }

    /// Student-t as `N(0,1) / sqrt(chi2(dof) / dof)`, with `chi2 = 2 Gamma(dof/2, 1)`.
    pub fn student_t(&mut self, dof: f64) -> f64 {
        let z = self.std_normal();
        let chi2 = 2.0 * self.gamma(0.5 * dof, 1.0);
        z / (chi2 / dof).sqrt()
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer, used to derive child seeds from a parent seed.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A named sampling law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    StdNormal,
    Uniform {
        low: f64,
        high: f64,
    },
    Gamma {
        shape: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    StudentT {
        dof: f64,
    },
    MultiNormal {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

impl DistSpec {
    pub fn dimension(&self) -> usize {
        match self {
            Self::MultiNormal { mean, .. } => mean.len(),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            Self::StdNormal => Ok(()),
            Self::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return bad(format!("uniform needs finite low < high, got ({low}, {high})"));
                }
                Ok(())
            }
            Self::Gamma { shape, scale } => {
                if !(*shape > 0.0 && shape.is_finite() && *scale > 0.0 && scale.is_finite()) {
                    return bad(format!("gamma needs shape, scale > 0, got ({shape}, {scale})"));
                }
                Ok(())
            }
            Self::StudentT { dof } => {
                if !(*dof > 0.0 && dof.is_finite()) {
                    return bad(format!("student-t needs dof > 0, got {dof}"));
                }
                Ok(())
            }
            Self::MultiNormal { mean, cov } => {
                if mean.is_empty() {
                    return bad("multivariate normal needs a non-empty mean".into());
                }
                cholesky(cov).map(|_| ())
            }
        }
    }

    /// Whether `x` lies in the closure of the law's support.
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Self::Uniform { low, high } => *low <= x && x <= *high,
            Self::Gamma { .. } => x >= 0.0,
            _ => x.is_finite(),
        }
    }
}

/// `count` independent draws from `spec`, one per row.
pub fn sample(rng: &mut RngState, spec: &DistSpec, count: usize) -> Result<DataSet> {
    spec.validate()?;
    let dim = spec.dimension();
    let mut values = Vec::with_capacity(count * dim);
    match spec {
        DistSpec::StdNormal => values.extend((0..count).map(|_| rng.std_normal())),
        DistSpec::Uniform { low, high } => {
            values.extend((0..count).map(|_| rng.uniform(*low, *high)))
        }
        DistSpec::Gamma { shape, scale } => {
            values.extend((0..count).map(|_| rng.gamma(*shape, *scale)))
        }
        DistSpec::StudentT { dof } => values.extend((0..count).map(|_| rng.student_t(*dof))),
        DistSpec::MultiNormal { mean, cov } => {
            let chol = cholesky(cov)?;
            if chol.dim() != dim {
                return Err(Error::Covariance(format!(
                    "mean has length {dim}, covariance is {}x{}",
                    chol.dim(),
                    chol.dim()
                )));
            }
            let mut z = vec![0.0; dim];
            let mut out = vec![0.0; dim];
            for _ in 0..count {
                chol.draw(rng, mean, &mut z, &mut out);
                values.extend_from_slice(&out);
            }
        }
    }
    DataSet::new(values, count, dim)
}

/// Lower-triangular factor `L` with `L L^T = cov`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Writes `mean + L z` into `out` using fresh standard normals in `z`.
    pub fn draw(&self, rng: &mut RngState, mean: &[f64], z: &mut [f64], out: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = rng.std_normal();
        }
        for i in 0..self.dim {
            let row = &self.lower[i * self.dim..i * self.dim + i + 1];
            out[i] = mean[i] + row.iter().zip(z.iter()).map(|(l, z)| l * z).sum::<f64>();
        }
    }
}

/// Cholesky factorization that tolerates positive semi-definite input.
///
/// A zero pivot is accepted when the rest of its column is zero too; the
/// corresponding column of the factor is then zero.
pub fn cholesky(cov: &[Vec<f64>]) -> Result<Cholesky> {
    let dim = cov.len();
    if dim == 0 || cov.iter().any(|r| r.len() != dim) {
        return Err(Error::Covariance("covariance must be a non-empty square matrix".into()));
    }
    let scale = (0..dim).fold(0.0f64, |acc, i| acc.max(cov[i][i].abs()));
    if !scale.is_finite() || cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Covariance("covariance has non-finite entries".into()));
    }
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for i in 0..dim {
        for j in 0..i {
            if (cov[i][j] - cov[j][i]).abs() > tol.max(1e-12 * cov[i][j].abs()) {
                return Err(Error::Covariance(format!("covariance is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut lower = vec![0.0f64; dim * dim];
    for k in 0..dim {
        let pivot = cov[k][k] - (0..k).map(|j| lower[k * dim + j].powi(2)).sum::<f64>();
        if pivot < -tol {
            return Err(Error::Covariance(format!(
                "covariance is not positive semi-definite (pivot {pivot} at {k})"
            )));
        }
        if pivot <= tol {
            for i in k + 1..dim {
                let rest =
                    cov[i][k] - (0..k).map(|j| lower[i * dim + j] * lower[k * dim + j]).sum::<f64>();
                if rest.abs() > tol.sqrt() * scale.sqrt().max(1.0) {
                    return Err(Error::Covariance(format!(
                        "covariance admits no factorization (zero pivot at {k})"
                    )));
                }
            }
            continue;
        }
        let diag = pivot.sqrt();
        lower[k * dim + k] = diag;
        for i in k + 1..dim {
            let s = cov[i][k] - (0..k).map(|j| lower[i * dim + j] * lower[k * dim + j]).sum::<f64>();
            lower[i * dim + k] = s / diag;
        }
    }
    Ok(Cholesky { dim, lower })
}
