//! Benchmark generative models: priors and forward simulators.
//!
//! Parameter layouts:
//!
//! | model            | theta                          | row dim |
//! |------------------|--------------------------------|---------|
//! | `GaussMix`       | `(p, mu0_x, mu0_y, mu1_x, mu1_y)` | 2     |
//! | `Ma2`            | `(theta1, theta2)`             | `D` (10) |
//! | `BivariateBeta`  | `(theta1, ..., theta5)`        | 2       |
//! | `GandK`          | `(A, B, g, k, rho)`            | 5       |
//! | `GaussLocation`  | `(theta)`                      | 1       |

use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::rand_dist::{cholesky, Cholesky, DistSpec, RngState};

/// Skewness constant of the g-and-k quantile function.
pub const GK_SKEW_CONSTANT: f64 = 0.8;

/// Parameter vector.
pub type Theta = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    GaussMix,
    Ma2,
    BivariateBeta,
    #[serde(rename = "g_and_k")]
    GandK,
    GaussLocation,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::GaussMix,
        ModelId::Ma2,
        ModelId::BivariateBeta,
        ModelId::GandK,
        ModelId::GaussLocation,
    ];

    /// Observed sample size used in the benchmark experiments.
    pub fn default_n(self) -> usize {
        match self {
            ModelId::GaussMix | ModelId::BivariateBeta => 500,
            ModelId::Ma2 | ModelId::GandK => 200,
            ModelId::GaussLocation => 100,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::GaussMix => "gauss_mix",
            ModelId::Ma2 => "ma2",
            ModelId::BivariateBeta => "bivariate_beta",
            ModelId::GandK => "g_and_k",
            ModelId::GaussLocation => "gauss_location",
        }
    }

    pub fn parameter_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            ModelId::GaussMix => &["p", "mu00", "mu01", "mu10", "mu11"],
            ModelId::Ma2 => &["theta1", "theta2"],
            ModelId::BivariateBeta => &["theta1", "theta2", "theta3", "theta4", "theta5"],
            ModelId::GandK => &["A", "B", "g", "k", "rho"],
            ModelId::GaussLocation => &["theta"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }
}

/// Model-specific constants that are not inferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FixedConstants {
    GaussMix {
        sigma0: [[f64; 2]; 2],
        sigma1: [[f64; 2]; 2],
    },
    Ma2 {
        series_len: usize,
        dof: f64,
    },
    BivariateBeta,
    #[serde(rename = "g_and_k")]
    GandK {
        dim: usize,
    },
    GaussLocation {
        sigma2: f64,
        tau2: f64,
    },
}

/// A generative model: independent per-coordinate priors plus a simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: ModelId,
    pub true_theta: Theta,
    pub prior: Vec<DistSpec>,
    pub obs_dim: usize,
    pub constants: FixedConstants,
}

impl ModelSpec {
    pub fn gauss_mix() -> Self {
        let unit = DistSpec::Uniform { low: -1.0, high: 1.0 };
        Self {
            model_id: ModelId::GaussMix,
            true_theta: vec![0.3, 0.7, 0.7, -0.7, -0.7],
            prior: vec![
                DistSpec::Uniform { low: 0.0, high: 1.0 },
                unit.clone(),
                unit.clone(),
                unit.clone(),
                unit,
            ],
            obs_dim: 2,
            constants: FixedConstants::GaussMix {
                sigma0: [[0.5, -0.3], [-0.3, 0.5]],
                sigma1: [[0.25, 0.0], [0.0, 0.25]],
            },
        }
    }

    pub fn ma2() -> Self {
        Self {
            model_id: ModelId::Ma2,
            true_theta: vec![0.6, 0.2],
            prior: vec![
                DistSpec::Uniform { low: -2.0, high: 2.0 },
                DistSpec::Uniform { low: -1.0, high: 1.0 },
            ],
            obs_dim: 10,
            constants: FixedConstants::Ma2 { series_len: 10, dof: 5.0 },
        }
    }

    pub fn bivariate_beta() -> Self {
        Self {
            model_id: ModelId::BivariateBeta,
            true_theta: vec![1.0; 5],
            prior: vec![DistSpec::Uniform { low: 0.0, high: 5.0 }; 5],
            obs_dim: 2,
            constants: FixedConstants::BivariateBeta,
        }
    }

    pub fn g_and_k() -> Self {
        let wide = DistSpec::Uniform { low: 0.0, high: 4.0 };
        Self {
            model_id: ModelId::GandK,
            true_theta: vec![3.0, 1.0, 2.0, 0.5, -0.3],
            prior: vec![
                wide.clone(),
                wide.clone(),
                wide.clone(),
                wide,
                DistSpec::Uniform { low: -0.5, high: 0.5 },
            ],
            obs_dim: 5,
            constants: FixedConstants::GandK { dim: 5 },
        }
    }

    /// `N(theta, sigma2)` observations with a `N(0, tau2)` prior.
    pub fn gauss_location(theta0: f64, sigma2: f64, tau2: f64) -> Self {
        Self {
            model_id: ModelId::GaussLocation,
            true_theta: vec![theta0],
            prior: vec![DistSpec::MultiNormal { mean: vec![0.0], cov: vec![vec![tau2]] }],
            obs_dim: 1,
            constants: FixedConstants::GaussLocation { sigma2, tau2 },
        }
    }

    pub fn default_for(id: ModelId) -> Self {
        match id {
            ModelId::GaussMix => Self::gauss_mix(),
            ModelId::Ma2 => Self::ma2(),
            ModelId::BivariateBeta => Self::bivariate_beta(),
            ModelId::GandK => Self::g_and_k(),
            ModelId::GaussLocation => Self::gauss_location(0.0, 1.0, 1.0),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.prior.len()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.model_id {
            ModelId::GaussMix => 5,
            ModelId::Ma2 => 2,
            ModelId::BivariateBeta => 5,
            ModelId::GandK => 5,
            ModelId::GaussLocation => 1,
        };
        if self.prior.len() != expected {
            return Err(Error::Shape(format!(
                "{} expects {expected} prior coordinates, got {}",
                self.model_id.name(),
                self.prior.len()
            )));
        }
        for p in &self.prior {
            p.validate()?;
            if p.dimension() != 1 {
                return Err(Error::Shape("each prior coordinate must be univariate".into()));
            }
        }
        let obs_dim = match (&self.model_id, &self.constants) {
            (ModelId::GaussMix, FixedConstants::GaussMix { sigma0, sigma1 }) => {
                cholesky(&to_rows(sigma0))?;
                cholesky(&to_rows(sigma1))?;
                2
            }
            (ModelId::Ma2, FixedConstants::Ma2 { series_len, dof }) => {
                DistSpec::StudentT { dof: *dof }.validate()?;
                if *series_len == 0 {
                    return Err(Error::Domain("MA(2) series length must be >= 1".into()));
                }
                *series_len
            }
            (ModelId::BivariateBeta, FixedConstants::BivariateBeta) => 2,
            (ModelId::GandK, FixedConstants::GandK { dim }) => {
                if *dim == 0 {
                    return Err(Error::Domain("g-and-k dimension must be >= 1".into()));
                }
                *dim
            }
            (ModelId::GaussLocation, FixedConstants::GaussLocation { sigma2, tau2 }) => {
                if !(*sigma2 > 0.0 && *tau2 > 0.0) {
                    return Err(Error::Domain("sigma2 and tau2 must be positive".into()));
                }
                1
            }
            _ => {
                return Err(Error::Domain(format!(
                    "constants do not match model {}",
                    self.model_id.name()
                )))
            }
        };
        if obs_dim != self.obs_dim {
            return Err(Error::Shape(format!(
                "obs_dim {} does not match constants ({obs_dim})",
                self.obs_dim
            )));
        }
        self.check_theta(&self.true_theta)
    }

    /// Checks that `theta` lies in the prior support and in the region where
    /// the simulator is defined.
    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.prior.len() {
            return Err(Error::Shape(format!(
                "theta has length {}, model expects {}",
                theta.len(),
                self.prior.len()
            )));
        }
        for (j, (x, p)) in theta.iter().zip(&self.prior).enumerate() {
            if !x.is_finite() || !p.contains(*x) {
                return Err(Error::Domain(format!("theta[{j}] = {x} is outside the prior support")));
            }
        }
        let ok = match self.model_id {
            ModelId::GaussMix => (0.0..=1.0).contains(&theta[0]),
            ModelId::BivariateBeta => theta.iter().all(|&t| t > 0.0),
            ModelId::GandK => theta[1] > 0.0 && theta[3] > -0.5,
            ModelId::Ma2 | ModelId::GaussLocation => true,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "theta {theta:?} is outside the {} parameter domain",
                self.model_id.name()
            )));
        }
        Ok(())
    }
}

fn to_rows(m: &[[f64; 2]; 2]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Draws a parameter vector from the independent coordinate priors.
pub fn prior_sample(model: &ModelSpec, rng: &mut RngState) -> Theta {
    model.prior.iter().map(|p| draw_scalar(p, rng)).collect()
}

fn draw_scalar(spec: &DistSpec, rng: &mut RngState) -> f64 {
    match spec {
        DistSpec::StdNormal => rng.std_normal(),
        DistSpec::Uniform { low, high } => rng.uniform(*low, *high),
        DistSpec::Gamma { shape, scale } => rng.gamma(*shape, *scale),
        DistSpec::StudentT { dof } => rng.student_t(*dof),
        DistSpec::MultiNormal { mean, cov } => mean[0] + cov[0][0].sqrt() * rng.std_normal(),
    }
}

/// The g-and-k quantile transform of a standard normal deviate `z`.
pub fn gk_quantile(z: f64, a: f64, b: f64, g: f64, k: f64) -> f64 {
    let e = (-g * z).exp();
    let skew = 1.0 + GK_SKEW_CONSTANT * (1.0 - e) / (1.0 + e);
    a + b * skew * (1.0 + z * z).powf(k) * z
}

/// Simulates `m` observations at `theta`.
pub fn simulate(model: &ModelSpec, theta: &[f64], m: usize, rng: &mut RngState) -> Result<DataSet> {
    model.check_theta(theta)?;
    if m == 0 {
        return Err(Error::InsufficientSample { needed: 1, found: 0 });
    }
    match (&model.model_id, &model.constants) {
        (ModelId::GaussMix, FixedConstants::GaussMix { sigma0, sigma1 }) => {
            gauss_mix_with_labels(theta, sigma0, sigma1, m, rng).map(|(x, _)| x)
        }
        (ModelId::Ma2, FixedConstants::Ma2 { series_len, dof }) => {
            Ok(ma2(theta, *series_len, *dof, m, rng)?)
        }
        (ModelId::BivariateBeta, FixedConstants::BivariateBeta) => bivariate_beta(theta, m, rng),
        (ModelId::GandK, FixedConstants::GandK { dim }) => g_and_k(theta, *dim, m, rng),
        (ModelId::GaussLocation, FixedConstants::GaussLocation { sigma2, .. }) => {
            let sd = sigma2.sqrt();
            DataSet::univariate((0..m).map(|_| theta[0] + sd * rng.std_normal()).collect())
        }
        _ => Err(Error::Domain("constants do not match model".into())),
    }
}

/// Mixture draws together with the component label of each row
/// (`true` = component 0, chosen with probability `p`).
#[doc(hidden)]
pub fn gauss_mix_with_labels(
    theta: &[f64],
    sigma0: &[[f64; 2]; 2],
    sigma1: &[[f64; 2]; 2],
    m: usize,
    rng: &mut RngState,
) -> Result<(DataSet, Vec<bool>)> {
    let chol: [Cholesky; 2] = [cholesky(&to_rows(sigma0))?, cholesky(&to_rows(sigma1))?];
    let p = theta[0];
    let means = [&theta[1..3], &theta[3..5]];
    let mut values = Vec::with_capacity(2 * m);
    let mut labels = Vec::with_capacity(m);
    let mut z = [0.0; 2];
    let mut out = [0.0; 2];
    for _ in 0..m {
        let first = rng.uniform_open() < p;
        let c = usize::from(!first);
        chol[c].draw(rng, means[c], &mut z, &mut out);
        values.extend_from_slice(&out);
        labels.push(first);
    }
    Ok((DataSet::new(values, m, 2)?, labels))
}

fn ma2(theta: &[f64], len: usize, dof: f64, m: usize, rng: &mut RngState) -> Result<DataSet> {
    let (t1, t2) = (theta[0], theta[1]);
    let mut values = Vec::with_capacity(m * len);
    // Two pre-sample innovations so that Y_1 sees Z_{-1} and Z_0.
    let mut noise = vec![0.0; len + 2];
    for _ in 0..m {
        for z in noise.iter_mut() {
            *z = rng.student_t(dof);
        }
        values.extend((2..len + 2).map(|t| noise[t] + t1 * noise[t - 1] + t2 * noise[t - 2]));
    }
    DataSet::new(values, m, len)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

fn bivariate_beta(theta: &[f64], m: usize, rng: &mut RngState) -> Result<DataSet> {
    let mut values = Vec::with_capacity(2 * m);
    let mut lu = [0.0; 5];
    for _ in 0..m {
        for (l, &shape) in lu.iter_mut().zip(theta) {
            *l = rng.log_gamma(shape);
        }
        // Z = V / (1 + V) with V = a / b is a / (a + b) = 1 / (1 + b / a).
        let z1 = 1.0 / (1.0 + (log_add_exp(lu[4], lu[3]) - log_add_exp(lu[0], lu[2])).exp());
        let z2 = 1.0 / (1.0 + (log_add_exp(lu[4], lu[2]) - log_add_exp(lu[1], lu[3])).exp());
        values.push(z1);
        values.push(z2);
    }
    DataSet::new(values, m, 2)
}

/// Tridiagonal correlation matrix with `rho` on the first off-diagonals.
pub fn tridiagonal_cov(dim: usize, rho: f64) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| match i.abs_diff(j) {
                    0 => 1.0,
                    1 => rho,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

fn g_and_k(theta: &[f64], dim: usize, m: usize, rng: &mut RngState) -> Result<DataSet> {
    let (a, b, g, k, rho) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
    let chol = cholesky(&tridiagonal_cov(dim, rho))?;
    let zero = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut corr = vec![0.0; dim];
    let mut values = Vec::with_capacity(m * dim);
    for _ in 0..m {
        chol.draw(rng, &zero, &mut z, &mut corr);
        values.extend(corr.iter().map(|&zi| gk_quantile(zi, a, b, g, k)));
    }
    DataSet::new(values, m, dim)
}
