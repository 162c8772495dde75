//! Posterior summaries, kernel density estimates and closed-form results for
//! the Gaussian location model.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discrepancy::DiscrepancyKind;
use crate::error::{Error, Result};

/// Error metrics of one parameter coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordSummary {
    pub theta0: f64,
    pub mean: f64,
    pub median: f64,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub coords: Vec<CoordSummary>,
    /// Accepted-sample size.
    pub m: usize,
}

impl PosteriorSummary {
    pub fn theta0(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.theta0).collect()
    }

    /// One row per coordinate.
    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parameter", "theta0", "mean", "median", "mae", "mse", "rmse", "M"])?;
        for (name, c) in names.iter().zip(&self.coords) {
            w.write_record([
                name.clone(),
                c.theta0.to_string(),
                c.mean.to_string(),
                c.median.to_string(),
                c.mae.to_string(),
                c.mse.to_string(),
                c.rmse.to_string(),
                self.m.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Median with the midpoint convention for an even count. `values` must be non-empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Coordinatewise mean, median, MAE, MSE and RMSE against `theta0`.
pub fn summarize(samples: &[Vec<f64>], theta0: &[f64]) -> Result<PosteriorSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != theta0.len()) {
        return Err(Error::Shape(format!("sample of length {} vs theta0 of length {}", bad.len(), theta0.len())));
    }
    let m = samples.len() as f64;
    let coords = theta0
        .iter()
        .enumerate()
        .map(|(j, &t0)| {
            let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let mean = col.iter().sum::<f64>() / m;
            let mae = col.iter().map(|v| (v - t0).abs()).sum::<f64>() / m;
            let mse = col.iter().map(|v| (v - t0) * (v - t0)).sum::<f64>() / m;
            CoordSummary { theta0: t0, mean, median: median(&col), mae, mse, rmse: mse.sqrt() }
        })
        .collect();
    Ok(PosteriorSummary { coords, m: samples.len() })
}

/// How to lay out one KDE grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisSpec {
    Fixed { lo: f64, hi: f64, points: usize },
    /// Sample range extended by `pad` bandwidths on each side.
    Padded { pad: f64, points: usize },
}

/// Densities on a 1-D grid or a 2-D lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    pub axes: Vec<Vec<f64>>,
    /// Row-major over the lattice, first axis slowest.
    pub density: Vec<f64>,
    pub bandwidths: Vec<f64>,
}

impl KdeGrid {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        match self.axes.len() {
            1 => trapezoid(&self.axes[0], &self.density),
            _ => {
                let (gx, gy) = (&self.axes[0], &self.axes[1]);
                let inner: Vec<f64> =
                    self.density.chunks_exact(gy.len()).map(|row| trapezoid(gy, row)).collect();
                trapezoid(gx, &inner)
            }
        }
    }

    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head: Vec<String> = names.iter().take(self.axes.len()).cloned().collect();
        head.push("density".into());
        w.write_record(&head)?;
        match self.axes.len() {
            1 => {
                for (x, f) in self.axes[0].iter().zip(&self.density) {
                    w.write_record([x.to_string(), f.to_string()])?;
                }
            }
            _ => {
                let ny = self.axes[1].len();
                for (i, x) in self.axes[0].iter().enumerate() {
                    for (j, y) in self.axes[1].iter().enumerate() {
                        w.write_record([x.to_string(), y.to_string(), self.density[i * ny + j].to_string()])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect()
}

fn sample_sd(col: &[f64]) -> f64 {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Silverman bandwidth `sd * (4 / ((d + 2) M))^(1 / (d + 4))`.
pub fn silverman_bandwidth(sd: f64, d: usize, m: usize) -> f64 {
    let d = d as f64;
    sd * (4.0 / ((d + 2.0) * m as f64)).powf(1.0 / (d + 4.0))
}

/// Gaussian product-kernel density estimate of `M x d` samples, `d in {1, 2}`.
pub fn kde(samples: &[Vec<f64>], axes: &[AxisSpec]) -> Result<KdeGrid> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InsufficientSample { needed: 2, found: m });
    }
    let d = samples[0].len();
    if !(1..=2).contains(&d) || samples.iter().any(|s| s.len() != d) {
        return Err(Error::Shape(format!("KDE needs 1 or 2 coordinates per sample, got {d}")));
    }
    if axes.len() != d {
        return Err(Error::Shape(format!("{} grid axes for {d}-dimensional samples", axes.len())));
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|j| samples.iter().map(|s| s[j]).collect()).collect();
    let mut bandwidths = Vec::with_capacity(d);
    for (j, col) in cols.iter().enumerate() {
        let sd = sample_sd(col);
        if !(sd > 0.0) {
            return Err(Error::DegenerateBandwidth { coord: j });
        }
        bandwidths.push(silverman_bandwidth(sd, d, m));
    }
    let grid_axes: Vec<Vec<f64>> = axes
        .iter()
        .zip(&cols)
        .zip(&bandwidths)
        .map(|((spec, col), &h)| match *spec {
            AxisSpec::Fixed { lo, hi, points } => linspace(lo, hi, points),
            AxisSpec::Padded { pad, points } => {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                linspace(lo - pad * h, hi + pad * h, points)
            }
        })
        .collect();
    if grid_axes.iter().any(Vec::is_empty) {
        return Err(Error::Shape("KDE grid axis has no points".into()));
    }

    // Per-axis kernel values K((g - s) / h) / h, then products over the lattice.
    let kernel_table: Vec<Vec<f64>> = grid_axes
        .iter()
        .zip(&cols)
        .zip(&bandwidths)
        .map(|((g, col), &h)| {
            let mut t = Vec::with_capacity(g.len() * m);
            for &x in g {
                t.extend(col.iter().map(|&s| normal_pdf((x - s) / h) / h));
            }
            t
        })
        .collect();
    let density = match d {
        1 => kernel_table[0].chunks_exact(m).map(|k| k.iter().sum::<f64>() / m as f64).collect(),
        _ => {
            let mut out = Vec::with_capacity(grid_axes[0].len() * grid_axes[1].len());
            for kx in kernel_table[0].chunks_exact(m) {
                for ky in kernel_table[1].chunks_exact(m) {
                    out.push(kx.iter().zip(ky).map(|(a, b)| a * b).sum::<f64>() / m as f64);
                }
            }
            out
        }
    };
    Ok(KdeGrid { axes: grid_axes, density, bandwidths })
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `P(lo < Z < hi)` for standard normal `Z`, evaluated in the tail where it is accurate.
pub fn normal_interval_mass(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        0.5 * (libm::erfc(lo * FRAC_1_SQRT_2) - libm::erfc(hi * FRAC_1_SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-hi * FRAC_1_SQRT_2) - libm::erfc(-lo * FRAC_1_SQRT_2))
    } else {
        1.0 - 0.5 * (libm::erfc(-lo * FRAC_1_SQRT_2) + libm::erfc(hi * FRAC_1_SQRT_2))
    }
}

/// Conjugate posterior `(mean, variance)` for `N(theta, sigma2)` data under a `N(0, tau2)` prior.
pub fn gauss_location_posterior(xbar: f64, n: usize, sigma2: f64, tau2: f64) -> Result<(f64, f64)> {
    if n == 0 || !(sigma2 > 0.0) || !(tau2 > 0.0) {
        return Err(Error::Domain("need n >= 1 and positive variances".into()));
    }
    let n = n as f64;
    Ok((n * xbar / (n + sigma2 / tau2), 1.0 / (1.0 / tau2 + n / sigma2)))
}

/// Large-sample limits of ABC for the Gaussian location model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussLocationOracle {
    pub theta0: f64,
    pub sigma2: f64,
    pub tau2: f64,
    pub eps: f64,
}

impl GaussLocationOracle {
    pub fn new(theta0: f64, sigma2: f64, tau2: f64, eps: f64) -> Result<Self> {
        for (name, v) in [("sigma2", sigma2), ("tau2", tau2), ("eps", eps)] {
            if !(v > 0.0 && v.is_finite() || name == "eps" && v == f64::INFINITY) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !theta0.is_finite() {
            return Err(Error::Domain(format!("theta0 must be finite, got {theta0}")));
        }
        Ok(Self { theta0, sigma2, tau2, eps })
    }

    fn standardized_bounds(&self) -> (f64, f64) {
        let tau = self.tau2.sqrt();
        ((self.theta0 - self.eps) / tau, (self.theta0 + self.eps) / tau)
    }

    fn truncation_mass(&self) -> Result<f64> {
        let (a, b) = self.standardized_bounds();
        let z = normal_interval_mass(a, b);
        if !(z > 0.0) {
            return Err(Error::Degenerate(format!(
                "prior mass of [{}, {}] is numerically zero",
                self.theta0 - self.eps,
                self.theta0 + self.eps
            )));
        }
        Ok(z)
    }

    /// Mean and variance of the truncated-normal limit of rejection ABC.
    pub fn rejection_moments(&self) -> Result<(f64, f64)> {
        let z = self.truncation_mass()?;
        let (a, b) = self.standardized_bounds();
        let (pa, pb) = (normal_pdf(a), normal_pdf(b));
        let (apa, bpb) = (if a.is_finite() { a * pa } else { 0.0 }, if b.is_finite() { b * pb } else { 0.0 });
        let shift = (pa - pb) / z;
        let tau = self.tau2.sqrt();
        Ok((tau * shift, self.tau2 * (1.0 + (apa - bpb) / z - shift * shift)))
    }
}

/// Density of `N(0, tau2)` truncated to `[theta0 - eps, theta0 + eps]`.
pub fn limiting_pseudo_posterior_rejection(oracle: &GaussLocationOracle, grid: &[f64]) -> Result<Vec<f64>> {
    let z = oracle.truncation_mass()?;
    let tau = oracle.tau2.sqrt();
    Ok(grid
        .iter()
        .map(|&t| {
            if (t - oracle.theta0).abs() <= oracle.eps {
                normal_pdf(t / tau) / (tau * z)
            } else {
                0.0
            }
        })
        .collect())
}

/// `(theta0 / (1 + eps^2 / tau2), 1 / (1 / tau2 + 1 / eps^2))`.
pub fn limiting_pseudo_posterior_is(oracle: &GaussLocationOracle) -> (f64, f64) {
    let e2 = oracle.eps * oracle.eps;
    (oracle.theta0 / (1.0 + e2 / oracle.tau2), 1.0 / (1.0 / oracle.tau2 + 1.0 / e2))
}

/// Large-sample discrepancy between location `theta0` and `theta`, up to a constant.
pub fn limiting_discrepancy(kind: DiscrepancyKind, theta0: f64, theta: f64) -> f64 {
    match kind {
        DiscrepancyKind::EnergyV { .. } | DiscrepancyKind::KlNn => (theta0 - theta) * (theta0 - theta),
        DiscrepancyKind::MmdU { .. } | DiscrepancyKind::MmdV { .. } | DiscrepancyKind::Wasserstein { .. } => {
            (theta0 - theta).abs()
        }
    }
}

/// Closed-form curves over a list of thresholds, one CSV row per `eps`.
pub fn write_oracle_csv<W: Write>(theta0: f64, tau: f64, eps_list: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eps", "rejection_mean", "rejection_var", "is_mean", "is_var"])?;
    for &eps in eps_list {
        let o = GaussLocationOracle::new(theta0, 1.0, tau * tau, eps)?;
        let (rm, rv) = o.rejection_moments()?;
        let (im, iv) = limiting_pseudo_posterior_is(&o);
        w.write_record([eps.to_string(), rm.to_string(), rv.to_string(), im.to_string(), iv.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
