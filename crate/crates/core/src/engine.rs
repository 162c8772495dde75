//! Importance-sampling ABC: the simulate-and-compare loop, weight functions,
//! threshold selection and weighted posterior estimators.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::discrepancy::{DiscrepancyKind, PreparedObserved};
use crate::error::{Error, Result};
use crate::models::{prior_sample, simulate, ModelSpec, Theta};
use crate::rand_dist::RngState;

/// How the kernel bandwidth enters the weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelParam {
    /// `exp(-d^q / eps)`.
    PlainEps,
    /// `exp(-d^2 / (2 eps^2))`; `q` is ignored.
    GaussEps,
}

/// Weight applied to a discrepancy given a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFn {
    Rejection,
    Kernel { q: f64, parameterization: KernelParam },
}

impl WeightFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightFn::Rejection => Ok(()),
            WeightFn::Kernel { q, .. } if q > 0.0 && q.is_finite() => Ok(()),
            WeightFn::Kernel { q, .. } => Err(Error::Domain(format!("kernel exponent q must be positive, got {q}"))),
        }
    }
}

/// `w(d, eps)`. Kernel forms clamp negative `d` to zero so the output stays in `(0, 1]`.
pub fn weight(f: &WeightFn, d: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    f.validate()?;
    Ok(match *f {
        WeightFn::Rejection => {
            if d < eps {
                1.0
            } else {
                0.0
            }
        }
        WeightFn::Kernel { q, parameterization } => {
            let d = d.max(0.0);
            match parameterization {
                KernelParam::PlainEps => (-d.powf(q) / eps).exp(),
                KernelParam::GaussEps => (-(d * d) / (2.0 * eps * eps)).exp(),
            }
        }
    })
}

/// One prior draw and its discrepancy to the observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub k: usize,
    pub theta: Theta,
    pub discrepancy: f64,
}

/// Output of one IS-ABC run: all `N` records plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcRun {
    pub records: Vec<Record>,
    pub model: ModelSpec,
    pub observed_hash: String,
    pub master_seed: u64,
    pub m: usize,
    pub discrepancy_kind: DiscrepancyKind,
}

/// JSON side-car describing an AbcRun CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub master_seed: u64,
    pub model: ModelSpec,
    pub discrepancy_kind: DiscrepancyKind,
    pub n_records: usize,
    pub m: usize,
    pub observed_hash: String,
}

impl AbcRun {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn discrepancies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.discrepancy).collect()
    }

    pub fn header(&self) -> RunHeader {
        RunHeader {
            master_seed: self.master_seed,
            model: self.model.clone(),
            discrepancy_kind: self.discrepancy_kind,
            n_records: self.records.len(),
            m: self.m,
            observed_hash: self.observed_hash.clone(),
        }
    }

    /// Columns `k, <parameter names>, discrepancy`, shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["k".to_string()];
        head.extend(self.model.model_id.parameter_names());
        head.push("discrepancy".into());
        w.write_record(&head)?;
        for r in &self.records {
            let mut row = vec![r.k.to_string()];
            row.extend(r.theta.iter().map(|v| v.to_string()));
            row.push(r.discrepancy.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(header: RunHeader, input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let p = header.model.param_dim();
        let cols = rd.headers()?.len();
        if cols != p + 2 {
            return Err(Error::Parse(format!("expected {} columns, got {cols}", p + 2)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
        let mut records = Vec::with_capacity(header.n_records);
        for row in rd.records() {
            let row = row?;
            let k = row[0].parse::<usize>().map_err(|e| Error::Parse(format!("'{}': {e}", &row[0])))?;
            let theta = (1..=p).map(|j| parse(&row[j])).collect::<Result<Vec<_>>>()?;
            records.push(Record { k, theta, discrepancy: parse(&row[p + 1])? });
        }
        if records.len() != header.n_records {
            return Err(Error::Parse(format!(
                "header declares {} records, file has {}",
                header.n_records,
                records.len()
            )));
        }
        Ok(Self {
            records,
            model: header.model,
            observed_hash: header.observed_hash,
            master_seed: header.master_seed,
            m: header.m,
            discrepancy_kind: header.discrepancy_kind,
        })
    }

    pub fn save(&self, csv_path: &std::path::Path, json_path: &std::path::Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(csv_path)?))?;
        std::fs::write(json_path, serde_json::to_string_pretty(&self.header())?)?;
        Ok(())
    }

    pub fn load(csv_path: &std::path::Path, json_path: &std::path::Path) -> Result<Self> {
        let header: RunHeader = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
        Self::read_csv(header, std::io::BufReader::new(std::fs::File::open(csv_path)?))
    }
}

fn check_inputs(model: &ModelSpec, observed: &DataSet, n_records: usize, m: usize) -> Result<()> {
    model.validate()?;
    if n_records == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    if observed.d() != model.obs_dim {
        return Err(Error::Shape(format!(
            "observed dimension {} does not match model dimension {}",
            observed.d(),
            model.obs_dim
        )));
    }
    Ok(())
}

fn record_error(k: usize, theta: &[f64], source: Error) -> Error {
    Error::Record { k, theta: theta.to_vec(), source: Box::new(source) }
}

/// Draws `theta_k` from the prior and `Y_k ~ simulate(theta_k, m)`, both from stream `k`.
pub fn draw_record(model: &ModelSpec, k: usize, m: usize, master_seed: u64) -> (Theta, Result<DataSet>) {
    let mut rng = RngState::new(master_seed, k as u64);
    let theta = prior_sample(model, &mut rng);
    let y = simulate(model, &theta, m, &mut rng);
    (theta, y)
}

/// Runs IS-ABC for a single discrepancy.
pub fn run_isabc(
    model: &ModelSpec,
    observed: &DataSet,
    n_records: usize,
    m: usize,
    kind: DiscrepancyKind,
    master_seed: u64,
) -> Result<AbcRun> {
    run_isabc_multi(model, observed, n_records, m, &[kind], master_seed)?
        .pop()
        .expect("one result per kind")
}

/// Runs IS-ABC for several discrepancies, sharing each record's prior draw and
/// simulated data set across them. Each kind yields the same records it would
/// get from [`run_isabc`]; a failure in one kind does not affect the others.
pub fn run_isabc_multi(
    model: &ModelSpec,
    observed: &DataSet,
    n_records: usize,
    m: usize,
    kinds: &[DiscrepancyKind],
    master_seed: u64,
) -> Result<Vec<Result<AbcRun>>> {
    check_inputs(model, observed, n_records, m)?;
    let prepared: Vec<Result<PreparedObserved>> =
        kinds.iter().map(|k| PreparedObserved::new(observed, std::slice::from_ref(k))).collect();

    let rows: Vec<(Theta, Vec<Result<f64>>)> = (0..n_records)
        .into_par_iter()
        .map(|k| {
            let (theta, y) = draw_record(model, k, m, master_seed);
            let values = match y {
                Ok(y) => prepared
                    .iter()
                    .map(|p| match p {
                        Ok(p) => p.evaluate(0, &y).and_then(|v| {
                            if v.is_finite() {
                                Ok(v)
                            } else {
                                Err(Error::Domain(format!("non-finite discrepancy {v}")))
                            }
                        }),
                        Err(_) => Err(Error::Domain("observed-side preparation failed".into())),
                    })
                    .map(|r| r.map_err(|e| record_error(k, &theta, e)))
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    kinds.iter().map(|_| Err(record_error(k, &theta, Error::Simulation(msg.clone())))).collect()
                }
            };
            (theta, values)
        })
        .collect();

    let observed_hash = observed.digest();
    let mut columns: Vec<Result<Vec<f64>>> = prepared
        .into_iter()
        .map(|p| p.map(|_| Vec::with_capacity(n_records)))
        .collect();
    let mut thetas = Vec::with_capacity(n_records);
    for (theta, values) in rows {
        for (col, v) in columns.iter_mut().zip(values) {
            if let Ok(c) = col {
                match v {
                    Ok(v) => c.push(v),
                    Err(e) => *col = Err(e),
                }
            }
        }
        thetas.push(theta);
    }
    Ok(columns
        .into_iter()
        .zip(kinds)
        .map(|(col, &kind)| {
            col.map(|ds| AbcRun {
                records: thetas
                    .iter()
                    .zip(ds)
                    .enumerate()
                    .map(|(k, (theta, discrepancy))| Record { k, theta: theta.clone(), discrepancy })
                    .collect(),
                model: model.clone(),
                observed_hash: observed_hash.clone(),
                master_seed,
                m,
                discrepancy_kind: kind,
            })
        })
        .collect())
}

/// An acceptance threshold.
///
/// When quantile-selected, `cutoff` holds the `(discrepancy, k)` of the last
/// accepted record in lexicographic order, so that ties at the threshold are
/// broken by record index and exactly `ceil(keep_fraction * N)` records pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon {
    pub value: f64,
    pub keep_fraction: f64,
    pub cutoff: Option<(f64, usize)>,
}

impl Epsilon {
    /// A fixed threshold: records pass when `d < value`.
    pub fn fixed(value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {value}")));
        }
        Ok(Self { value, keep_fraction: f64::NAN, cutoff: None })
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, keep_fraction: 1.0, cutoff: None }
    }

    pub fn accepts(&self, k: usize, d: f64) -> bool {
        match self.cutoff {
            Some((dc, kc)) => d < dc || (d == dc && k <= kc),
            None => d < self.value,
        }
    }

    /// Weight of record `(k, d)`. Rejection uses [`Epsilon::accepts`]; kernel forms use `value`.
    pub fn weight(&self, f: &WeightFn, k: usize, d: f64) -> Result<f64> {
        match f {
            WeightFn::Rejection => Ok(if self.accepts(k, d) { 1.0 } else { 0.0 }),
            _ => weight(f, d, self.value),
        }
    }
}

/// Number of records kept by a keep fraction.
pub fn kept_count(keep_fraction: f64, n_records: usize) -> usize {
    let raw = keep_fraction * n_records as f64;
    let rounded = raw.round();
    let count = if (raw - rounded).abs() <= 1e-9 * raw.max(1.0) { rounded } else { raw.ceil() };
    (count as usize).clamp(1, n_records.max(1))
}

/// The `ceil(keep_fraction * N)`-th smallest discrepancy, stepped to the next
/// representable value.
pub fn select_epsilon(run: &AbcRun, keep_fraction: f64) -> Result<Epsilon> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Domain(format!("keep_fraction must be in (0, 1], got {keep_fraction}")));
    }
    if run.records.is_empty() {
        return Err(Error::EmptySample);
    }
    let count = kept_count(keep_fraction, run.records.len());
    let mut keys: Vec<(f64, usize)> = run.records.iter().map(|r| (r.discrepancy, r.k)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let (_, &mut cutoff, _) = keys.select_nth_unstable_by(count - 1, cmp);
    let mut value = cutoff.0.next_up();
    if value <= 0.0 {
        value = f64::MIN_POSITIVE;
    }
    Ok(Epsilon { value, keep_fraction, cutoff: Some(cutoff) })
}

/// Unnormalized weights of every record, in record order.
pub fn weights(run: &AbcRun, f: &WeightFn, eps: &Epsilon) -> Result<Vec<f64>> {
    run.records.iter().map(|r| eps.weight(f, r.k, r.discrepancy)).collect()
}

/// `sum_k g(theta_k) w_k / sum_k w_k`.
pub fn posterior_estimate<G>(run: &AbcRun, f: &WeightFn, eps: &Epsilon, g: G) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut num: Vec<f64> = Vec::new();
    let mut den = 0.0;
    for r in &run.records {
        let w = eps.weight(f, r.k, r.discrepancy)?;
        if w == 0.0 {
            continue;
        }
        let gv = g(&r.theta);
        if num.is_empty() {
            num = vec![0.0; gv.len()];
        }
        for (acc, v) in num.iter_mut().zip(&gv) {
            *acc += v * w;
        }
        den += w;
    }
    if den == 0.0 {
        return Err(Error::EmptyAcceptance);
    }
    Ok(num.into_iter().map(|v| v / den).collect())
}

/// Thetas of accepted records, in record order.
pub fn accepted_sample(run: &AbcRun, eps: &Epsilon) -> Vec<Theta> {
    run.records
        .iter()
        .filter(|r| eps.accepts(r.k, r.discrepancy))
        .map(|r| r.theta.clone())
        .collect()
}
