//! Randomized properties, shared by the property tests and the acceptance suite.

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};

use esabc::data::DataSet;
use esabc::discrepancy::*;
use esabc::engine::{
    accepted_sample, kept_count, run_isabc, select_epsilon, weight, AbcRun, Epsilon, KernelParam, Record,
    WeightFn,
};
use esabc::models::{simulate, ModelId, ModelSpec};
use esabc::rand_dist::RngState;

use super::energy_ref;

type Check = std::result::Result<(), TestCaseError>;

fn dataset(n: std::ops::Range<usize>, d: usize) -> impl Strategy<Value = DataSet> {
    n.prop_flat_map(move |n| {
        prop::collection::vec(-10.0f64..10.0, n * d).prop_map(move |v| DataSet::new(v, n, d).unwrap())
    })
}

/// Two data sets with a common dimension and independent sizes.
pub fn pair() -> impl Strategy<Value = (DataSet, DataSet)> {
    (1usize..5).prop_flat_map(|d| (dataset(2..20, d), dataset(2..20, d)))
}

/// Two data sets of equal size and dimension.
pub fn equal_pair() -> impl Strategy<Value = (DataSet, DataSet)> {
    (1usize..5, 1usize..20).prop_flat_map(|(d, n)| (dataset(n..n + 1, d), dataset(n..n + 1, d)))
}

pub fn univariate_pair() -> impl Strategy<Value = (DataSet, DataSet)> {
    (dataset(1..40, 1), dataset(1..40, 1))
}

pub fn check_nonnegative((x, y): (DataSet, DataSet), beta: f64, h: f64) -> Check {
    let e = energy_vstat(&x, &y, beta).unwrap();
    prop_assert!(e >= 0.0, "energy {e}");
    let v = mmd_vstat(&x, &y, h).unwrap();
    prop_assert!(v >= 0.0, "mmd_v {v}");
    if x.n() == y.n() {
        let w = wasserstein(&x, &y, 2.0, 200).unwrap();
        prop_assert!(w >= 0.0, "wasserstein {w}");
    }
    Ok(())
}

pub fn check_symmetry((x, y): (DataSet, DataSet)) -> Check {
    let (_, scale) = energy_ref(&x, &y, 1.0);
    let tol = 1e-12 * (1.0 + scale);
    let (a, b) = (energy_vstat(&x, &y, 1.0).unwrap(), energy_vstat(&y, &x, 1.0).unwrap());
    prop_assert!((a - b).abs() <= tol, "energy {a} vs {b}");
    for h in [0.5, 1.0] {
        if x.n() >= 2 && y.n() >= 2 {
            let (a, b) = (mmd_ustat(&x, &y, h).unwrap(), mmd_ustat(&y, &x, h).unwrap());
            prop_assert!((a - b).abs() <= 1e-12, "mmd_u {a} vs {b}");
        }
        let (a, b) = (mmd_vstat(&x, &y, h).unwrap(), mmd_vstat(&y, &x, h).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "mmd_v {a} vs {b}");
    }
    if x.d() == 1 && x.n() == y.n() {
        let (a, b) = (wasserstein(&x, &y, 2.0, 200).unwrap(), wasserstein(&y, &x, 2.0, 200).unwrap());
        prop_assert_eq!(a, b);
    }
    Ok(())
}

pub fn check_self_zero(x: DataSet) -> Check {
    prop_assert_eq!(energy_vstat(&x, &x, 1.0).unwrap(), 0.0);
    prop_assert_eq!(energy_vstat(&x, &x, 0.5).unwrap(), 0.0);
    prop_assert_eq!(mmd_vstat(&x, &x, 1.0).unwrap(), 0.0);
    prop_assert_eq!(wasserstein(&x, &x, 2.0, 200).unwrap(), 0.0);
    if x.d() == 1 {
        prop_assert_eq!(energy_vstat_1d_fast(&x, &x).unwrap(), 0.0);
    }
    Ok(())
}

pub fn check_fast_path((x, y): (DataSet, DataSet)) -> Check {
    let quad = energy_vstat(&x, &y, 1.0).unwrap();
    let fast = energy_vstat_1d_fast(&x, &y).unwrap();
    let (_, scale) = energy_ref(&x, &y, 1.0);
    prop_assert!((fast - quad).abs() <= 1e-10 * (1.0 + scale), "fast {fast} vs quadratic {quad}");
    let via_dispatch = compute(DiscrepancyKind::ENERGY, &x, &y).unwrap().value;
    prop_assert_eq!(via_dispatch, fast);
    Ok(())
}

pub fn weight_fn() -> impl Strategy<Value = WeightFn> {
    prop_oneof![
        Just(WeightFn::Rejection),
        (0.1f64..4.0).prop_map(|q| WeightFn::Kernel { q, parameterization: KernelParam::PlainEps }),
        (0.1f64..4.0).prop_map(|q| WeightFn::Kernel { q, parameterization: KernelParam::GaussEps }),
    ]
}

pub fn check_weight_monotone(f: WeightFn, eps: f64, a: f64, b: f64) -> Check {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (wl, wh) = (weight(&f, lo, eps).unwrap(), weight(&f, hi, eps).unwrap());
    prop_assert!(wl >= wh, "{f:?}: w({lo}) = {wl} < w({hi}) = {wh}");
    prop_assert!((0.0..=1.0).contains(&wl) && (0.0..=1.0).contains(&wh));
    Ok(())
}

fn toy_run(ds: &[f64]) -> AbcRun {
    AbcRun {
        records: ds.iter().enumerate().map(|(k, &d)| Record { k, theta: vec![d], discrepancy: d }).collect(),
        model: ModelSpec::gauss_location(0.0, 1.0, 1.0),
        observed_hash: String::new(),
        master_seed: 0,
        m: 1,
        discrepancy_kind: DiscrepancyKind::ENERGY,
    }
}

/// Discrepancies drawn from a coarse grid half of the time, so that ties occur.
pub fn discrepancies() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1.0f64..10.0, 1..60),
        prop::collection::vec((0u8..6).prop_map(f64::from), 1..60),
    ]
}

pub fn check_acceptance_monotone(ds: Vec<f64>, e1: f64, e2: f64, k1: f64, k2: f64) -> Check {
    let run = toy_run(&ds);
    let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    let a = accepted_sample(&run, &Epsilon::fixed(lo).unwrap()).len();
    let b = accepted_sample(&run, &Epsilon::fixed(hi).unwrap()).len();
    prop_assert!(a <= b, "eps {lo} accepts {a}, eps {hi} accepts {b}");
    let (klo, khi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
    let sa = select_epsilon(&run, klo).unwrap();
    let sb = select_epsilon(&run, khi).unwrap();
    prop_assert!(sa.value <= sb.value);
    let (ca, cb) = (accepted_sample(&run, &sa).len(), accepted_sample(&run, &sb).len());
    prop_assert_eq!(ca, kept_count(klo, ds.len()));
    prop_assert_eq!(cb, kept_count(khi, ds.len()));
    prop_assert!(ca <= cb);
    Ok(())
}

fn pools() -> &'static (rayon::ThreadPool, rayon::ThreadPool) {
    static POOLS: OnceLock<(rayon::ThreadPool, rayon::ThreadPool)> = OnceLock::new();
    POOLS.get_or_init(|| {
        let build = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        (build(1), build(8))
    })
}

pub fn determinism_case() -> impl Strategy<Value = (u64, usize, usize, usize, usize)> {
    (any::<u64>(), 0usize..ModelId::ALL.len(), 0usize..4, 1usize..12, 2usize..8)
}

pub fn check_thread_determinism((seed, model, kind, n_records, m): (u64, usize, usize, usize, usize)) -> Check {
    let model = ModelSpec::default_for(ModelId::ALL[model]);
    let kind = DiscrepancyKind::benchmark_set()[kind];
    let mut rng = RngState::new(seed, u64::MAX);
    let observed = simulate(&model, &model.true_theta, m, &mut rng).unwrap();
    let (one, eight) = pools();
    let a = one.install(|| run_isabc(&model, &observed, n_records, m, kind, seed).unwrap());
    let b = eight.install(|| run_isabc(&model, &observed, n_records, m, kind, seed).unwrap());
    prop_assert_eq!(a, b);
    Ok(())
}

/// Runs `check` on `cases` inputs; the first failure is returned with its shrunk input.
pub fn run_property<S, F>(cases: u32, seed_name: &str, strategy: S, check: F) -> std::result::Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Check,
{
    let mut seed = [0u8; 32];
    for (i, b) in seed_name.bytes().enumerate() {
        seed[i % 32] ^= b;
    }
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, proptest::test_runner::TestRng::from_seed(
        proptest::test_runner::RngAlgorithm::ChaCha,
        &seed,
    ));
    runner.run(&strategy, check).map_err(|e| match e {
        TestError::Fail(why, input) => format!("{why} for input {input:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}
