//! Browser bindings for the `dpbandcov` demo page.
//!
//! Each export is a thin wrapper over a plain function of the same name with
//! an `_impl` suffix, so the numerics can be tested natively. Matrices cross
//! the boundary as row-major `Vec<f64>` (a `Float64Array` on the JS side).

use wasm_bindgen::prelude::*;

use dpbandcov::datagen::{make_power_deterministic, sample_mvn};
use dpbandcov::estimators::{
    adaptive_estimator, blockwise_tridiagonal, naive_full_estimator, select_block_size, AdaptiveConfig, BlockSizeMode,
    NormKind, TridiagonalConfig, DEFAULT_TRUNCATION,
};
use dpbandcov::matrix::{operator_norm, SymMatrix, DEFAULT_NORM_TOL};
use dpbandcov::theory::{minimax_rate_terms, naive_rate, RateSpec};
use dpbandcov::{RandomStream, Result};

// bounds the work done per click
const MAX_DIM: usize = 128;
const MAX_N: usize = 20_000;

/// Amplitude of the demo covariance; small enough to stay well conditioned.
const AMPLITUDE: f64 = 0.3;

fn check_size(n: usize, d: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) || !(1..=MAX_DIM).contains(&d) {
        return Err(dpbandcov::Error::Argument(format!(
            "n must lie in [2, {MAX_N}] and d in [1, {MAX_DIM}] (got n = {n}, d = {d})"
        )));
    }
    Ok(())
}

fn to_js(e: dpbandcov::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn parse_norm(norm: &str) -> Result<NormKind> {
    match norm {
        "operator" => Ok(NormKind::Operator),
        "frobenius" => Ok(NormKind::Frobenius),
        other => Err(dpbandcov::Error::Argument(format!("unknown norm `{other}`"))),
    }
}

/// One sample, estimated twice: true covariance plus both private estimates.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Snapshot {
    dim: usize,
    block_size: usize,
    kept_regions: usize,
    total_regions: usize,
    sigma: Vec<f64>,
    tridiagonal: Vec<f64>,
    adaptive: Vec<f64>,
    err_tridiagonal: f64,
    err_adaptive: f64,
}

#[wasm_bindgen]
impl Snapshot {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `k` chosen for the tridiagonal estimator.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn kept_regions(&self) -> usize {
        self.kept_regions
    }

    pub fn total_regions(&self) -> usize {
        self.total_regions
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.sigma.clone()
    }

    pub fn tridiagonal(&self) -> Vec<f64> {
        self.tridiagonal.clone()
    }

    pub fn adaptive(&self) -> Vec<f64> {
        self.adaptive.clone()
    }

    /// Squared operator-norm error of the tridiagonal estimate.
    pub fn err_tridiagonal(&self) -> f64 {
        self.err_tridiagonal
    }

    pub fn err_adaptive(&self) -> f64 {
        self.err_adaptive
    }
}

fn op_err_sq(estimate: &SymMatrix, sigma: &SymMatrix) -> Result<f64> {
    let diff = estimate.sub(sigma)?;
    Ok(operator_norm(diff.as_matrix(), DEFAULT_NORM_TOL)?.powi(2))
}

pub fn snapshot_impl(n: usize, d: usize, decay: f64, rho: f64, seed: u64) -> Result<Snapshot> {
    check_size(n, d)?;
    let sigma = make_power_deterministic(d, decay, AMPLITUDE)?;
    let root = RandomStream::from_seed(seed);
    let data = sample_mvn(&sigma, n, &mut root.split(0))?;

    let k = select_block_size(NormKind::Operator, n, d, rho, decay, BlockSizeMode::Experiment)?;
    let tri = blockwise_tridiagonal(&data, &TridiagonalConfig::new(k, rho, DEFAULT_TRUNCATION)?, &root.split(1))?;
    let cfg = AdaptiveConfig::with_defaults(n, d, rho, NormKind::Operator);
    let ada = adaptive_estimator(&data, &cfg, &root.split(2))?;

    Ok(Snapshot {
        dim: d,
        block_size: k,
        kept_regions: ada.kept_regions(),
        total_regions: ada.regions.len(),
        err_tridiagonal: op_err_sq(&tri.estimate, &sigma)?,
        err_adaptive: op_err_sq(&ada.estimate, &sigma)?,
        sigma: sigma.as_matrix().data().to_vec(),
        tridiagonal: tri.estimate.as_matrix().data().to_vec(),
        adaptive: ada.estimate.as_matrix().data().to_vec(),
    })
}

/// Draws one sample, runs the tridiagonal and adaptive estimators on it and
/// returns all three matrices. `rho = Infinity` turns privacy off.
#[wasm_bindgen]
pub fn snapshot(n: usize, d: usize, decay: f64, rho: f64, seed: u64) -> std::result::Result<Snapshot, JsValue> {
    snapshot_impl(n, d, decay, rho, seed).map_err(to_js)
}

/// Mean squared operator-norm error over `replicates` samples for each budget
/// in `rhos`. Returns `[tridiagonal..., naive...]`, two runs of `rhos.len()`.
/// Each replicate reuses one sample across all budgets.
pub fn error_curve_impl(n: usize, d: usize, decay: f64, rhos: &[f64], replicates: usize, seed: u64) -> Result<Vec<f64>> {
    check_size(n, d)?;
    if replicates == 0 || rhos.is_empty() {
        return Err(dpbandcov::Error::Argument("need at least one budget and one replicate".into()));
    }
    let sigma = make_power_deterministic(d, decay, AMPLITUDE)?;
    let mut tri = vec![0.0; rhos.len()];
    let mut naive = vec![0.0; rhos.len()];
    for rep in 0..replicates {
        let stream = RandomStream::from_seed(seed).split(rep as u64);
        let data = sample_mvn(&sigma, n, &mut stream.split(0))?;
        for (i, &rho) in rhos.iter().enumerate() {
            let k = select_block_size(NormKind::Operator, n, d, rho, decay, BlockSizeMode::Experiment)?;
            let cfg = TridiagonalConfig::new(k, rho, DEFAULT_TRUNCATION)?;
            tri[i] += op_err_sq(&blockwise_tridiagonal(&data, &cfg, &stream.split(1))?.estimate, &sigma)?;
            let full = naive_full_estimator(&data, rho, DEFAULT_TRUNCATION, &stream.split(2))?;
            naive[i] += op_err_sq(&full.estimate, &sigma)?;
        }
    }
    let r = replicates as f64;
    Ok(tri.into_iter().chain(naive).map(|v| v / r).collect())
}

#[wasm_bindgen]
pub fn error_curve(
    n: usize,
    d: usize,
    decay: f64,
    rhos: Vec<f64>,
    replicates: usize,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsValue> {
    error_curve_impl(n, d, decay, &rhos, replicates, seed).map_err(to_js)
}

/// Rate terms without constants at each `n` in `ns`. Returns
/// `[statistical..., privacy..., naive...]`.
pub fn rate_curve_impl(norm: &str, ns: &[f64], d: f64, rho: f64, alpha: f64) -> Result<Vec<f64>> {
    let norm = parse_norm(norm)?;
    let mut stat = Vec::with_capacity(ns.len());
    let mut privacy = Vec::with_capacity(ns.len());
    let mut naive = Vec::with_capacity(ns.len());
    for &n in ns {
        let t = minimax_rate_terms(&RateSpec { norm, n, d, rho, alpha })?;
        stat.push(t.statistical);
        privacy.push(t.privacy);
        naive.push(naive_rate(n, d, rho)?);
    }
    Ok(stat.into_iter().chain(privacy).chain(naive).collect())
}

#[wasm_bindgen]
pub fn rate_curve(norm: &str, ns: Vec<f64>, d: f64, rho: f64, alpha: f64) -> std::result::Result<Vec<f64>, JsValue> {
    rate_curve_impl(norm, &ns, d, rho, alpha).map_err(to_js)
}
