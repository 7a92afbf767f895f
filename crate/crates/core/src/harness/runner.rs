use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{EstimatorKind, ExperimentConfig, ExperimentKind};
use crate::datagen::sample_mvn;
use crate::error::{Error, Result};
use crate::estimators::{
    adaptive_estimator, blockwise_tridiagonal, naive_full_estimator, select_block_size, AdaptiveConfig, EstimateReport,
    RegionDecision, TridiagonalConfig,
};
use crate::geometry::{band_partition, hierarchical_partition, tridiagonal_mask, RegionMask};
use crate::matrix::{frobenius_norm, operator_norm, SymMatrix, DEFAULT_NORM_TOL};
use crate::rng::RandomStream;
use crate::theory::{fit_loglog_slope, minimax_rate, RateSpec};

/// One estimator run on one replicate dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    /// Decay assumed for block-size selection; `None` when the estimator
    /// does not use it (adaptive, naive, fixed `k`).
    pub alpha: Option<f64>,
    pub k_used: usize,
    pub replicate: usize,
    pub seed: u64,
    pub err_op_sq: f64,
    pub err_frob_sq_over_d: f64,
    pub wall_ms: f64,
}

/// Mean and standard error over replicates at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: ExperimentKind,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub alpha: Option<f64>,
    pub k_used: usize,
    pub replicates: usize,
    pub mean_err_op_sq: f64,
    pub se_err_op_sq: f64,
    pub mean_err_frob_sq_over_d: f64,
    pub se_err_frob_sq_over_d: f64,
}

/// Privacy spend of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub alpha: Option<f64>,
    pub k_used: usize,
    pub replicate: usize,
    pub calls: usize,
    pub spent: f64,
}

/// Log-log slope of mean error against `n` for one estimator setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub estimator: EstimatorKind,
    pub alpha: Option<f64>,
    pub points: usize,
    pub slope_op: f64,
    pub r2_op: f64,
    pub slope_frob: f64,
    pub r2_frob: f64,
    /// Slope of the operator-norm minimax rate over the same `(n, d, ρ)` points.
    pub rate_slope: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub sigma: SymMatrix,
    pub tridiagonal: SymMatrix,
    pub adaptive: SymMatrix,
    pub tridiagonal_mask: RegionMask,
    pub adaptive_band_mask: RegionMask,
    pub regions: Vec<RegionDecision>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: ExperimentKind,
    pub records: Vec<ResultRecord>,
    pub summary: Vec<SummaryRow>,
    pub ledger: Vec<LedgerRow>,
    pub slopes: Vec<SlopeRow>,
    pub snapshot: Option<Snapshot>,
}

/// A dataset to generate: `(n, d, ρ-list)` plus its position in the grid.
#[derive(Debug, Clone)]
struct Unit {
    n_idx: usize,
    d_idx: usize,
    n: usize,
    d: usize,
    rhos: Vec<f64>,
    replicate: usize,
}

#[derive(Debug, Clone, Copy)]
struct Variant {
    estimator: EstimatorKind,
    est_idx: usize,
    alpha: Option<f64>,
    fixed_k: Option<usize>,
}

struct RunOutcome {
    key: (usize, usize, usize, usize, usize),
    record: ResultRecord,
    ledger: LedgerRow,
    report: EstimateReport,
}

fn variants(cfg: &ExperimentConfig) -> Vec<Variant> {
    let mut out = Vec::new();
    for (est_idx, &estimator) in cfg.estimators.iter().enumerate() {
        match estimator {
            EstimatorKind::Tridiagonal => match &cfg.grid.k {
                Some(ks) => out.extend(ks.iter().map(|&k| Variant {
                    estimator,
                    est_idx,
                    alpha: None,
                    fixed_k: Some(k),
                })),
                None => out.extend(cfg.grid.alpha.iter().map(|&a| Variant {
                    estimator,
                    est_idx,
                    alpha: Some(a),
                    fixed_k: None,
                })),
            },
            EstimatorKind::Adaptive | EstimatorKind::Naive => out.push(Variant {
                estimator,
                est_idx,
                alpha: None,
                fixed_k: None,
            }),
        }
    }
    out
}

fn units(cfg: &ExperimentConfig) -> Vec<Unit> {
    let mut out = Vec::new();
    let reps = match cfg.experiment {
        ExperimentKind::EstimatorSnapshot => 1,
        _ => cfg.replicates,
    };
    for (n_idx, &n) in cfg.grid.n.iter().enumerate() {
        let dims: Vec<(usize, Vec<f64>)> = match (cfg.experiment, cfg.regime) {
            (ExperimentKind::Convergence, Some(r)) => vec![(r.dim(n), vec![r.rho(n)])],
            _ => cfg.grid.d.iter().map(|&d| (d, cfg.grid.rho.clone())).collect(),
        };
        for (d_idx, (d, rhos)) in dims.into_iter().enumerate() {
            for replicate in 0..reps {
                out.push(Unit {
                    n_idx,
                    d_idx,
                    n,
                    d,
                    rhos: rhos.clone(),
                    replicate,
                });
            }
        }
    }
    out
}

/// Dataset stream for one replicate: `root / n index / d index / replicate`.
/// Shared by every `ρ`, `α` and estimator at that point.
pub fn data_stream(seed: u64, n_idx: usize, d_idx: usize, replicate: usize) -> RandomStream {
    RandomStream::from_seed(seed)
        .split(n_idx as u64)
        .split(d_idx as u64)
        .split(replicate as u64)
}

fn run_variant(
    cfg: &ExperimentConfig,
    v: &Variant,
    data: &crate::estimators::Dataset,
    rho: f64,
    rng: &RandomStream,
) -> Result<EstimateReport> {
    let (n, d) = (data.n(), data.d());
    let p = &cfg.params;
    match v.estimator {
        EstimatorKind::Tridiagonal => {
            let k = match (v.fixed_k, v.alpha) {
                (Some(k), _) => k,
                (None, Some(a)) => select_block_size(p.norm, n, d, rho, a, p.block_size_mode)?,
                (None, None) => unreachable!("tridiagonal variant without k or alpha"),
            };
            blockwise_tridiagonal(data, &TridiagonalConfig::new(k, rho, p.truncation)?, rng)
        }
        EstimatorKind::Adaptive => {
            let mut ac = AdaptiveConfig::with_defaults(n, d, rho, p.norm);
            if let Some(k0) = p.k0 {
                ac.k0 = k0;
            }
            ac.truncation = p.truncation;
            ac.threshold_const = p.threshold_const;
            ac.level_cap = p.level_cap;
            adaptive_estimator(data, &ac, rng)
        }
        EstimatorKind::Naive => naive_full_estimator(data, rho, p.truncation, rng),
    }
}

fn run_unit(cfg: &ExperimentConfig, sigmas: &BTreeMap<usize, SymMatrix>, vars: &[Variant], u: &Unit) -> Result<Vec<RunOutcome>> {
    let sigma = &sigmas[&u.d];
    let stream = data_stream(cfg.seed, u.n_idx, u.d_idx, u.replicate);
    let data = sample_mvn(sigma, u.n, &mut stream.split(0))?;
    let mut out = Vec::with_capacity(u.rhos.len() * vars.len());
    for (rho_idx, &rho) in u.rhos.iter().enumerate() {
        for (var_idx, v) in vars.iter().enumerate() {
            let est_stream = stream.split(1 + v.est_idx as u64);
            let t0 = cfg.record_timing.then(Instant::now);
            let report = run_variant(cfg, v, &data, rho, &est_stream)?;
            let wall_ms = t0.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3);
            if !report.budget.within_budget() {
                return Err(Error::Numeric(format!(
                    "{} spent {} of a declared budget {}",
                    v.estimator.as_str(),
                    report.budget.spent(),
                    report.budget.total()
                )));
            }
            let diff = report.estimate.sub(sigma)?;
            let op = operator_norm(diff.as_matrix(), DEFAULT_NORM_TOL)?;
            let fro = frobenius_norm(diff.as_matrix())?;
            let k_used = match v.estimator {
                EstimatorKind::Naive => u.d,
                _ => report.block_size,
            };
            let record = ResultRecord {
                experiment: cfg.experiment,
                estimator: v.estimator,
                n: u.n,
                d: u.d,
                rho,
                alpha: v.alpha,
                k_used,
                replicate: u.replicate,
                seed: cfg.seed,
                err_op_sq: op * op,
                err_frob_sq_over_d: fro * fro / u.d as f64,
                wall_ms,
            };
            let ledger = LedgerRow {
                estimator: v.estimator,
                n: u.n,
                d: u.d,
                rho,
                alpha: v.alpha,
                k_used,
                replicate: u.replicate,
                calls: report.budget.entries().len(),
                spent: report.budget.spent(),
            };
            out.push(RunOutcome {
                key: (u.n_idx, u.d_idx, rho_idx, var_idx, u.replicate),
                record,
                ledger,
                report,
            });
        }
    }
    Ok(out)
}

/// Runs an experiment in memory. With `threads = Some(1)` everything runs on
/// the calling thread; otherwise replicates are spread over a rayon pool
/// (`None` uses the global pool). The output does not depend on the thread
/// count.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let vars = variants(cfg);
    let units = units(cfg);

    let mut sigmas = BTreeMap::new();
    for u in &units {
        if let std::collections::btree_map::Entry::Vacant(e) = sigmas.entry(u.d) {
            e.insert(cfg.model.build(u.d, cfg.seed)?);
        }
    }

    let results: Vec<Result<Vec<RunOutcome>>> = match threads {
        Some(1) => units.iter().map(|u| run_unit(cfg, &sigmas, &vars, u)).collect(),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))?;
            pool.install(|| units.par_iter().map(|u| run_unit(cfg, &sigmas, &vars, u)).collect())
        }
        None => units.par_iter().map(|u| run_unit(cfg, &sigmas, &vars, u)).collect(),
    };
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.extend(r?);
    }
    outcomes.sort_by_key(|o| o.key);

    let snapshot = if cfg.experiment == ExperimentKind::EstimatorSnapshot {
        Some(build_snapshot(cfg, &sigmas, &outcomes)?)
    } else {
        None
    };

    let records: Vec<ResultRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let ledger: Vec<LedgerRow> = outcomes.iter().map(|o| o.ledger.clone()).collect();
    let summary = summarize(&records);
    let slopes = if cfg.experiment == ExperimentKind::Convergence {
        fit_slopes(&summary)?
    } else {
        Vec::new()
    };
    Ok(ExperimentOutput {
        experiment: cfg.experiment,
        records,
        summary,
        ledger,
        slopes,
        snapshot,
    })
}

fn build_snapshot(cfg: &ExperimentConfig, sigmas: &BTreeMap<usize, SymMatrix>, outcomes: &[RunOutcome]) -> Result<Snapshot> {
    let pick = |kind: EstimatorKind| {
        outcomes
            .iter()
            .find(|o| o.record.estimator == kind)
            .ok_or_else(|| Error::config("estimators", format!("snapshot needs {}", kind.as_str())))
    };
    let tri = pick(EstimatorKind::Tridiagonal)?;
    let ada = pick(EstimatorKind::Adaptive)?;
    let d = tri.record.d;
    let n = tri.record.n;
    let tri_mask = tridiagonal_mask(&band_partition(d, tri.report.block_size)?);
    let h = hierarchical_partition(d, ada.report.block_size, n, cfg.params.level_cap)?;
    let band = h.union_mask_up_to(h.max_level() - 1);
    Ok(Snapshot {
        sigma: sigmas[&d].clone(),
        tridiagonal: tri.report.estimate.clone(),
        adaptive: ada.report.estimate.clone(),
        tridiagonal_mask: tri_mask,
        adaptive_band_mask: band,
        regions: ada.report.regions.clone(),
    })
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups records by everything except the replicate, keeping first-seen order.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    // (estimator, n, d, rho bits, alpha bits, k_used)
    type Key = (EstimatorKind, usize, usize, u64, Option<u64>, usize);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.estimator, r.n, r.d, r.rho.to_bits(), r.alpha.map(f64::to_bits), r.k_used);
        let g = groups.entry(key).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let first = g[0];
            let op: Vec<f64> = g.iter().map(|r| r.err_op_sq).collect();
            let fr: Vec<f64> = g.iter().map(|r| r.err_frob_sq_over_d).collect();
            let (mo, so) = mean_se(&op);
            let (mf, sf) = mean_se(&fr);
            SummaryRow {
                experiment: first.experiment,
                estimator: first.estimator,
                n: first.n,
                d: first.d,
                rho: first.rho,
                alpha: first.alpha,
                k_used: first.k_used,
                replicates: g.len(),
                mean_err_op_sq: mo,
                se_err_op_sq: so,
                mean_err_frob_sq_over_d: mf,
                se_err_frob_sq_over_d: sf,
            }
        })
        .collect()
}

/// One slope per `(estimator, α)` across the `n` grid. The block size may
/// change with `n`, so rows are grouped without `k_used`.
pub fn fit_slopes(summary: &[SummaryRow]) -> Result<Vec<SlopeRow>> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(EstimatorKind, Option<u64>), Vec<&SummaryRow>> = BTreeMap::new();
    for s in summary {
        let key = (s.estimator, s.alpha.map(f64::to_bits));
        let g = groups.entry(key).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(s);
    }
    let mut out = Vec::new();
    for key in order {
        let g = &groups[&key];
        let op: Vec<(f64, f64)> = g.iter().map(|s| (s.n as f64, s.mean_err_op_sq)).collect();
        let fr: Vec<(f64, f64)> = g.iter().map(|s| (s.n as f64, s.mean_err_frob_sq_over_d)).collect();
        let alpha_rate = g[0].alpha.unwrap_or(1.0);
        let rate = g
            .iter()
            .map(|s| {
                minimax_rate(&RateSpec {
                    norm: crate::estimators::NormKind::Operator,
                    n: s.n as f64,
                    d: s.d as f64,
                    rho: s.rho,
                    alpha: alpha_rate,
                })
                .map(|r| (s.n as f64, r))
            })
            .collect::<Result<Vec<_>>>()?;
        let fo = fit_loglog_slope(&op)?;
        let ff = fit_loglog_slope(&fr)?;
        let fr_rate = fit_loglog_slope(&rate)?;
        out.push(SlopeRow {
            estimator: key.0,
            alpha: g[0].alpha,
            points: g.len(),
            slope_op: fo.slope,
            r2_op: fo.r2,
            slope_frob: ff.slope,
            r2_frob: ff.r2,
            rate_slope: fr_rate.slope,
        });
    }
    Ok(out)
}
