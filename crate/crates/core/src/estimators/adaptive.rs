use serde::{Deserialize, Serialize};

use super::tridiagonal::write_upper;
use super::{
    check_rho, check_truncation, dp_cov_block, Dataset, EstimateReport, RegionDecision, DEFAULT_LEVEL_CAP,
    DEFAULT_THRESHOLD_CONST, DEFAULT_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::geometry::{hierarchical_partition, restrict_offset, GammaRegion, Region};
use crate::matrix::{frobenius_norm, operator_norm, SymMatrix, DEFAULT_NORM_TOL};
use crate::privacy::{split_budget_adaptive, PrivacyBudget};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Operator,
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub k0: usize,
    pub rho: f64,
    pub truncation: f64,
    pub threshold_const: f64,
    pub level_cap: f64,
    pub norm: NormKind,
}

impl AdaptiveConfig {
    /// Defaults for a sample of size `n` in dimension `d`: `k0 = ⌈ln n⌉`
    /// (at least 1, at most `d`), `L = 10`, `L1 = 4`, `c0 = 0.25`.
    pub fn with_defaults(n: usize, d: usize, rho: f64, norm: NormKind) -> Self {
        let k0 = ((n as f64).ln().ceil() as usize).clamp(1, d.max(1));
        Self {
            k0,
            rho,
            truncation: DEFAULT_TRUNCATION,
            threshold_const: DEFAULT_THRESHOLD_CONST,
            level_cap: DEFAULT_LEVEL_CAP,
            norm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 {
            return Err(Error::arg("k0 must be at least 1"));
        }
        check_rho(self.rho)?;
        check_truncation(self.truncation)?;
        if !(self.threshold_const > 0.0) {
            return Err(Error::arg("threshold constant L1 must be positive"));
        }
        if !(self.level_cap > 0.0 && self.level_cap <= 1.0) {
            return Err(Error::arg("level cap c0 must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// `τ_m² = L1 ((k + ln d)/n + k²(k + ln d)/(ρ_m n²) + e^{-2k})`.
pub fn adaptive_threshold_sq(threshold_const: f64, k: usize, d: usize, n: usize, rho_m: f64) -> f64 {
    let k = k as f64;
    let n = n as f64;
    let log_d = (d as f64).ln().max(0.0);
    let stat = (k + log_d) / n;
    let privacy = if rho_m.is_infinite() {
        0.0
    } else {
        k * k * (k + log_d) / (rho_m * n * n)
    };
    threshold_const * (stat + privacy + (-2.0 * k).exp())
}

/// Writes the cells of `Γ` (upper triangle, mirrored) from the block-shaped `values`.
fn write_region(out: &mut SymMatrix, gamma: &GammaRegion, values: &crate::matrix::Matrix) {
    let r0 = gamma.block.rows.start();
    let c0 = gamma.block.cols.start();
    for a in 0..values.rows() {
        for b in 0..values.cols() {
            let (i, j) = (r0 + a, c0 + b);
            if i <= j && gamma.contains(i, j) {
                out.set(i - 1, j - 1, values.get(a, b));
            }
        }
    }
}

/// Adaptive blockwise tridiagonal estimator, `ρ`-zCDP.
///
/// Estimates the level-0 tridiagonal band, then for each doubling level
/// adds the L-shaped increments whose noisy estimate clears the level
/// threshold (operator-norm rule, or the Frobenius rule
/// `‖A‖_F² > k_m τ_m²`). Regions that fail the test stay zero.
pub fn adaptive_estimator(data: &Dataset, cfg: &AdaptiveConfig, rng: &RandomStream) -> Result<EstimateReport> {
    cfg.validate()?;
    let (n, d) = (data.n(), data.d());
    let h = hierarchical_partition(d, cfg.k0, n, cfg.level_cap)?;
    let levels = h.max_level();
    let mut budget = PrivacyBudget::new(cfg.rho)?;
    let mut estimate = SymMatrix::zeros(d)?;
    let mut blocks = Vec::new();
    let mut regions = Vec::new();
    let mut call = 0u64;

    let base = h.level(0);
    let rho0 = split_budget_adaptive(cfg.rho, levels, base.num_blocks(), 0)?;
    for block in base.upper_tridiagonal_blocks() {
        budget.spend(format!("level 0 call {call}"), rho0)?;
        let est = dp_cov_block(data, &block, rho0, cfg.truncation, &mut rng.split(call))?;
        call += 1;
        write_upper(&mut estimate, &block, &est.values);
        blocks.push(est.diagnostic);
    }

    for m in 1..levels {
        let part = h.level(m);
        let km = part.block_size();
        let rho_m = split_budget_adaptive(cfg.rho, levels, part.num_blocks(), m)?;
        let tau_sq = adaptive_threshold_sq(cfg.threshold_const, km, d, n, rho_m);
        for gamma in h.gammas(m) {
            budget.spend(format!("level {m} call {call}"), rho_m)?;
            let est = dp_cov_block(data, &gamma.block, rho_m, cfg.truncation, &mut rng.split(call))?;
            call += 1;
            let a = restrict_offset(
                &est.values,
                gamma,
                gamma.block.rows.start() - 1,
                gamma.block.cols.start() - 1,
            );
            let (statistic, threshold) = match cfg.norm {
                NormKind::Operator => (operator_norm(&a, DEFAULT_NORM_TOL)?, tau_sq.sqrt()),
                NormKind::Frobenius => (frobenius_norm(&a)?.powi(2), km as f64 * tau_sq),
            };
            let kept = statistic > threshold;
            if kept {
                write_region(&mut estimate, gamma, &a);
            }
            blocks.push(est.diagnostic);
            regions.push(RegionDecision {
                level: m,
                l: gamma.l,
                statistic,
                threshold,
                kept,
            });
        }
    }

    Ok(EstimateReport {
        estimate,
        budget,
        blocks,
        regions,
        block_size: cfg.k0,
        levels,
    })
}
