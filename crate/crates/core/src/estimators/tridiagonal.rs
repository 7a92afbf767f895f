use super::{check_rho, check_truncation, dp_cov_block, Dataset, EstimateReport};
use crate::error::{Error, Result};
use crate::geometry::{band_partition, IndexBlock};
use crate::matrix::{Matrix, SymMatrix};
use crate::privacy::{split_budget_tridiagonal, PrivacyBudget};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagonalConfig {
    pub k: usize,
    pub rho: f64,
    pub truncation: f64,
}

impl TridiagonalConfig {
    pub fn new(k: usize, rho: f64, truncation: f64) -> Result<Self> {
        let cfg = Self { k, rho, truncation };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::arg("block size k must be at least 1"));
        }
        check_rho(self.rho)?;
        check_truncation(self.truncation)
    }
}

/// Writes an upper-triangle block estimate into `out`, mirroring to the
/// lower triangle. Cells strictly below the diagonal inside `block` are
/// ignored (they are the mirror of cells already written).
pub(crate) fn write_upper(out: &mut SymMatrix, block: &IndexBlock, values: &Matrix) {
    let r0 = block.rows.start() - 1;
    let c0 = block.cols.start() - 1;
    for a in 0..values.rows() {
        for b in 0..values.cols() {
            let (i, j) = (r0 + a, c0 + b);
            if i <= j {
                out.set(i, j, values.get(a, b));
            }
        }
    }
}

/// Blockwise tridiagonal estimator, `ρ`-zCDP.
///
/// Every diagonal block `B_{k;l}` and super-diagonal block `B_{k;l+}` is
/// estimated with `ρ0 = ρ / (2 N_k)`; sub-diagonal blocks are the transpose
/// of the super-diagonal estimates and everything else is zero.
pub fn blockwise_tridiagonal(data: &Dataset, cfg: &TridiagonalConfig, rng: &RandomStream) -> Result<EstimateReport> {
    cfg.validate()?;
    let d = data.d();
    let part = band_partition(d, cfg.k)?;
    let rho0 = split_budget_tridiagonal(cfg.rho, part.num_blocks())?;
    let mut budget = PrivacyBudget::new(cfg.rho)?;
    let mut estimate = SymMatrix::zeros(d)?;
    let mut blocks = Vec::new();

    for (idx, block) in part.upper_tridiagonal_blocks().iter().enumerate() {
        budget.spend(format!("block {idx}"), rho0)?;
        let mut stream = rng.split(idx as u64);
        let est = dp_cov_block(data, block, rho0, cfg.truncation, &mut stream)?;
        write_upper(&mut estimate, block, &est.values);
        blocks.push(est.diagnostic);
    }

    Ok(EstimateReport {
        estimate,
        budget,
        blocks,
        regions: Vec::new(),
        block_size: part.block_size(),
        levels: 1,
    })
}

/// Gaussian mechanism on the full truncated covariance (`B = [d]²`), spending
/// the whole `ρ` on one call.
pub fn naive_full_estimator(data: &Dataset, rho: f64, truncation: f64, rng: &RandomStream) -> Result<EstimateReport> {
    check_rho(rho)?;
    let d = data.d();
    let block = IndexBlock::full(d)?;
    let mut budget = PrivacyBudget::new(rho)?;
    budget.spend("full", rho)?;
    let mut stream = rng.split(0);
    let est = dp_cov_block(data, &block, rho, truncation, &mut stream)?;
    let estimate = SymMatrix::from_upper(&est.values)?;
    Ok(EstimateReport {
        estimate,
        budget,
        blocks: vec![est.diagnostic],
        regions: Vec::new(),
        block_size: d,
        levels: 1,
    })
}
