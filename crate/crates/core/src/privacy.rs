//! zCDP accounting and Gaussian-mechanism calibration.
//!
//! A budget of `ρ = +∞` stands for the non-private mode: every allocation is
//! infinite and every noise scale is zero.

use crate::error::{Error, Result};
use crate::geometry::IndexBlock;
use crate::matrix::Matrix;
use crate::rng::RandomStream;

/// Relative slack allowed when comparing floating-point ledger sums
/// against the declared total.
const LEDGER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub label: String,
    pub rho: f64,
}

/// Total zCDP budget and the allocations charged against it.
///
/// Allocations compose additively; a charge that would push the total past
/// the declared budget is rejected and leaves the ledger unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyBudget {
    total: f64,
    spent: f64,
    ledger: Vec<LedgerEntry>,
}

impl PrivacyBudget {
    pub fn new(total_rho: f64) -> Result<Self> {
        if !(total_rho > 0.0) {
            return Err(Error::arg(format!("total rho must be positive, got {total_rho}")));
        }
        Ok(Self {
            total: total_rho,
            spent: 0.0,
            ledger: Vec::new(),
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        self.total - self.spent
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn is_private(&self) -> bool {
        self.total.is_finite()
    }

    pub fn spend(&mut self, label: impl Into<String>, rho: f64) -> Result<()> {
        if !(rho > 0.0) {
            return Err(Error::arg(format!("allocation must be positive, got {rho}")));
        }
        if self.total.is_finite() {
            if !rho.is_finite() {
                return Err(Error::BudgetExceeded {
                    requested: rho,
                    spent: self.spent,
                    total: self.total,
                });
            }
            let next = self.spent + rho;
            if next > self.total * (1.0 + LEDGER_SLACK) {
                return Err(Error::BudgetExceeded {
                    requested: rho,
                    spent: self.spent,
                    total: self.total,
                });
            }
            self.spent = next;
        } else {
            self.spent += rho;
        }
        self.ledger.push(LedgerEntry {
            label: label.into(),
            rho,
        });
        Ok(())
    }

    /// `Σ ρ_t ≤ ρ` (with floating-point slack).
    pub fn within_budget(&self) -> bool {
        let sum: f64 = self.ledger.iter().map(|e| e.rho).sum();
        !self.total.is_finite() || sum <= self.total * (1.0 + LEDGER_SLACK)
    }
}

/// Per-entry noise description for one block call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub block: IndexBlock,
    pub symmetric: bool,
}

impl NoiseSpec {
    pub fn for_block(block: IndexBlock, truncation: f64, n: usize, rho0: f64) -> Result<Self> {
        let sigma = block_noise_sigma(truncation, block.size(), n, rho0)?;
        Ok(Self {
            sigma,
            block,
            symmetric: block.is_symmetric(),
        })
    }
}

/// `σ = sqrt(Δ² / (2ρ))`; zero when `ρ = +∞`.
pub fn gaussian_sigma(sensitivity: f64, rho: f64) -> Result<f64> {
    if !(sensitivity > 0.0) || !(rho > 0.0) {
        return Err(Error::arg(format!(
            "gaussian_sigma needs positive sensitivity and rho (got {sensitivity}, {rho})"
        )));
    }
    if rho.is_infinite() {
        if sensitivity.is_infinite() {
            return Err(Error::arg("infinite sensitivity requires finite rho"));
        }
        return Ok(0.0);
    }
    Ok((sensitivity * sensitivity / (2.0 * rho)).sqrt())
}

/// Frobenius sensitivity of the truncated block covariance: `6 L sqrt(|B|) / n`.
pub fn block_cov_sensitivity(truncation: f64, block_size: usize, n: usize) -> Result<f64> {
    if !(truncation > 0.0) || block_size == 0 || n == 0 {
        return Err(Error::arg(format!(
            "sensitivity needs L > 0, |B| >= 1, n >= 1 (got {truncation}, {block_size}, {n})"
        )));
    }
    Ok(6.0 * truncation * (block_size as f64).sqrt() / n as f64)
}

/// Per-entry noise scale of a block call, `σ_M² = 18 L² |B| / (ρ0 n²)`.
pub fn block_noise_sigma(truncation: f64, block_size: usize, n: usize, rho0: f64) -> Result<f64> {
    if rho0.is_infinite() && rho0 > 0.0 {
        if !(truncation > 0.0) || block_size == 0 || n == 0 {
            return Err(Error::arg("invalid block noise parameters"));
        }
        return Ok(0.0);
    }
    if truncation.is_infinite() {
        return Err(Error::arg("an infinite truncation level requires rho = inf"));
    }
    gaussian_sigma(block_cov_sensitivity(truncation, block_size, n)?, rho0)
}

/// Gaussian noise on a block. Blocks of the form `I × I` get a symmetric
/// matrix with i.i.d. upper triangle (diagonal included); other blocks get
/// fully i.i.d. entries.
pub fn sample_gue_block(block: &IndexBlock, sigma: f64, rng: &mut RandomStream) -> Result<Matrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("noise scale must be finite and >= 0, got {sigma}")));
    }
    let (r, c) = (block.rows.len(), block.cols.len());
    let mut out = Matrix::zeros(r, c);
    if sigma == 0.0 {
        return Ok(out);
    }
    if block.is_symmetric() {
        for i in 0..r {
            for j in i..c {
                let v = rng.normal(sigma);
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
    } else {
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, rng.normal(sigma));
            }
        }
    }
    Ok(out)
}

/// `ρ0 = ρ / (2 N_k)` for the tridiagonal estimator.
pub fn split_budget_tridiagonal(rho: f64, num_blocks: usize) -> Result<f64> {
    if !(rho > 0.0) || num_blocks == 0 {
        return Err(Error::arg(format!(
            "tridiagonal split needs rho > 0 and N_k >= 1 (got {rho}, {num_blocks})"
        )));
    }
    Ok(rho / (2.0 * num_blocks as f64))
}

/// Per-call budget of the adaptive estimator: `ρ / (2 M N_0)` at level 0 and
/// `ρ / (M N_m)` at level `m ≥ 1`. `blocks_at_level` is `N_0` or `N_m`.
pub fn split_budget_adaptive(rho: f64, max_level: usize, blocks_at_level: usize, level: usize) -> Result<f64> {
    if !(rho > 0.0) || max_level == 0 || blocks_at_level == 0 {
        return Err(Error::arg(format!(
            "adaptive split needs rho > 0, M >= 1, N >= 1 (got {rho}, {max_level}, {blocks_at_level})"
        )));
    }
    if level >= max_level {
        return Err(Error::arg(format!("level {level} out of range for M = {max_level}")));
    }
    let denom = if level == 0 {
        2.0 * (max_level * blocks_at_level) as f64
    } else {
        (max_level * blocks_at_level) as f64
    };
    Ok(rho / denom)
}

/// `ρ`-zCDP implies `(ρ + 2 sqrt(ρ ln(1/δ)), δ)`-DP.
pub fn zcdp_to_approx_dp(rho: f64, delta: f64) -> Result<f64> {
    if !(rho > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!(
            "conversion needs rho > 0 and 0 < delta < 1 (got {rho}, {delta})"
        )));
    }
    Ok(rho + 2.0 * (rho * (1.0 / delta).ln()).sqrt())
}
