//! Private covariance and precision estimators.

mod adaptive;
mod block;
mod block_size;
mod precision;
mod tridiagonal;

pub use adaptive::{adaptive_estimator, adaptive_threshold_sq, AdaptiveConfig, NormKind};
pub use block::{dp_cov_block, truncated_block_cov, BlockEstimate};
pub use block_size::{select_block_size, BlockSizeMode};
pub use precision::precision_estimator;
pub use tridiagonal::{blockwise_tridiagonal, naive_full_estimator, TridiagonalConfig};

use crate::error::{Error, Result};
use crate::geometry::IndexBlock;
use crate::matrix::SymMatrix;
use crate::privacy::PrivacyBudget;

/// Default truncation level `L`.
pub const DEFAULT_TRUNCATION: f64 = 10.0;
/// Default threshold constant `L1` of the adaptive estimator.
pub const DEFAULT_THRESHOLD_CONST: f64 = 4.0;
/// Default level-cap constant `c0` of the adaptive estimator.
pub const DEFAULT_LEVEL_CAP: f64 = 0.25;
/// Default eigenvalue floor constant `L2` of the precision estimator.
pub const DEFAULT_EIGEN_FLOOR: f64 = 10.0;

/// `n` samples of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    rows: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, rows: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg(format!("dataset needs at least 2 samples, got {n}")));
        }
        if d == 0 {
            return Err(Error::arg("dataset dimension must be at least 1"));
        }
        if rows.len() != n * d {
            return Err(Error::arg(format!(
                "dataset buffer has {} values, expected {}",
                rows.len(),
                n * d
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("dataset contains non-finite values"));
        }
        Ok(Self { n, d, rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::arg("ragged dataset rows"));
        }
        Self::new(n, d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.rows
    }
}

/// Noise and truncation record for one block call.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagnostic {
    pub block: IndexBlock,
    pub rho: f64,
    pub sigma: f64,
    /// Rows whose `I` sub-vector was zeroed by truncation.
    pub truncated_rows: usize,
    /// Rows whose `J` sub-vector was zeroed by truncation.
    pub truncated_cols: usize,
}

/// Thresholding outcome for one L-shaped region. The region is kept iff
/// `statistic > threshold`: for the operator-norm rule `statistic = ‖A‖` and
/// `threshold = τ_m`; for the Frobenius rule `statistic = ‖A‖_F²` and
/// `threshold = k_m τ_m²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDecision {
    pub level: usize,
    pub l: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub kept: bool,
}

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate: SymMatrix,
    pub budget: PrivacyBudget,
    pub blocks: Vec<BlockDiagnostic>,
    pub regions: Vec<RegionDecision>,
    /// Block size `k` (tridiagonal) or `k0` (adaptive).
    pub block_size: usize,
    /// Number of levels `M` (1 for non-adaptive estimators).
    pub levels: usize,
}

impl EstimateReport {
    pub fn kept_regions(&self) -> usize {
        self.regions.iter().filter(|r| r.kept).count()
    }
}

fn check_truncation(l: f64) -> Result<()> {
    if !(l > 0.0) {
        return Err(Error::arg(format!("truncation level must be positive, got {l}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::arg(format!("rho must be positive (or inf), got {rho}")));
    }
    Ok(())
}
