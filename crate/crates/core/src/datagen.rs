//! Bandable covariance families and a seeded Gaussian sampler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::geometry::{IndexBlock, Interval};
use crate::matrix::{operator_norm, sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL, DEFAULT_NORM_TOL};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerDeterministic,
    PowerRandom,
    Exponential,
    Identity,
}

/// Declarative covariance model. `decay` is `α` for the power families and
/// `γ` for the exponential family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub family: Family,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Seed for the random multipliers of `power_random`.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_decay() -> f64 {
    1.0
}

fn default_amplitude() -> f64 {
    0.5
}

impl CovarianceModel {
    pub fn build(&self, d: usize, fallback_seed: u64) -> Result<SymMatrix> {
        match self.family {
            Family::PowerDeterministic => make_power_deterministic(d, self.decay, self.amplitude),
            Family::PowerRandom => {
                let seed = self.seed.unwrap_or(fallback_seed);
                let mut rng = RandomStream::from_seed(seed).split(d as u64);
                make_power_random(d, self.decay, self.amplitude, &mut rng)
            }
            Family::Exponential => make_exponential(d, self.decay, self.amplitude),
            Family::Identity => SymMatrix::identity(d),
        }
    }
}

fn require_pd(sigma: SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(&sigma, DEFAULT_EIGEN_TOL).map_err(|e| Error::Model(e.to_string()))?;
    let min = eig.min_value();
    if !(min > 0.0) {
        return Err(Error::Model(format!(
            "covariance is not positive definite (smallest eigenvalue {min:.3e})"
        )));
    }
    Ok(sigma)
}

fn check_params(d: usize, decay: f64, amplitude: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::Model("dimension must be at least 1".into()));
    }
    if !(decay > 0.0) {
        return Err(Error::Model(format!("decay parameter must be positive, got {decay}")));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::Model(format!("amplitude must be finite and >= 0, got {amplitude}")));
    }
    Ok(())
}

/// `Σ_ii = 1`, `Σ_ij = c |i-j|^{-(α+1)}`.
pub fn make_power_deterministic(d: usize, alpha: f64, c: f64) -> Result<SymMatrix> {
    check_params(d, alpha, c)?;
    let sigma = SymMatrix::from_upper_fn(d, |i, j| {
        if i == j {
            1.0
        } else {
            c * ((j - i) as f64).powf(-(alpha + 1.0))
        }
    })?;
    require_pd(sigma)
}

/// `Σ_ij = c |i-j|^{-(α+1)} u_ij` with `u_ij ~ U[0, 1]` drawn on the upper
/// triangle and mirrored.
pub fn make_power_random(d: usize, alpha: f64, c: f64, rng: &mut RandomStream) -> Result<SymMatrix> {
    make_power_with_multipliers(d, alpha, c, || rng.uniform())
}

/// Power-decay matrix with caller-supplied multipliers, drawn row by row
/// over the strict upper triangle.
pub fn make_power_with_multipliers(d: usize, alpha: f64, c: f64, mut u: impl FnMut() -> f64) -> Result<SymMatrix> {
    check_params(d, alpha, c)?;
    let sigma = SymMatrix::from_upper_fn(d, |i, j| {
        if i == j {
            1.0
        } else {
            c * ((j - i) as f64).powf(-(alpha + 1.0)) * u()
        }
    })?;
    require_pd(sigma)
}

/// `Σ_ii = 1`, `Σ_ij = c e^{-γ|i-j|}`.
pub fn make_exponential(d: usize, gamma: f64, c: f64) -> Result<SymMatrix> {
    check_params(d, gamma, c)?;
    let sigma = SymMatrix::from_upper_fn(d, |i, j| {
        if i == j {
            1.0
        } else {
            c * (-gamma * (j - i) as f64).exp()
        }
    })?;
    require_pd(sigma)
}

/// Lower-triangular Cholesky factor; fails on a non-positive pivot.
pub fn cholesky(sigma: &SymMatrix) -> Result<Matrix> {
    let d = sigma.dim();
    let mut l = Matrix::zeros(d, d);
    for j in 0..d {
        let mut diag = sigma.get(j, j);
        for k in 0..j {
            diag -= l.get(j, k).powi(2);
        }
        if !(diag > 0.0) {
            return Err(Error::Model(format!(
                "Cholesky failed at pivot {j}: matrix is not positive definite"
            )));
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..d {
            let mut s = sigma.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

/// `n` i.i.d. draws from `N(0, Σ)` as `x = L z`. Returns the raw row-major
/// buffer so `n = 1` is allowed; wrap with [`Dataset::new`] for estimation.
pub fn sample_mvn_rows(sigma: &SymMatrix, n: usize, rng: &mut RandomStream) -> Result<Vec<f64>> {
    let l = cholesky(sigma)?;
    let d = sigma.dim();
    let mut out = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for r in 0..n {
        rng.fill_standard_normal(&mut z);
        let row = &mut out[r * d..(r + 1) * d];
        for i in 0..d {
            let li = l.row(i);
            row[i] = li[..=i].iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

pub fn sample_mvn(sigma: &SymMatrix, n: usize, rng: &mut RandomStream) -> Result<Dataset> {
    let rows = sample_mvn_rows(sigma, n, rng)?;
    Dataset::new(n, sigma.dim(), rows)
}

/// Realized decay constants of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    /// For `k = 1..d-1`: `k^α · max_{i0} ‖Σ[[1,i0] × [i0+k, d]]‖`.
    pub block_norm_scaled: Vec<f64>,
    /// `max_k block_norm_scaled[k]`: implied `C_1` of the block-norm class.
    pub block_constant: f64,
    /// `max_{i≠j} |Σ_ij| |i-j|^{α+1}`: implied `C_1` of the entrywise class.
    pub entry_constant: f64,
}

/// Scans every maximal `k`-off-diagonal block `[1, i0] × [i0 + k, d]` and
/// every entry to report the constants for which `Σ` meets the two decay
/// conditions.
pub fn class_membership_diagnostics(sigma: &SymMatrix, alpha: f64) -> Result<MembershipReport> {
    let d = sigma.dim();
    let m = sigma.as_matrix();
    let mut block_norm_scaled = Vec::with_capacity(d.saturating_sub(1));
    for k in 1..d {
        let mut best = 0.0f64;
        for i0 in 1..=(d - k) {
            let b = IndexBlock::new(Interval::new(1, i0)?, Interval::new(i0 + k, d)?);
            let sub = m.sub_matrix(b.rows.range(), b.cols.range());
            best = best.max(operator_norm(&sub, DEFAULT_NORM_TOL)?);
        }
        block_norm_scaled.push(best * (k as f64).powf(alpha));
    }
    let block_constant = block_norm_scaled.iter().copied().fold(0.0, f64::max);
    let mut entry_constant = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            let gap = (j - i) as f64;
            entry_constant = entry_constant.max(m.get(i, j).abs() * gap.powf(alpha + 1.0));
        }
    }
    Ok(MembershipReport {
        block_norm_scaled,
        block_constant,
        entry_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_deterministic_d3() {
        let s = make_power_deterministic(3, 1.0, 0.5).unwrap();
        assert_eq!(s.get(0, 1), 0.5);
        assert_eq!(s.get(1, 2), 0.5);
        assert_eq!(s.get(0, 2), 0.125);
        assert_eq!(s.diagonal(), vec![1.0; 3]);
    }

    #[test]
    fn zero_amplitude_is_identity() {
        assert_eq!(make_power_deterministic(4, 1.0, 0.0).unwrap(), SymMatrix::identity(4).unwrap());
        let forced = make_power_with_multipliers(4, 1.0, 0.5, || 0.0).unwrap();
        assert_eq!(forced, SymMatrix::identity(4).unwrap());
    }

    #[test]
    fn power_deterministic_d50_pd() {
        let s = make_power_deterministic(50, 1.0, 0.5).unwrap();
        let e = sym_eigen(&s, 1e-12).unwrap();
        assert!(e.min_value() > 0.0);
    }

    #[test]
    fn non_pd_rejected() {
        let err = make_power_deterministic(20, 1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
        assert!(make_exponential(10, 0.1, 5.0).is_err());
        assert!(make_power_deterministic(5, 0.0, 0.5).is_err());
    }

    #[test]
    fn power_random_bounded_and_reproducible() {
        let a = make_power_random(30, 1.0, 0.5, &mut RandomStream::from_seed(4)).unwrap();
        let b = make_power_random(30, 1.0, 0.5, &mut RandomStream::from_seed(4)).unwrap();
        assert_eq!(a, b);
        for i in 0..30 {
            for j in (i + 1)..30 {
                let bound = 0.5 * ((j - i) as f64).powf(-2.0);
                assert!(a.get(i, j).abs() <= bound);
            }
        }
        assert!(a.is_exactly_symmetric());
    }

    #[test]
    fn exponential_examples() {
        let s = make_exponential(4, 2f64.ln(), 0.5).unwrap();
        assert!((s.get(0, 1) - 0.25).abs() < 1e-15);
        assert!((s.get(0, 2) - 0.125).abs() < 1e-15);
        let near_id = make_exponential(5, 800.0, 0.5).unwrap();
        assert_eq!(near_id, SymMatrix::identity(5).unwrap());
    }

    #[test]
    fn exponential_off_band_decay() {
        let (d, gamma, c) = (30, 0.7, 0.5);
        let s = make_exponential(d, gamma, c).unwrap();
        let rep = class_membership_diagnostics(&s, 1.0).unwrap();
        // ‖Σ_{R_k}‖ ≤ ‖Σ_{R_k}‖_{ℓ1} ≤ c e^{-γk} / (1 - e^{-γ})
        let cst = c / (1.0 - (-gamma).exp());
        for (idx, scaled) in rep.block_norm_scaled.iter().enumerate() {
            let k = (idx + 1) as f64;
            assert!(scaled / k <= cst * (-gamma * k).exp() + 1e-12);
        }
    }

    #[test]
    fn cholesky_reconstructs_and_rejects() {
        let s = make_power_deterministic(6, 1.0, 0.5).unwrap();
        let l = cholesky(&s).unwrap();
        let llt = l.matmul(&l.transpose()).unwrap();
        assert!(llt.max_abs_diff(s.as_matrix()) < 1e-14);
        let bad = SymMatrix::diag(&[1.0, -1.0]).unwrap();
        assert!(matches!(cholesky(&bad), Err(Error::Model(_))));
    }

    #[test]
    fn sampler_n1_allowed_dataset_rejects() {
        let s = SymMatrix::identity(3).unwrap();
        let rows = sample_mvn_rows(&s, 1, &mut RandomStream::from_seed(1)).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(sample_mvn(&s, 1, &mut RandomStream::from_seed(1)).is_err());
    }

    #[test]
    fn sampler_reproducible() {
        let s = make_power_deterministic(4, 1.0, 0.5).unwrap();
        let a = sample_mvn(&s, 20, &mut RandomStream::from_seed(8)).unwrap();
        let b = sample_mvn(&s, 20, &mut RandomStream::from_seed(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diagnostics_identity_and_power() {
        let rep = class_membership_diagnostics(&SymMatrix::identity(6).unwrap(), 1.0).unwrap();
        assert_eq!(rep.block_constant, 0.0);
        assert_eq!(rep.entry_constant, 0.0);
        let s = make_power_deterministic(12, 1.0, 0.5).unwrap();
        let rep = class_membership_diagnostics(&s, 1.0).unwrap();
        assert!((rep.entry_constant - 0.5).abs() < 1e-15);
        assert!(rep.block_constant.is_finite() && rep.block_constant > 0.0);
    }
}
