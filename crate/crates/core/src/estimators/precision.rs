use crate::error::{Error, Result};
use crate::matrix::{sym_eigen, SymMatrix, DEFAULT_EIGEN_TOL};

/// Precision estimate `Û diag(max(λ̂_i, 1/L2)⁻¹) Ûᵀ`.
///
/// Eigenvalues of the output lie in `(0, L2]`.
pub fn precision_estimator(sigma_hat: &SymMatrix, eigen_floor: f64) -> Result<SymMatrix> {
    if !(eigen_floor > 0.0) || !eigen_floor.is_finite() {
        return Err(Error::arg(format!("L2 must be positive and finite, got {eigen_floor}")));
    }
    let eig = sym_eigen(sigma_hat, DEFAULT_EIGEN_TOL)?;
    let floor = 1.0 / eigen_floor;
    Ok(eig.map_values(|l| 1.0 / l.max(floor)))
}
