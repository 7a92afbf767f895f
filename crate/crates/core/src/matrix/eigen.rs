use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;
pub const MAX_JACOBI_SWEEPS: usize = 50;

/// Eigendecomposition `m = U diag(values) Uᵀ`, values in descending order,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// `U diag(f(λ)) Uᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        SymMatrix::from_upper_fn(d, |i, j| {
            (0..d)
                .map(|k| self.vectors.get(i, k) * mapped[k] * self.vectors.get(j, k))
                .sum()
        })
        .expect("dimension checked at decomposition")
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_values(|v| v)
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }
}

fn off_diagonal_mass(a: &Matrix) -> f64 {
    let d = a.rows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a.get(i, j).powi(2);
            }
        }
    }
    s.sqrt()
}

/// Cyclic-by-row Jacobi eigensolver.
///
/// Converges when the off-diagonal Frobenius mass drops below
/// `tol · ‖m‖_F`; gives up after [`MAX_JACOBI_SWEEPS`] sweeps.
pub fn sym_eigen(m: &SymMatrix, tol: f64) -> Result<SymEigen> {
    if !(tol > 0.0) {
        return Err(Error::arg("eigen tolerance must be positive"));
    }
    let d = m.dim();
    let mut a = m.as_matrix().clone();
    if !a.is_finite() {
        return Err(Error::Numeric("eigendecomposition of non-finite matrix".into()));
    }
    let mut v = Matrix::identity(d);
    let scale = super::frobenius_norm(&a)?;
    let target = tol * scale;

    let mut converged = off_diagonal_mass(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                // A <- Jᵀ A
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        converged = off_diagonal_mass(&a) <= target;
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = Matrix::from_fn(d, d, |r, c| v.get(r, order[c]));
    Ok(SymEigen { values, vectors })
}
