use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub const DEFAULT_NORM_TOL: f64 = 1e-9;

const RESTART_SEED: u64 = 0x005E_ED0F_57A1;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius_norm(m: &Matrix) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::Numeric("frobenius norm of non-finite matrix".into()));
    }
    Ok(norm2(m.data()))
}

/// Largest singular value of `m`.
///
/// Power iteration on `mᵀm` from the all-ones vector. If the iterate is
/// annihilated (start vector in the null space) the start is redrawn once
/// from a fixed-seed Gaussian stream. Stops when the eigen-residual of `mᵀm`
/// falls below `tol` relative to the current estimate of `σ²`.
pub fn operator_norm(m: &Matrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::arg("operator_norm tolerance must be positive"));
    }
    let fro = frobenius_norm(m)?;
    if fro == 0.0 {
        return Ok(0.0);
    }
    let n = m.cols();
    let max_iter = (10 * n.max(m.rows())).max(1000);

    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut restarted = false;
    let mut sigma_sq = 0.0_f64;
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let w = m.mul_vec(&v);
        let u = m.tr_mul_vec(&w);
        let un = norm2(&u);
        if un == 0.0 {
            if restarted {
                break;
            }
            restarted = true;
            let mut rs = RandomStream::from_seed(RESTART_SEED);
            rs.fill_standard_normal(&mut v);
            let vn = norm2(&v);
            v.iter_mut().for_each(|x| *x /= vn);
            continue;
        }
        // Rayleigh quotient of mᵀm at unit v.
        let rq = w.iter().map(|x| x * x).sum::<f64>();
        sigma_sq = sigma_sq.max(rq);
        let residual = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - rq * b).powi(2))
            .sum::<f64>()
            .sqrt();
        v = u.into_iter().map(|x| x / un).collect();
        if residual <= tol * rq {
            let w = m.mul_vec(&v);
            sigma_sq = sigma_sq.max(w.iter().map(|x| x * x).sum::<f64>());
            break;
        }
    }
    Ok(sigma_sq.sqrt())
}
