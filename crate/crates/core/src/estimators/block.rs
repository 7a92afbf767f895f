use super::{check_rho, check_truncation, BlockDiagnostic, Dataset};
use crate::error::Result;
use crate::geometry::IndexBlock;
use crate::matrix::Matrix;
use crate::privacy::{block_noise_sigma, sample_gue_block};
use crate::rng::RandomStream;

/// Output of one private block call.
#[derive(Debug, Clone)]
pub struct BlockEstimate {
    pub values: Matrix,
    pub diagnostic: BlockDiagnostic,
}

fn keep(x: &[f64], truncation: f64) -> bool {
    if truncation.is_infinite() {
        return true;
    }
    let sq: f64 = x.iter().map(|v| v * v).sum();
    sq <= truncation * x.len() as f64
}

/// Truncated block covariance `Σ̃_B` before noise, plus the number of rows
/// truncated on the `I` and `J` sides.
///
/// A row's `I` sub-vector is zeroed entirely when `‖x_I‖² > L·|I|` (same for
/// `J`); the means are taken over the truncated vectors.
pub fn truncated_block_cov(data: &Dataset, block: &IndexBlock, truncation: f64) -> Result<(Matrix, usize, usize)> {
    check_truncation(truncation)?;
    block.check_within(data.d())?;
    let ri = block.rows.range();
    let cj = block.cols.range();
    let (p, q) = (ri.len(), cj.len());
    let n = data.n();

    let mut outer = Matrix::zeros(p, q);
    let mut mu_i = vec![0.0; p];
    let mut mu_j = vec![0.0; q];
    let (mut trunc_i, mut trunc_j) = (0, 0);
    let mut acc = vec![0.0; p * q];
    for r in 0..n {
        let row = data.row(r);
        let xi = &row[ri.clone()];
        let xj = &row[cj.clone()];
        let ki = keep(xi, truncation);
        let kj = keep(xj, truncation);
        if !ki {
            trunc_i += 1;
        }
        if !kj {
            trunc_j += 1;
        }
        if ki {
            for (m, v) in mu_i.iter_mut().zip(xi) {
                *m += v;
            }
        }
        if kj {
            for (m, v) in mu_j.iter_mut().zip(xj) {
                *m += v;
            }
        }
        if ki && kj {
            for a in 0..p {
                let xa = xi[a];
                let dst = &mut acc[a * q..(a + 1) * q];
                for (d, xb) in dst.iter_mut().zip(xj) {
                    *d += xa * xb;
                }
            }
        }
    }
    let nf = n as f64;
    mu_i.iter_mut().for_each(|m| *m /= nf);
    mu_j.iter_mut().for_each(|m| *m /= nf);
    for a in 0..p {
        for b in 0..q {
            outer.set(a, b, acc[a * q + b] / nf - mu_i[a] * mu_j[b]);
        }
    }
    Ok((outer, trunc_i, trunc_j))
}

/// Private estimate of the covariance block `Σ_B`, `ρ0`-zCDP.
///
/// Adds Gaussian noise with `σ_M² = 18 L² |B| / (ρ0 n²)` to the truncated
/// block covariance; `rho0 = inf` adds nothing.
pub fn dp_cov_block(
    data: &Dataset,
    block: &IndexBlock,
    rho0: f64,
    truncation: f64,
    rng: &mut RandomStream,
) -> Result<BlockEstimate> {
    check_rho(rho0)?;
    let (mut values, truncated_rows, truncated_cols) = truncated_block_cov(data, block, truncation)?;
    let sigma = block_noise_sigma(truncation, block.size(), data.n(), rho0)?;
    if sigma > 0.0 {
        let noise = sample_gue_block(block, sigma, rng)?;
        values = values.add(&noise)?;
    }
    Ok(BlockEstimate {
        values,
        diagnostic: BlockDiagnostic {
            block: *block,
            rho: rho0,
            sigma,
            truncated_rows,
            truncated_cols,
        },
    })
}
