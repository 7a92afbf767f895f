use serde::{Deserialize, Serialize};

use super::NormKind;
use crate::error::{Error, Result};

/// Block-size rule: the theoretical rate-optimal choice, or the tuned rule
/// used in the simulation study (privacy term scaled by 0.5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockSizeMode {
    Theory,
    Experiment,
}

/// Absorbs round-off such as `1000^(1/3) = 9.999…`.
const FLOOR_SLACK: f64 = 1e-9;

/// Chooses the tridiagonal block size `k`, clamped to `[1, d]`.
///
/// * operator, theory: `⌊min(n^{1/(2α+1)}, (ρn²/d)^{1/(2α+2)}) ∨ ln d⌋`
/// * frobenius, theory: `⌊min(n^{1/(2α+2)}, (ρn²/d)^{1/(2α+3)})⌋`
/// * experiment: as theory without the `ln d` floor and with the privacy
///   term multiplied by 0.5.
pub fn select_block_size(norm: NormKind, n: usize, d: usize, rho: f64, alpha: f64, mode: BlockSizeMode) -> Result<usize> {
    if n == 0 || d == 0 || !(rho > 0.0) || !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!(
            "block size needs positive n, d, rho, alpha (got {n}, {d}, {rho}, {alpha})"
        )));
    }
    let nf = n as f64;
    let df = d as f64;
    let (stat_exp, priv_exp) = match norm {
        NormKind::Operator => (1.0 / (2.0 * alpha + 1.0), 1.0 / (2.0 * alpha + 2.0)),
        NormKind::Frobenius => (1.0 / (2.0 * alpha + 2.0), 1.0 / (2.0 * alpha + 3.0)),
    };
    let stat = nf.powf(stat_exp);
    let privacy = if rho.is_infinite() {
        f64::INFINITY
    } else {
        (rho * nf * nf / df).powf(priv_exp)
    };
    let raw = match mode {
        BlockSizeMode::Theory => {
            let k = stat.min(privacy);
            match norm {
                NormKind::Operator => k.max(df.ln()),
                NormKind::Frobenius => k,
            }
        }
        BlockSizeMode::Experiment => stat.min(0.5 * privacy),
    };
    let k = (raw + FLOOR_SLACK).floor();
    Ok((k.max(1.0) as usize).min(d))
}
