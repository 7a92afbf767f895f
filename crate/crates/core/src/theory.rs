//! Rate formulas, the tridiagonal blocking bound, Gaussian Fisher
//! information in the covariance parameterization, and log-log fitting.
//!
//! Rates are returned without the unknown multiplicative constants; only
//! their exponents are meant to be compared against data.

use crate::error::{Error, Result};
use crate::estimators::NormKind;
use crate::matrix::{operator_norm, sym_eigen, Matrix, SymMatrix, DEFAULT_EIGEN_TOL, DEFAULT_NORM_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSpec {
    pub norm: NormKind,
    pub n: f64,
    pub d: f64,
    pub rho: f64,
    pub alpha: f64,
}

/// The two additive terms of a minimax rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub statistical: f64,
    pub privacy: f64,
}

impl RateTerms {
    pub fn total(&self) -> f64 {
        self.statistical + self.privacy
    }
}

impl RateSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.n > 0.0
            && self.d > 0.0
            && self.rho > 0.0
            && self.alpha > 0.0
            && self.n.is_finite()
            && self.d.is_finite()
            && self.alpha.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("invalid rate spec {self:?}")))
        }
    }

    /// `d / (ρ n²)`, zero when `ρ = +∞`.
    fn privacy_ratio(&self) -> f64 {
        if self.rho.is_infinite() {
            0.0
        } else {
            self.d / (self.rho * self.n * self.n)
        }
    }
}

/// Operator norm (squared error): `n^{-2α/(2α+1)} + (d/(ρn²))^{α/(α+1)}`.
/// Frobenius (per-coordinate squared error):
/// `n^{-(2α+1)/(2α+2)} + (d/(ρn²))^{(2α+1)/(2α+3)}`.
pub fn minimax_rate_terms(spec: &RateSpec) -> Result<RateTerms> {
    spec.validate()?;
    let a = spec.alpha;
    let (stat_exp, priv_exp) = match spec.norm {
        NormKind::Operator => (-2.0 * a / (2.0 * a + 1.0), a / (a + 1.0)),
        NormKind::Frobenius => (-(2.0 * a + 1.0) / (2.0 * a + 2.0), (2.0 * a + 1.0) / (2.0 * a + 3.0)),
    };
    Ok(RateTerms {
        statistical: spec.n.powf(stat_exp),
        privacy: spec.privacy_ratio().powf(priv_exp),
    })
}

pub fn minimax_rate(spec: &RateSpec) -> Result<f64> {
    minimax_rate_terms(spec).map(|t| t.total())
}

/// Unstructured comparator `d/n + d³/(ρn²)`.
pub fn naive_rate(n: f64, d: f64, rho: f64) -> Result<f64> {
    if !(n > 0.0 && d > 0.0 && rho > 0.0) {
        return Err(Error::arg("naive rate needs positive n, d, rho"));
    }
    let privacy = if rho.is_infinite() { 0.0 } else { d.powi(3) / (rho * n * n) };
    Ok(d / n + privacy)
}

/// Exponential-decay class with `k ≍ ln n ∧ ln(ρn²/d)`:
/// `ln n / n + d/(ρn²) · (ln(ρn²/d) + ln d)²`.
pub fn exponential_class_rate(n: f64, d: f64, rho: f64) -> Result<f64> {
    if !(n > 1.0 && d >= 1.0 && rho > 0.0) {
        return Err(Error::arg("exponential rate needs n > 1, d >= 1, rho > 0"));
    }
    let stat = n.ln() / n;
    if rho.is_infinite() {
        return Ok(stat);
    }
    let ratio = rho * n * n / d;
    Ok(stat + (ratio.ln() + d.ln()).powi(2) / ratio)
}

/// Schatten-`q` rate (`q ≥ 2`), normalized by `d^{-2/q}`: same terms as the
/// operator-norm rate.
pub fn schatten_rate(q: f64, n: f64, d: f64, rho: f64, alpha: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::arg("Schatten rate needs q >= 2"));
    }
    minimax_rate(&RateSpec {
        norm: NormKind::Operator,
        n,
        d,
        rho,
        alpha,
    })
}

/// A blockwise tridiagonal matrix: interval sizes of a partition of `[d]`
/// and the blocks `A_{l,l'}` for `|l - l'| ≤ 1` (0-based `l`).
#[derive(Debug, Clone)]
pub struct TridiagonalLayout {
    pub sizes: Vec<usize>,
    pub blocks: Vec<(usize, usize, Matrix)>,
}

impl TridiagonalLayout {
    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.sizes
            .iter()
            .map(|s| {
                let o = acc;
                acc += s;
                o
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn assemble(&self) -> Result<Matrix> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::Layout("interval sizes must be non-empty and positive".into()));
        }
        let offs = self.offsets();
        let d = self.dim();
        let mut out = Matrix::zeros(d, d);
        let mut seen = std::collections::HashSet::new();
        for (l, lp, m) in &self.blocks {
            if *l >= self.sizes.len() || *lp >= self.sizes.len() || l.abs_diff(*lp) > 1 {
                return Err(Error::Layout(format!("block ({l}, {lp}) is not tridiagonal")));
            }
            if m.rows() != self.sizes[*l] || m.cols() != self.sizes[*lp] {
                return Err(Error::Layout(format!("block ({l}, {lp}) has wrong shape")));
            }
            if !seen.insert((*l, *lp)) {
                return Err(Error::Layout(format!("block ({l}, {lp}) given twice")));
            }
            out.set_sub_matrix(offs[*l], offs[*lp], m);
        }
        Ok(out)
    }
}

/// `(‖A‖, 4 max_B ‖A_B‖)`; the first never exceeds the second.
pub fn tridiagonal_norm_bound_check(layout: &TridiagonalLayout) -> Result<(f64, f64)> {
    let a = layout.assemble()?;
    let lhs = operator_norm(&a, DEFAULT_NORM_TOL)?;
    let mut max_block = 0.0f64;
    for (_, _, m) in &layout.blocks {
        max_block = max_block.max(operator_norm(m, DEFAULT_NORM_TOL)?);
    }
    Ok((lhs, 4.0 * max_block))
}

fn pd_eigenvalues(sigma: &SymMatrix) -> Result<Vec<f64>> {
    let eig = sym_eigen(sigma, DEFAULT_EIGEN_TOL)?;
    if !(eig.min_value() > 0.0) {
        return Err(Error::Numeric("covariance is not positive definite".into()));
    }
    Ok(eig.values)
}

/// `Tr I(Σ) = ¼ [Tr Σ⁻² + (Tr Σ⁻¹)²]`, from the eigenvalues of `Σ`.
pub fn gaussian_fisher_trace(sigma: &SymMatrix) -> Result<f64> {
    let ev = pd_eigenvalues(sigma)?;
    let inv_sq: f64 = ev.iter().map(|l| l.powi(-2)).sum();
    let inv: f64 = ev.iter().map(|l| 1.0 / l).sum();
    Ok(0.25 * (inv_sq + inv * inv))
}

/// `‖I(Σ)‖ = ½ ‖Σ⁻¹‖² = ½ λ_min(Σ)⁻²`.
pub fn gaussian_fisher_opnorm(sigma: &SymMatrix) -> Result<f64> {
    let ev = pd_eigenvalues(sigma)?;
    let min = *ev.last().expect("non-empty");
    Ok(0.5 / (min * min))
}

/// Ordinary least squares of `ln y` on `ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("all coordinates must be positive and finite".into()));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("x values are identical".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LogLogFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(n: f64, d: f64, rho: f64, alpha: f64) -> RateSpec {
        RateSpec {
            norm: NormKind::Operator,
            n,
            d,
            rho,
            alpha,
        }
    }

    #[test]
    fn rate_examples() {
        let r = minimax_rate(&op(1000.0, 100.0, f64::INFINITY, 1.0)).unwrap();
        assert!((r - 1000f64.powf(-2.0 / 3.0)).abs() < 1e-15);
        let r = minimax_rate(&op(1e3, 1e2, 1.0, 1.0)).unwrap();
        assert!((r - 0.02).abs() < 1e-12, "{r}");
        assert!((naive_rate(100.0, 10.0, 1.0).unwrap() - (0.1 + 0.1)).abs() < 1e-15);
        assert!(minimax_rate(&op(0.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn rate_monotone_on_grid() {
        for norm in [NormKind::Operator, NormKind::Frobenius] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let at = |n: f64, d: f64, rho: f64| {
                    minimax_rate(&RateSpec { norm, n, d, rho, alpha }).unwrap()
                };
                let ns = [100.0, 1e3, 1e4];
                let ds = [10.0, 100.0, 1000.0];
                let rhos = [0.1, 1.0, 10.0, f64::INFINITY];
                for w in ns.windows(2) {
                    assert!(at(w[1], 50.0, 1.0) <= at(w[0], 50.0, 1.0));
                }
                for w in ds.windows(2) {
                    assert!(at(1e3, w[1], 1.0) >= at(1e3, w[0], 1.0));
                }
                for w in rhos.windows(2) {
                    assert!(at(1e3, 50.0, w[1]) <= at(1e3, 50.0, w[0]));
                }
            }
        }
    }

    #[test]
    fn exponential_and_schatten() {
        let e = exponential_class_rate(1000.0, 10.0, f64::INFINITY).unwrap();
        assert!((e - 1000f64.ln() / 1000.0).abs() < 1e-15);
        assert!(exponential_class_rate(1000.0, 10.0, 1.0).unwrap() > e);
        assert!(schatten_rate(1.0, 10.0, 10.0, 1.0, 1.0).is_err());
        assert_eq!(
            schatten_rate(4.0, 1e3, 1e2, 1.0, 1.0).unwrap(),
            minimax_rate(&op(1e3, 1e2, 1.0, 1.0)).unwrap()
        );
    }

    #[test]
    fn blocking_bound_identity_blocks() {
        let layout = TridiagonalLayout {
            sizes: vec![2, 3, 2],
            blocks: vec![
                (0, 0, Matrix::identity(2)),
                (1, 1, Matrix::identity(3)),
                (2, 2, Matrix::identity(2)),
            ],
        };
        let (lhs, rhs) = tridiagonal_norm_bound_check(&layout).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!((rhs - 4.0).abs() < 1e-12);
    }

    #[test]
    fn blocking_bound_single_block() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let (lhs, rhs) = tridiagonal_norm_bound_check(&TridiagonalLayout {
            sizes: vec![2],
            blocks: vec![(0, 0, m)],
        })
        .unwrap();
        assert!((rhs - 4.0 * lhs).abs() < 1e-9);
    }

    #[test]
    fn layout_errors() {
        let bad = TridiagonalLayout {
            sizes: vec![1, 1, 1],
            blocks: vec![(0, 2, Matrix::identity(1))],
        };
        assert!(matches!(tridiagonal_norm_bound_check(&bad), Err(Error::Layout(_))));
        let shape = TridiagonalLayout {
            sizes: vec![2, 1],
            blocks: vec![(0, 1, Matrix::identity(2))],
        };
        assert!(shape.assemble().is_err());
    }

    #[test]
    fn fisher_closed_forms() {
        assert!((gaussian_fisher_trace(&SymMatrix::identity(3).unwrap()).unwrap() - 3.0).abs() < 1e-12);
        assert!((gaussian_fisher_trace(&SymMatrix::diag(&[2.0, 2.0]).unwrap()).unwrap() - 0.375).abs() < 1e-12);
        assert!((gaussian_fisher_opnorm(&SymMatrix::identity(4).unwrap()).unwrap() - 0.5).abs() < 1e-12);
        assert!((gaussian_fisher_opnorm(&SymMatrix::diag(&[4.0, 1.0]).unwrap()).unwrap() - 0.5).abs() < 1e-12);
        assert!(gaussian_fisher_trace(&SymMatrix::diag(&[1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn loglog_exact() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| {
            let x = 100.0 * i as f64;
            (x, x.powf(-2.0 / 3.0))
        }).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope + 2.0 / 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = (1..=4).map(|i| (i as f64, 3.0)).collect();
        assert!(fit_loglog_slope(&flat).unwrap().slope.abs() < 1e-15);
        assert!(fit_loglog_slope(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -2.0), (3.0, 1.0)]).is_err());
    }
}
