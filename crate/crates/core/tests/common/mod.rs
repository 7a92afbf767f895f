#![allow(dead_code)]

use dpbandcov::estimators::Dataset;
use dpbandcov::geometry::IndexBlock;
use dpbandcov::matrix::{sym_eigen, Matrix, SymMatrix};
use dpbandcov::RandomStream;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        assert!(piv.abs() > 1e-300, "singular matrix");
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    let pivot = a[c].clone();
                    for (x, p) in a[r].iter_mut().zip(&pivot) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| a[i][n + j])
}

/// Spectral norm as the square root of the top eigenvalue of `mᵀm`.
pub fn spectral_norm_oracle(m: &Matrix) -> f64 {
    let g = m.transpose().matmul(m).unwrap();
    let g = SymMatrix::from_upper_fn(g.rows(), |i, j| g.get(i, j)).unwrap();
    sym_eigen(&g, 1e-14).unwrap().max_value().max(0.0).sqrt()
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Truncated block covariance computed directly from the definition.
pub fn truncated_cov_oracle(data: &Dataset, b: &IndexBlock, l: f64) -> Matrix {
    let (ri, cj) = (b.rows.range(), b.cols.range());
    let n = data.n() as f64;
    let clip = |x: &[f64]| -> Vec<f64> {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        if sq > l * x.len() as f64 {
            vec![0.0; x.len()]
        } else {
            x.to_vec()
        }
    };
    let xs: Vec<Vec<f64>> = (0..data.n()).map(|r| clip(&data.row(r)[ri.clone()])).collect();
    let ys: Vec<Vec<f64>> = (0..data.n()).map(|r| clip(&data.row(r)[cj.clone()])).collect();
    let mx: Vec<f64> = (0..ri.len()).map(|a| xs.iter().map(|x| x[a]).sum::<f64>() / n).collect();
    let my: Vec<f64> = (0..cj.len()).map(|a| ys.iter().map(|y| y[a]).sum::<f64>() / n).collect();
    Matrix::from_fn(ri.len(), cj.len(), |a, c| {
        xs.iter().zip(&ys).map(|(x, y)| x[a] * y[c]).sum::<f64>() / n - mx[a] * my[c]
    })
}

pub fn gaussian_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = RandomStream::from_seed(seed);
    let mut v = vec![0.0; n * d];
    rng.fill_standard_normal(&mut v);
    Dataset::new(n, d, v).unwrap()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}
