use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::runner::{ExperimentOutput, LedgerRow, ResultRecord, SlopeRow, Snapshot, SummaryRow};
use crate::error::{Error, Result};
use crate::geometry::{Region, RegionMask};
use crate::matrix::{Matrix, SymMatrix};

pub const RESULTS_HEADER: &str =
    "experiment,estimator,n,d,rho,alpha,k_used,replicate,seed,err_op_sq,err_frob_sq_over_d,wall_ms";
pub const SUMMARY_HEADER: &str = "experiment,estimator,n,d,rho,alpha,k_used,replicates,mean_err_op_sq,se_err_op_sq,mean_err_frob_sq_over_d,se_err_frob_sq_over_d";
pub const LEDGER_HEADER: &str = "estimator,n,d,rho,alpha,k_used,replicate,calls,spent,declared";
pub const SLOPES_HEADER: &str = "estimator,alpha,points,slope_op,r2_op,slope_frob,r2_frob,rate_slope";
pub const REGIONS_HEADER: &str = "level,l,statistic,threshold,kept";

/// `inf` for `+∞`, otherwise the shortest round-trip decimal.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn fmt_alpha(a: Option<f64>) -> String {
    a.map(fmt_f64).unwrap_or_else(|| "na".to_string())
}

pub fn results_csv(records: &[ResultRecord]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment.as_str(),
            r.estimator.as_str(),
            r.n,
            r.d,
            fmt_f64(r.rho),
            fmt_alpha(r.alpha),
            r.k_used,
            r.replicate,
            r.seed,
            fmt_f64(r.err_op_sq),
            fmt_f64(r.err_frob_sq_over_d),
            fmt_f64(r.wall_ms)
        );
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment.as_str(),
            r.estimator.as_str(),
            r.n,
            r.d,
            fmt_f64(r.rho),
            fmt_alpha(r.alpha),
            r.k_used,
            r.replicates,
            fmt_f64(r.mean_err_op_sq),
            fmt_f64(r.se_err_op_sq),
            fmt_f64(r.mean_err_frob_sq_over_d),
            fmt_f64(r.se_err_frob_sq_over_d)
        );
    }
    s
}

pub fn ledger_csv(rows: &[LedgerRow]) -> String {
    let mut s = String::from(LEDGER_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.estimator.as_str(),
            r.n,
            r.d,
            fmt_f64(r.rho),
            fmt_alpha(r.alpha),
            r.k_used,
            r.replicate,
            r.calls,
            fmt_f64(r.spent),
            fmt_f64(r.rho)
        );
    }
    s
}

pub fn slopes_csv(rows: &[SlopeRow]) -> String {
    let mut s = String::from(SLOPES_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.estimator.as_str(),
            fmt_alpha(r.alpha),
            r.points,
            fmt_f64(r.slope_op),
            fmt_f64(r.r2_op),
            fmt_f64(r.slope_frob),
            fmt_f64(r.r2_frob),
            fmt_f64(r.rate_slope)
        );
    }
    s
}

/// `dim,<d>` followed by `d` rows of `d` values.
pub fn matrix_csv(m: &Matrix) -> String {
    let mut s = format!("dim,{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn mask_csv(mask: &RegionMask) -> String {
    let d = mask.dim();
    let m = Matrix::from_fn(d, d, |i, j| if mask.contains(i + 1, j + 1) { 1.0 } else { 0.0 });
    matrix_csv(&m)
}

/// Parses a matrix CSV written by [`matrix_csv`].
pub fn read_matrix_csv(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Io("empty matrix file".into()))?;
    let d: usize = head
        .strip_prefix("dim,")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Io(format!("bad matrix header {head:?}")))?;
    let mut data = Vec::with_capacity(d * d);
    for (i, line) in lines.enumerate() {
        for cell in line.split(',') {
            let v = match cell.trim() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                c => c
                    .parse::<f64>()
                    .map_err(|_| Error::Io(format!("bad value {c:?} on matrix row {}", i + 1)))?,
            };
            data.push(v);
        }
    }
    if data.len() != d * d {
        return Err(Error::Io(format!("matrix file has {} values, expected {}", data.len(), d * d)));
    }
    Matrix::from_vec(d, d, data)
}

fn regions_csv(snap: &Snapshot) -> String {
    let mut s = String::from(REGIONS_HEADER);
    s.push('\n');
    for r in &snap.regions {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.level,
            r.l,
            fmt_f64(r.statistic),
            fmt_f64(r.threshold),
            u8::from(r.kept)
        );
    }
    s
}

fn sym_csv(m: &SymMatrix) -> String {
    matrix_csv(m.as_matrix())
}

/// Renders every output file of an experiment as `(file name, contents)`.
pub fn render_outputs(out: &ExperimentOutput) -> Vec<(String, String)> {
    let mut files = vec![
        ("results.csv".to_string(), results_csv(&out.records)),
        ("summary.csv".to_string(), summary_csv(&out.summary)),
        ("ledger.csv".to_string(), ledger_csv(&out.ledger)),
    ];
    if !out.slopes.is_empty() {
        files.push(("slopes.csv".to_string(), slopes_csv(&out.slopes)));
    }
    if let Some(snap) = &out.snapshot {
        files.push(("sigma_true.csv".to_string(), sym_csv(&snap.sigma)));
        files.push(("tridiagonal.csv".to_string(), sym_csv(&snap.tridiagonal)));
        files.push(("adaptive.csv".to_string(), sym_csv(&snap.adaptive)));
        files.push(("support_tridiagonal.csv".to_string(), mask_csv(&RegionMask::support_of(snap.tridiagonal.as_matrix()))));
        files.push(("support_adaptive.csv".to_string(), mask_csv(&RegionMask::support_of(snap.adaptive.as_matrix()))));
        files.push(("adaptive_regions.csv".to_string(), regions_csv(snap)));
    }
    files
}

/// Writes all output files into `dir` (created if missing) and returns their paths.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for (name, body) in render_outputs(out) {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(1e-20), "0.00000000000000000001");
    }

    #[test]
    fn matrix_roundtrip() {
        let m = Matrix::from_rows(&[vec![1.0, -0.125], vec![1e-17, 3.3333333333333335]]);
        let s = matrix_csv(&m);
        assert!(s.starts_with("dim,2\n"));
        assert_eq!(read_matrix_csv(&s).unwrap(), m);
        assert!(read_matrix_csv("dim,2\n1,2\n3\n").is_err());
        assert!(read_matrix_csv("rows,2\n").is_err());
    }
}
