//! Result CSV schemas.
//!
//! Run rows: `classifier_id,k,n_train,replicate,accuracy,risk,excess,bayes_risk,stderr,method`
//! with doubles at 17 significant digits. `stderr` is the standard error of
//! the excess estimate; the accuracy standard error is binomial and follows
//! from `accuracy` and the evaluation count.

use std::path::Path;

use boundary_lab_core::risk::EvalMethod;

use crate::error::{AppError, AppResult};
use crate::textio;

pub const RUNS_HEADER: &str =
    "classifier_id,k,n_train,replicate,accuracy,risk,excess,bayes_risk,stderr,method";

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub classifier_id: String,
    pub k: f64,
    pub n_train: usize,
    pub replicate: usize,
    pub accuracy: f64,
    pub risk: f64,
    pub excess: f64,
    pub bayes_risk: f64,
    pub stderr: f64,
    pub method: EvalMethod,
}

pub fn method_str(m: EvalMethod) -> &'static str {
    match m {
        EvalMethod::MonteCarlo => "mc",
        EvalMethod::Quadrature => "quadrature",
    }
}

fn parse_method(s: &str) -> Result<EvalMethod, String> {
    match s {
        "mc" => Ok(EvalMethod::MonteCarlo),
        "quadrature" => Ok(EvalMethod::Quadrature),
        other => Err(format!("unknown method {other:?}")),
    }
}

/// Sorts rows by `(k, n_train, classifier, replicate)` so output files are
/// independent of job completion order.
pub fn sort_rows(rows: &mut [RunRow]) {
    rows.sort_by(|a, b| {
        a.k.total_cmp(&b.k)
            .then(a.n_train.cmp(&b.n_train))
            .then(a.classifier_id.cmp(&b.classifier_id))
            .then(a.replicate.cmp(&b.replicate))
    });
}

pub fn write_runs(path: &Path, rows: &[RunRow]) -> AppResult<()> {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.classifier_id,
            textio::fmt_short(r.k),
            r.n_train,
            r.replicate,
            textio::fmt_f64(r.accuracy),
            textio::fmt_f64(r.risk),
            textio::fmt_f64(r.excess),
            textio::fmt_f64(r.bayes_risk),
            textio::fmt_f64(r.stderr),
            method_str(r.method),
        ));
    }
    textio::write_atomic(path, &out)
}

pub fn read_runs(path: &Path) -> AppResult<Vec<RunRow>> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RUNS_HEADER => {}
        other => {
            return Err(AppError::data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| AppError::data(format!("{} row {}: {m}", path.display(), i + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(err(format!("expected 10 fields, got {}", f.len())));
        }
        rows.push(RunRow {
            classifier_id: f[0].to_string(),
            k: textio::parse_f64(f[1]).map_err(err)?,
            n_train: f[2].parse().map_err(|e| err(format!("n_train: {e}")))?,
            replicate: f[3].parse().map_err(|e| err(format!("replicate: {e}")))?,
            accuracy: textio::parse_f64(f[4]).map_err(err)?,
            risk: textio::parse_f64(f[5]).map_err(err)?,
            excess: textio::parse_f64(f[6]).map_err(err)?,
            bayes_risk: textio::parse_f64(f[7]).map_err(err)?,
            stderr: textio::parse_f64(f[8]).map_err(err)?,
            method: parse_method(f[9]).map_err(err)?,
        });
    }
    Ok(rows)
}

/// Accuracy summary per `(k, classifier)` for the k-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AccSummaryRow {
    pub k: f64,
    pub classifier_id: String,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub replicates: usize,
}

pub const ACC_SUMMARY_HEADER: &str = "k,classifier_id,mean_accuracy,sd_accuracy,replicates";

pub fn write_acc_summary(path: &Path, rows: &[AccSummaryRow]) -> AppResult<()> {
    let mut out = String::from(ACC_SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            textio::fmt_short(r.k),
            r.classifier_id,
            textio::fmt_f64(r.mean_accuracy),
            textio::fmt_f64(r.sd_accuracy),
            r.replicates
        ));
    }
    textio::write_atomic(path, &out)
}

pub fn read_acc_summary(path: &Path) -> AppResult<Vec<AccSummaryRow>> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ACC_SUMMARY_HEADER => {}
        other => {
            return Err(AppError::data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| AppError::data(format!("{} row {}: {m}", path.display(), i + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, got {}", f.len())));
        }
        rows.push(AccSummaryRow {
            k: textio::parse_f64(f[0]).map_err(err)?,
            classifier_id: f[1].to_string(),
            mean_accuracy: textio::parse_f64(f[2]).map_err(err)?,
            sd_accuracy: textio::parse_f64(f[3]).map_err(err)?,
            replicates: f[4].parse().map_err(|e| err(format!("replicates: {e}")))?,
        });
    }
    Ok(rows)
}

/// Mean excess per `(n, classifier)` for the rate curve. `flagged` marks
/// points below the noise floor (3x the propagated standard error), which
/// are excluded from slope fits.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummaryRow {
    pub n: usize,
    pub classifier_id: String,
    pub mean_excess: f64,
    pub sd_excess: f64,
    pub se_mean: f64,
    pub replicates: usize,
    pub flagged: bool,
}

pub const RATE_SUMMARY_HEADER: &str =
    "n,classifier_id,mean_excess,sd_excess,se_mean,replicates,flagged";

pub fn write_rate_summary(path: &Path, rows: &[RateSummaryRow]) -> AppResult<()> {
    let mut out = String::from(RATE_SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.classifier_id,
            textio::fmt_f64(r.mean_excess),
            textio::fmt_f64(r.sd_excess),
            textio::fmt_f64(r.se_mean),
            r.replicates,
            u8::from(r.flagged)
        ));
    }
    textio::write_atomic(path, &out)
}

pub fn read_rate_summary(path: &Path) -> AppResult<Vec<RateSummaryRow>> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RATE_SUMMARY_HEADER => {}
        other => {
            return Err(AppError::data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| AppError::data(format!("{} row {}: {m}", path.display(), i + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", f.len())));
        }
        rows.push(RateSummaryRow {
            n: f[0].parse().map_err(|e| err(format!("n: {e}")))?,
            classifier_id: f[1].to_string(),
            mean_excess: textio::parse_f64(f[2]).map_err(err)?,
            sd_excess: textio::parse_f64(f[3]).map_err(err)?,
            se_mean: textio::parse_f64(f[4]).map_err(err)?,
            replicates: f[5].parse().map_err(|e| err(format!("replicates: {e}")))?,
            flagged: f[6] == "1",
        });
    }
    Ok(rows)
}

pub const SLOPES_HEADER: &str =
    "classifier_id,slope,intercept,residual_rms,points_used,points_excluded";

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub classifier_id: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points_used: usize,
    pub points_excluded: usize,
}

pub fn write_slopes(path: &Path, rows: &[SlopeRow]) -> AppResult<()> {
    let mut out = String::from(SLOPES_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.classifier_id,
            textio::fmt_f64(r.slope),
            textio::fmt_f64(r.intercept),
            textio::fmt_f64(r.residual_rms),
            r.points_used,
            r.points_excluded
        ));
    }
    textio::write_atomic(path, &out)
}

pub fn read_slopes(path: &Path) -> AppResult<Vec<SlopeRow>> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SLOPES_HEADER => {}
        other => {
            return Err(AppError::data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| AppError::data(format!("{} row {}: {m}", path.display(), i + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", f.len())));
        }
        rows.push(SlopeRow {
            classifier_id: f[0].to_string(),
            slope: textio::parse_f64(f[1]).map_err(err)?,
            intercept: textio::parse_f64(f[2]).map_err(err)?,
            residual_rms: textio::parse_f64(f[3]).map_err(err)?,
            points_used: f[4].parse().map_err(|e| err(format!("points_used: {e}")))?,
            points_excluded: f[5]
                .parse()
                .map_err(|e| err(format!("points_excluded: {e}")))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_round_trip_and_sort() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.csv");
        let mut rows = vec![
            RunRow {
                classifier_id: "regular".into(),
                k: 10.0,
                n_train: 1000,
                replicate: 1,
                accuracy: 0.9,
                risk: 0.1,
                excess: 0.01,
                bayes_risk: 0.09,
                stderr: 1e-4,
                method: EvalMethod::MonteCarlo,
            },
            RunRow {
                classifier_id: "localized".into(),
                k: 1.0,
                n_train: 1000,
                replicate: 0,
                accuracy: 0.7,
                risk: 0.3,
                excess: 0.02,
                bayes_risk: 0.3125,
                stderr: 2e-4,
                method: EvalMethod::MonteCarlo,
            },
        ];
        sort_rows(&mut rows);
        assert_eq!(rows[0].classifier_id, "localized");
        write_runs(&p, &rows).unwrap();
        assert_eq!(read_runs(&p).unwrap(), rows);
    }

    #[test]
    fn malformed_run_row_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.csv");
        std::fs::write(&p, format!("{RUNS_HEADER}\nbad row\n")).unwrap();
        let err = read_runs(&p).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }
}
