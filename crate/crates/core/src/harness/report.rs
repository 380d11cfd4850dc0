use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Method};
use crate::error::{Error, Result};

/// Order statistics of a residual list. Quartiles interpolate linearly
/// between order statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Self {
            count: v.len(),
            median: q(0.5),
            q1: q(0.25),
            q3: q(0.75),
            mean: if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 },
            min: v.first().copied().unwrap_or(f64::NAN),
            max: v.last().copied().unwrap_or(f64::NAN),
        }
    }
}

/// Residual GEDs of one method, in target order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub summary: Summary,
    pub residuals: Vec<f64>,
}

impl MethodResult {
    pub fn new(method: Method, residuals: Vec<f64>) -> Self {
        Self {
            method,
            summary: Summary::of(&residuals),
            residuals,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

const CSV_HEADER: [&str; 15] = [
    "row", "method", "target", "residual", "count", "median", "q1", "q3", "mean", "min", "max", "test_loss",
    "feature_mse", "adjacency_logloss", "adjacency_accuracy",
];

/// Write `report` to `path`.
///
/// JSON holds the full report. CSV holds one summary row per method followed
/// by one row per residual; NGAR's summary row also carries its test metrics.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?;
    let mut w = BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, report)
                .map_err(|e| Error::invalid(format!("serialising report: {e}")))?;
            w.write_all(b"\n")?;
        }
        ReportFormat::Csv => write_csv(report, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn write_csv<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    let num = |v: f64| v.to_string();
    for r in &report.results {
        let s = &r.summary;
        let mut row = vec![
            "summary".to_string(),
            r.method.to_string(),
            String::new(),
            String::new(),
            s.count.to_string(),
            num(s.median),
            num(s.q1),
            num(s.q3),
            num(s.mean),
            num(s.min),
            num(s.max),
        ];
        match (&report.ngar, r.method) {
            (Some(n), Method::Ngar) => row.extend([
                num(n.metrics.loss),
                num(n.metrics.feature_mse),
                num(n.metrics.adjacency_logloss),
                num(n.metrics.adjacency_accuracy),
            ]),
            _ => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        out.write_record(&row)?;
    }
    for r in &report.results {
        for (t, v) in report.targets.iter().zip(&r.residuals) {
            let mut row = vec!["residual".to_string(), r.method.to_string(), t.to_string(), num(*v)];
            row.extend(std::iter::repeat_n(String::new(), CSV_HEADER.len() - 4));
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Write `<stem>.json`, `<stem>.csv` and `<stem>.timings.json` into `dir`
/// (created if needed). Returns the report paths.
pub fn write_report_files(report: &ExperimentReport, dir: impl AsRef<Path>, stem: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))?;
    let mut paths = Vec::new();
    for format in [ReportFormat::Json, ReportFormat::Csv] {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        emit_report(report, format, &path)?;
        paths.push(path);
    }
    let timings = serde_json::to_string_pretty(&report.timings).expect("timings serialise");
    fs::write(dir.join(format!("{stem}.timings.json")), timings + "\n")?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_quartiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert_eq!(s.mean, 3.0);
        let s = Summary::of(&[1.0, 2.0]);
        assert_eq!((s.q1, s.median, s.q3), (1.25, 1.5, 1.75));
        assert!(Summary::of(&[]).median.is_nan());
    }
}
