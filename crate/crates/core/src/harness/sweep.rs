use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_experiment, write_report_files, ExperimentConfig, ExperimentReport, Method};
use crate::error::{Error, Result};

/// Outcome of one sweep configuration.
#[derive(Debug)]
pub struct SweepEntry {
    pub config: ExperimentConfig,
    pub outcome: Result<ExperimentReport>,
}

/// One line of the combined summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub generator: String,
    /// `p` or `c`.
    pub key: String,
    pub value: usize,
    pub method: String,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub mean: Option<f64>,
    pub test_loss: Option<f64>,
    pub adjacency_accuracy: Option<f64>,
    /// `ok`, or the error that stopped this configuration.
    pub status: String,
}

/// Run each configuration independently (in parallel when the rayon pool
/// has more than one thread). A failing configuration does not stop the others.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<Vec<SweepEntry>> {
    if configs.is_empty() {
        return Err(Error::invalid("sweep needs at least one configuration"));
    }
    Ok(configs
        .par_iter()
        .map(|config| SweepEntry {
            config: config.clone(),
            outcome: run_experiment(config),
        })
        .collect())
}

fn rows(entries: &[SweepEntry]) -> Vec<SweepRow> {
    let mut out = Vec::new();
    for (index, e) in entries.iter().enumerate() {
        let (key, value) = e.config.generator.complexity();
        let base = |method: String, status: String| SweepRow {
            index,
            generator: e.config.generator.label(),
            key: key.to_string(),
            value,
            method,
            median: None,
            q1: None,
            q3: None,
            mean: None,
            test_loss: None,
            adjacency_accuracy: None,
            status,
        };
        match &e.outcome {
            Ok(report) => {
                for r in &report.results {
                    let mut row = base(r.method.to_string(), "ok".into());
                    row.median = Some(r.summary.median);
                    row.q1 = Some(r.summary.q1);
                    row.q3 = Some(r.summary.q3);
                    row.mean = Some(r.summary.mean);
                    if let (Method::Ngar, Some(n)) = (r.method, &report.ngar) {
                        row.test_loss = Some(n.metrics.loss);
                        row.adjacency_accuracy = Some(n.metrics.adjacency_accuracy);
                    }
                    out.push(row);
                }
            }
            Err(err) => out.push(base(String::new(), format!("error: {err}"))),
        }
    }
    out
}

/// Write every successful report as `run-<i>.*` plus `summary.csv` into
/// `dir`. Returns the summary path.
pub fn write_sweep(entries: &[SweepEntry], dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for (i, e) in entries.iter().enumerate() {
        if let Ok(report) = &e.outcome {
            write_report_files(report, dir, &format!("run-{i}"))?;
        }
    }
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for row in rows(entries) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{GeneratorConfig, RotationalConfig};

    fn cfg(p: usize) -> ExperimentConfig {
        ExperimentConfig {
            generator: GeneratorConfig::Rotational(RotationalConfig::new(4, p, 2).unwrap()),
            total_steps: 300,
            window: 5,
            methods: vec![Method::Mart, Method::Move, Method::Var],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn failures_are_isolated() {
        let mut bad = cfg(1);
        bad.total_steps = 10;
        let entries = sweep(&[cfg(1), bad, cfg(3)]).unwrap();
        assert!(entries[0].outcome.is_ok());
        assert!(entries[1].outcome.is_err());
        assert!(entries[2].outcome.is_ok());
        let table = rows(&entries);
        assert_eq!(table.len(), 3 + 1 + 3);
        assert!(table[3].status.starts_with("error"));
    }

    #[test]
    fn single_config_matches_run_experiment() {
        let entries = sweep(&[cfg(2)]).unwrap();
        let direct = run_experiment(&cfg(2)).unwrap();
        assert_eq!(entries[0].outcome.as_ref().unwrap().results, direct.results);
        assert!(sweep(&[]).is_err());
    }
}
