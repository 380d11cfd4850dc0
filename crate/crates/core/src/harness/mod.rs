//! Experiment orchestration: generate a sequence, split it chronologically,
//! fit every requested predictor on the training segment and record the
//! graph edit distance between each prediction and the true next graph.

mod report;
mod sweep;

pub use report::{emit_report, write_report_files, MethodResult, ReportFormat, Summary};
pub use sweep::{sweep, write_sweep, SweepEntry, SweepRow};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{predict_mart, predict_mean, predict_move, var_fit, var_predict, DEFAULT_WINDOW};
use crate::distance::{ged, DistanceParams};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphSequence};
use crate::neural::{train_with_callback, EpochRecord, GraphStore, NgarConfig, NgarMetrics, NgarModel, TrainHistory};
use crate::sim::{generate_sequence, GeneratorConfig};

/// A next-graph predictor under evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mean,
    Mart,
    Move,
    Var,
    Ngar,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mean, Method::Mart, Method::Move, Method::Var, Method::Ngar];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Mart => "mart",
            Method::Move => "move",
            Method::Var => "var",
            Method::Ngar => "ngar",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}; expected one of mean, mart, move, var, ngar")))
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    /// Length `T` of the generated sequence.
    pub total_steps: usize,
    /// Trailing fraction of the sequence used for testing.
    pub test_fraction: f64,
    /// Window `k` shared by Move, VAR and NGAR.
    pub window: usize,
    /// Evaluated in this order.
    pub methods: Vec<Method>,
    pub distance: DistanceParams,
    pub var_ridge: f64,
    /// Network hyperparameters; `window` and `seed` are overridden by the
    /// experiment's own values.
    pub ngar: NgarConfig,
    /// Where [`write_report_files`] puts its output. Not echoed in reports.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    /// Seeds network initialisation and batch shuffling; the generator
    /// carries its own seed.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig::Pmlds(
                crate::sim::PmldsConfig::new(5, 2, 11, 0).expect("default PMLDS configuration is valid"),
            ),
            total_steps: 20_000,
            test_fraction: 0.1,
            window: DEFAULT_WINDOW,
            methods: Method::ALL.to_vec(),
            distance: DistanceParams::default(),
            var_ridge: crate::baselines::var::DEFAULT_RIDGE,
            ngar: NgarConfig::default(),
            output_dir: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(generator: GeneratorConfig) -> Self {
        Self {
            generator,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.distance.validate()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test fraction must lie in (0, 1)"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window k must be ≥ 1"));
        }
        if self.total_steps <= 10 * self.window {
            return Err(Error::invalid(format!(
                "total steps T = {} must exceed 10·k = {}",
                self.total_steps,
                10 * self.window
            )));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(Error::invalid("methods must not repeat"));
        }
        self.network_config().validate()
    }

    /// The network configuration actually used.
    pub fn network_config(&self) -> NgarConfig {
        NgarConfig {
            window: self.window,
            seed: self.seed,
            ..self.ngar.clone()
        }
    }

    /// `(train, test)` lengths of a sequence of `len` graphs.
    pub fn split(&self, len: usize) -> (usize, usize) {
        let test = ((len as f64) * self.test_fraction).round() as usize;
        (len - test, test)
    }
}

/// Test-set results of the network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgarSummary {
    pub metrics: NgarMetrics,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub history: Vec<EpochRecord>,
}

/// Wall-clock seconds per stage. Kept out of the serialised report so that
/// reruns produce identical files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate: f64,
    /// `(method, seconds)` covering fit and prediction.
    pub methods: Vec<(Method, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    /// `("p" | "c", value)`.
    pub complexity: (String, usize),
    pub config: ExperimentConfig,
    pub train_len: usize,
    pub test_len: usize,
    /// SHA-256 of the training graphs (features and adjacency bits).
    pub train_hash: String,
    /// SHA-256 of each fitted model's parameters.
    pub model_fingerprints: Vec<(Method, String)>,
    /// Index (into the full sequence) of every evaluated target graph.
    pub targets: Vec<usize>,
    pub results: Vec<MethodResult>,
    pub ngar: Option<NgarSummary>,
    #[serde(skip)]
    pub timings: Timings,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }

    pub fn median(&self, method: Method) -> Option<f64> {
        self.result(method).map(|r| r.summary.median)
    }
}

/// Generate the configured sequence and run the experiment on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, |_, _| {})
}

/// As [`run_experiment`], reporting NGAR training progress to `on_epoch`.
pub fn run_experiment_with<F: FnMut(&str, &EpochRecord)>(
    config: &ExperimentConfig,
    on_epoch: F,
) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let seq = generate_sequence(&config.generator, config.total_steps).map_err(|e| e.context("generating sequence"))?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut report = run_experiment_on_with(&seq, config, on_epoch)?;
    report.timings.generate = elapsed;
    Ok(report)
}

/// Run the experiment on an existing sequence (its length overrides `total_steps`).
pub fn run_experiment_on(seq: &GraphSequence, config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_on_with(seq, config, |_, _| {})
}

pub fn run_experiment_on_with<F: FnMut(&str, &EpochRecord)>(
    seq: &GraphSequence,
    config: &ExperimentConfig,
    on_epoch: F,
) -> Result<ExperimentReport> {
    run(seq, config, None, on_epoch)
}

/// Evaluate on an existing sequence using an already trained network for
/// NGAR instead of training one. Its window must equal `config.window`.
pub fn evaluate_pretrained(
    seq: &GraphSequence,
    config: &ExperimentConfig,
    model: NgarModel<f32>,
) -> Result<ExperimentReport> {
    if model.config.window != config.window {
        return Err(Error::invalid(format!(
            "checkpoint was trained with k = {}, evaluation uses k = {}",
            model.config.window, config.window
        )));
    }
    run(seq, config, Some(model), |_, _| {})
}

fn run<F: FnMut(&str, &EpochRecord)>(
    seq: &GraphSequence,
    config: &ExperimentConfig,
    mut pretrained: Option<NgarModel<f32>>,
    mut on_epoch: F,
) -> Result<ExperimentReport> {
    config.distance.validate()?;
    let k = config.window;
    let (n_train, n_test) = config.split(seq.len());
    if n_test <= k {
        return Err(Error::invalid(format!(
            "test segment of {n_test} graphs leaves no target after a window of k = {k}"
        )));
    }
    if n_train <= k {
        return Err(Error::invalid(format!("training segment of {n_train} graphs is shorter than k = {k}")));
    }
    let train = seq.slice(0, n_train);
    let test = &seq.graphs()[n_train..];
    // windows lie wholly inside the test segment: target test[j + k] follows test[j..j + k]
    let starts: Vec<usize> = (0..n_test - k).collect();
    let targets: Vec<usize> = starts.iter().map(|s| n_train + s + k).collect();
    let label = seq.origin().map_or_else(|| config.generator.label(), GeneratorConfig::label);
    let (key, value) = seq.origin().unwrap_or(&config.generator).complexity();

    let mut report = ExperimentReport {
        label: label.clone(),
        complexity: (key.to_string(), value),
        config: config.clone(),
        train_len: n_train,
        test_len: n_test,
        train_hash: hash_graphs(train.graphs()),
        model_fingerprints: Vec::new(),
        targets,
        results: Vec::new(),
        ngar: None,
        timings: Timings::default(),
    };

    for &method in &config.methods {
        let clock = Instant::now();
        let residuals = match method {
            Method::Mean => {
                let mean = predict_mean(&train).map_err(|e| e.context("mean: fitting"))?;
                report.model_fingerprints.push((method, hash_graphs(std::slice::from_ref(&mean))));
                evaluate(method, test, k, &config.distance, |_| Ok(mean.clone()))?
            }
            Method::Mart => evaluate(method, test, k, &config.distance, predict_mart)?,
            Method::Move => evaluate(method, test, k, &config.distance, |w| predict_move(w, k))?,
            Method::Var => {
                let model = var_fit(&train, k, config.var_ridge).map_err(|e| e.context("var: fitting"))?;
                report
                    .model_fingerprints
                    .push((method, hash_values(model.parameters())));
                evaluate(method, test, k, &config.distance, |w| var_predict(&model, w))?
            }
            Method::Ngar => {
                let (model, history) = match pretrained.take() {
                    Some(model) => (model, None),
                    None => {
                        let (n, f) = seq.dims().expect("non-empty sequence");
                        let mut model = NgarModel::<f32>::new(config.network_config(), n, f)?;
                        let history = train_with_callback(&mut model, train.graphs(), |r| on_epoch(&label, r))
                            .map_err(|e| e.context("ngar: training"))?;
                        (model, Some(history))
                    }
                };
                report.model_fingerprints.push((
                    method,
                    hash_values(model.params.tensors().iter().flat_map(|(_, t)| t.iter().map(|&v| f64::from(v)))),
                ));
                let store = GraphStore::<f32>::new(test)?;
                let metrics = model.evaluate_windows(&store, &starts).map_err(|e| e.context("ngar: testing"))?;
                let predictions = model.predict_windows(&store, &starts).map_err(|e| e.context("ngar: testing"))?;
                let mut residuals = Vec::with_capacity(starts.len());
                for (s, p) in starts.iter().zip(&predictions) {
                    let g = model.to_graph(p)?;
                    residuals.push(
                        ged(&test[s + k], &g, &config.distance)
                            .map_err(|e| e.context(format!("ngar at test step {}", s + k)))?,
                    );
                }
                report.ngar = Some(summarise_training(metrics, history));
                residuals
            }
        };
        report.timings.methods.push((method, clock.elapsed().as_secs_f64()));
        report.results.push(MethodResult::new(method, residuals));
    }
    Ok(report)
}

/// Train a network on the training segment of `seq`, exactly as
/// [`run_experiment_on`] would.
pub fn train_network<F: FnMut(&EpochRecord)>(
    seq: &GraphSequence,
    config: &ExperimentConfig,
    on_epoch: F,
) -> Result<(NgarModel<f32>, TrainHistory)> {
    let (n_train, _) = config.split(seq.len());
    let (n, f) = seq.dims().ok_or_else(|| Error::invalid("empty sequence"))?;
    let mut model = NgarModel::<f32>::new(config.network_config(), n, f)?;
    let history = train_with_callback(&mut model, &seq.graphs()[..n_train], on_epoch)?;
    Ok((model, history))
}

fn summarise_training(metrics: NgarMetrics, history: Option<TrainHistory>) -> NgarSummary {
    let history = history.unwrap_or_default();
    NgarSummary {
        metrics,
        epochs_run: history.epochs.len().saturating_sub(1),
        best_epoch: history.best_epoch,
        stopped_early: history.stopped_early,
        history: history.epochs,
    }
}

fn evaluate<P>(method: Method, test: &[AttributedGraph], k: usize, distance: &DistanceParams, mut predict: P) -> Result<Vec<f64>>
where
    P: FnMut(&[AttributedGraph]) -> Result<AttributedGraph>,
{
    (0..test.len() - k)
        .map(|s| {
            let ctx = |e: Error| e.context(format!("{method} at test step {}", s + k));
            let g = predict(&test[s..s + k]).map_err(ctx)?;
            ged(&test[s + k], &g, distance).map_err(ctx)
        })
        .collect()
}

/// SHA-256 over the features and adjacency of `graphs`, as hex.
pub fn hash_graphs(graphs: &[AttributedGraph]) -> String {
    let mut h = Sha256::new();
    for g in graphs {
        h.update((g.n_nodes() as u64).to_le_bytes());
        h.update((g.n_features() as u64).to_le_bytes());
        for v in g.features() {
            h.update(v.to_le_bytes());
        }
        h.update(g.adjacency());
    }
    hex(&h.finalize())
}

fn hash_values(values: impl Iterator<Item = f64>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RotationalConfig;

    fn constant_sequence(len: usize) -> GraphSequence {
        let g = AttributedGraph::new(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6], vec![0, 1, 0, 1, 0, 1, 0, 1, 0]).unwrap();
        GraphSequence::new(vec![g; len]).unwrap()
    }

    fn quick(methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig {
            window: 3,
            methods,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn mart_on_constant_sequence_is_exact() {
        let r = run_experiment_on(&constant_sequence(100), &quick(vec![Method::Mart])).unwrap();
        let res = &r.result(Method::Mart).unwrap().residuals;
        assert_eq!(res.len(), 10 - 3);
        assert!(res.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn methods_share_targets() {
        let gen = GeneratorConfig::Rotational(RotationalConfig::new(4, 2, 1).unwrap());
        let seq = generate_sequence(&gen, 300).unwrap();
        let r = run_experiment_on(&seq, &quick(vec![Method::Mean, Method::Mart, Method::Move, Method::Var])).unwrap();
        let lens: Vec<usize> = r.results.iter().map(|m| m.residuals.len()).collect();
        assert_eq!(lens, vec![27; 4]);
        assert_eq!(r.targets.len(), 27);
        assert!(r.results.iter().flat_map(|m| &m.residuals).all(|&d| d >= 0.0));
        assert_eq!(r.complexity, ("p".to_string(), 2));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = quick(vec![Method::Mart, Method::Mart]);
        assert!(c.validate().is_err());
        c.methods = vec![Method::Mart];
        c.total_steps = 30;
        assert!(c.validate().is_err());
        c.total_steps = 100;
        c.test_fraction = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("lstm".parse::<Method>().is_err());
    }
}
