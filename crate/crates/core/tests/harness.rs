mod common;

use common::*;
use ngar::harness::{emit_report, run_experiment, run_experiment_on, ExperimentConfig, ExperimentReport, Method, ReportFormat};
use ngar::sim::{generate_sequence, GeneratorConfig, RotationalConfig};
use ngar::{AttributedGraph, GraphSequence};
use proptest::prelude::*;

fn small(methods: Vec<Method>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(GeneratorConfig::Rotational(RotationalConfig::new(4, 2, 3).unwrap()));
    c.total_steps = 240;
    c.test_fraction = 0.25;
    c.window = 4;
    c.methods = methods;
    c.ngar.conv_channels = 4;
    c.ngar.pool_channels = 4;
    c.ngar.rnn_units = 4;
    c.ngar.dense_units = [4, 4];
    c.ngar.max_epochs = 2;
    c
}

fn perturb_tail(seq: &GraphSequence, from: usize, seed: u64) -> GraphSequence {
    let mut r = rng(seed);
    let mut graphs = seq.graphs().to_vec();
    for g in &mut graphs[from..] {
        *g = random_graph(&mut r, g.n_nodes(), g.n_features());
    }
    GraphSequence::new(graphs).unwrap()
}

#[test]
fn test_segment_never_reaches_the_fitted_models() {
    let config = small(Method::ALL.to_vec());
    let seq = GraphSequence::new(generate_sequence(&config.generator, 240).unwrap().graphs().to_vec()).unwrap();
    let (n_train, _) = config.split(seq.len());
    let a = run_experiment_on(&seq, &config).unwrap();
    let b = run_experiment_on(&perturb_tail(&seq, n_train, 8), &config).unwrap();
    assert_eq!(a.train_hash, b.train_hash);
    assert_eq!(a.model_fingerprints, b.model_fingerprints);
    // Mart and Move have nothing fitted
    assert_eq!(a.model_fingerprints.len(), 3);
    assert_eq!(a.ngar.as_ref().unwrap().history, b.ngar.as_ref().unwrap().history);
    assert_ne!(a.results, b.results);
    assert_eq!(a.targets.first(), Some(&(n_train + config.window)));
    assert_eq!(a.targets.last(), Some(&(seq.len() - 1)));
}

fn round_trip(report: &ExperimentReport) -> (ExperimentReport, Vec<u8>, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    emit_report(report, ReportFormat::Json, &first).unwrap();
    let text = std::fs::read(&first).unwrap();
    let back: ExperimentReport = serde_json::from_slice(&text).unwrap();
    let second = dir.path().join("b.json");
    emit_report(&back, ReportFormat::Json, &second).unwrap();
    (back, text, std::fs::read(&second).unwrap())
}

#[test]
fn json_reports_round_trip_at_full_precision() {
    let report = run_experiment(&small(vec![Method::Mean, Method::Var, Method::Ngar])).unwrap();
    let (back, first, second) = round_trip(&report);
    assert_eq!(back.results, report.results);
    assert_eq!(back.ngar, report.ngar);
    assert_eq!(back.config, report.config);
    assert_eq!(first, second);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn csv_has_a_row_per_summary_and_residual(mask in 0u8..32, seed in 0u64..4) {
        let methods: Vec<Method> = Method::ALL.iter().copied().filter(|m| *m != Method::Ngar && mask & (1 << *m as u8) != 0).collect();
        let mut config = small(methods.clone());
        config.generator = GeneratorConfig::Rotational(RotationalConfig::new(4, 2, seed).unwrap());
        let report = run_experiment(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&report, ReportFormat::Csv, &path).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        prop_assert_eq!(reader.headers().unwrap().len(), 15);
        let rows = reader.records().count();
        prop_assert_eq!(rows, methods.len() * (1 + report.targets.len()));
        let (back, first, second) = round_trip(&report);
        prop_assert_eq!(back.results, report.results);
        prop_assert_eq!(first, second);
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let config = small(Method::ALL.to_vec());
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn short_sequences_are_runtime_errors() {
    let config = small(vec![Method::Mart]);
    let graphs: Vec<AttributedGraph> = generate_sequence(&config.generator, 20).unwrap().graphs().to_vec();
    assert!(run_experiment_on(&GraphSequence::new(graphs[..10].to_vec()).unwrap(), &config).is_err());
    assert!(run_experiment_on(&GraphSequence::new(graphs).unwrap(), &config).is_ok());
}
