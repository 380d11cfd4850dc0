mod common;

use common::*;
use ndarray::{Array1, Array2};
use ngar::neural::layers::{gated_pool_forward_batch, Dense, GatedPool};
use ngar::neural::{
    adam_step, gated_pool_forward, gcn_forward, load_checkpoint, ngar_backward, ngar_forward, ngar_loss,
    ngar_predict, normalize_adjacency, save_checkpoint, train, AdamState, GraphStore, NgarConfig, NgarModel,
};
use ngar::AttributedGraph;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn tiny(window: usize, seed: u64) -> NgarConfig {
    NgarConfig { window, seed, ..NgarConfig::default().with_width(4) }
}

#[test]
fn layer_gradients_match_finite_differences() {
    for seed in 0..3 {
        assert!(gcn_gradient_error(seed, 50) <= 1e-4);
        assert!(pool_gradient_error(seed, 50) <= 1e-4);
        assert!(lstm_gradient_error(seed, 50) <= 1e-4);
        assert!(decoder_gradient_error(seed, 50) <= 1e-4);
    }
}

#[test]
fn model_gradient_matches_finite_differences() {
    for seed in 0..2 {
        let err = model_gradient_error(seed, 50);
        assert!(err <= 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn normalised_adjacency_examples() {
    let a = normalize_adjacency::<f64>(&[0], 1);
    assert_eq!(a, Array2::from_elem((1, 1), 1.0));
    let a = normalize_adjacency::<f64>(&[0, 1, 1, 0], 2);
    assert!(a.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    // isolated node keeps a unit self-loop
    let a = normalize_adjacency::<f64>(&[0, 1, 0, 1, 0, 0, 0, 0, 0], 3);
    assert_eq!(a[[2, 2]], 1.0);
    assert_eq!(a.t(), a);
}

#[test]
fn gated_pool_half_gate() {
    let h = Array2::from_shape_vec((1, 3), vec![1.0, -2.0, 4.0]).unwrap();
    let pool = GatedPool {
        gate: Dense::zeros(3, 3),
        proj: Dense { w: Array2::eye(3), b: Array1::zeros(3) },
    };
    let out = gated_pool_forward(&h, &pool).unwrap();
    assert_eq!(out.to_vec(), vec![0.5, -1.0, 2.0]);
}

#[test]
fn gcn_identity_weights_average_neighbours() {
    let x = Array2::from_shape_vec((2, 1), vec![2.0, 4.0]).unwrap();
    let a = normalize_adjacency::<f64>(&[0, 1, 1, 0], 2);
    let out = gcn_forward(&x, &a, &Array2::eye(1), &Array1::zeros(1)).unwrap();
    assert!(out.iter().all(|&v| (v - 3.0).abs() < 1e-12));
    let neg = gcn_forward(&(-x), &a, &Array2::eye(1), &Array1::zeros(1)).unwrap();
    assert!(neg.iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pooled_embedding_is_permutation_invariant(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let n = 5;
        let g = random_graph(&mut r, n, 2);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let h = g.permuted(&perm).unwrap();
        let model = NgarModel::<f64>::new(tiny(1, seed), n, 2).unwrap();
        let e = ngar::neural::graph_embeddings(&model, &[g, h]).unwrap();
        for (a, b) in e.row(0).iter().zip(e.row(1)) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn loss_decomposes_into_scalar_terms(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let graphs = random_graphs(&mut r, 3, 3, 2);
        let model = NgarModel::<f64>::new(tiny(2, seed), 3, 2).unwrap();
        let (a, x) = ngar_forward(&model, &graphs[..2]).unwrap();
        let target = &graphs[2];
        let loss = ngar_loss(&a, &x, target, &model.params, 0.0).unwrap();
        let mut mse = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                mse += (x[[i, j]] - target.features()[i * 2 + j]).powi(2);
            }
        }
        mse /= 6.0;
        let mut bce = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let p = a[[i, j]].clamp(1e-7, 1.0 - 1e-7);
                let y = f64::from(target.edge(i, j));
                bce -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
            }
        }
        bce /= 9.0;
        prop_assert!((loss.total - (mse + bce)).abs() <= 1e-10);
        prop_assert_eq!(loss.l2, 0.0);
    }
}

#[test]
fn l2_adds_two_lambda_w_to_regularised_kernels() {
    let mut r = rng(4);
    let graphs = random_graphs(&mut r, 3, 3, 2);
    let base = NgarModel::<f64>::new(NgarConfig { l2_weight: 0.0, ..tiny(2, 1) }, 3, 2).unwrap();
    let mut reg = base.clone();
    reg.config.l2_weight = 0.25;
    let g0 = ngar_backward(&base, &graphs[..2], &graphs[2]).unwrap();
    let g1 = ngar_backward(&reg, &graphs[..2], &graphs[2]).unwrap();
    let regularised = ["conv1.w", "conv2.w", "decoder.hidden1.w", "decoder.hidden2.w"];
    for (((name, a), (_, b)), (_, w)) in g0.tensors().into_iter().zip(g1.tensors()).zip(base.params.tensors()) {
        for ((x, y), w) in a.iter().zip(b.iter()).zip(w.iter()) {
            let expected = if regularised.contains(&name) { x + 0.5 * w } else { *x };
            assert!((y - expected).abs() <= 1e-12, "{name}");
        }
    }
}

#[test]
fn feature_gradient_vanishes_at_a_reachable_target() {
    let mut r = rng(8);
    let graphs = random_graphs(&mut r, 2, 3, 2);
    let model = NgarModel::<f64>::new(NgarConfig { l2_weight: 0.0, ..tiny(2, 2) }, 3, 2).unwrap();
    let (_, x) = ngar_forward(&model, &graphs).unwrap();
    let target = AttributedGraph::new(3, 2, x.iter().copied().collect(), graphs[1].adjacency().to_vec()).unwrap();
    let g = ngar_backward(&model, &graphs, &target).unwrap();
    // the feature head only receives the MSE gradient
    assert!(g.decoder.head_feat.w.iter().chain(&g.decoder.head_feat.b).all(|v| v.abs() < 1e-12));
}

#[test]
fn adam_examples() {
    let cfg = tiny(1, 0);
    let mut p = NgarModel::<f64>::new(cfg, 2, 2).unwrap().params;
    let start = p.clone();
    let mut state = AdamState { m: p.zeros_like(), v: p.zeros_like(), step: 0 };
    // zero gradient leaves parameters unchanged
    let zero = p.zeros_like();
    adam_step(&mut p, &mut state, &zero, 0.1);
    assert_eq!(p, start);
    assert_eq!(state.step, 1);

    // scalar quadratic f(w) = w², driven through conv1.w[0,0]
    let mut p = start.zeros_like();
    p.conv1.w[[0, 0]] = 1.0;
    let mut state = AdamState { m: p.zeros_like(), v: p.zeros_like(), step: 0 };
    let mut prev = 1.0;
    for _ in 0..2 {
        let mut g = p.zeros_like();
        g.conv1.w[[0, 0]] = 2.0 * p.conv1.w[[0, 0]];
        adam_step(&mut p, &mut state, &g, 0.1);
        assert!(p.conv1.w[[0, 0]] < prev);
        prev = p.conv1.w[[0, 0]];
    }
    // first step is −lr·sign(g)
    assert!((p.conv1.w[[0, 0]] - 0.8).abs() < 1e-3);
}

fn with_constant_head(prob: f64) -> NgarModel<f32> {
    let mut m = NgarModel::<f32>::new(tiny(2, 0), 4, 2).unwrap();
    m.params.decoder.head_adj.w.fill(0.0);
    m.params.decoder.head_adj.b.fill((prob / (1.0 - prob)).ln() as f32);
    m
}

#[test]
fn prediction_thresholds() {
    let mut r = rng(1);
    let window = random_graphs(&mut r, 2, 4, 2);
    let full = ngar_predict(&with_constant_head(0.9), &window).unwrap();
    assert_eq!(full.edge_count(), 6);
    let none = ngar_predict(&with_constant_head(0.1), &window).unwrap();
    assert_eq!(none.edge_count(), 0);
    assert!(ngar_predict(&with_constant_head(0.1), &window[..1]).is_err());
}

#[test]
fn half_probability_accuracy_is_the_edge_absence_rate() {
    let mut r = rng(12);
    let graphs = random_graphs(&mut r, 30, 4, 2);
    let model = with_constant_head(0.5);
    let store = GraphStore::<f32>::new(&graphs).unwrap();
    let starts: Vec<usize> = (0..28).collect();
    let metrics = model.evaluate_windows(&store, &starts).unwrap();
    let absent: usize = graphs[2..].iter().map(|g| g.adjacency().iter().filter(|&&a| a == 0).count()).sum();
    let expected = absent as f64 / (28 * 16) as f64;
    assert!((metrics.adjacency_accuracy - expected).abs() < 1e-12);
}

#[test]
fn training_reduces_loss_on_a_constant_sequence() {
    let g = AttributedGraph::new(3, 2, vec![0.3, -0.2, 0.8, 0.1, -0.5, 0.4], vec![0, 1, 1, 1, 0, 0, 1, 0, 0]).unwrap();
    let seq = vec![g; 500];
    let cfg = NgarConfig { max_epochs: 4, batch_size: 32, ..NgarConfig::default().with_width(8) };
    let cfg = NgarConfig { window: 5, ..cfg };
    let mut model = NgarModel::<f32>::new(cfg.clone(), 3, 2).unwrap();
    let h = train(&mut model, &seq).unwrap();
    assert!(h.epochs.len() <= cfg.max_epochs + 1);
    assert!(h.epochs.last().unwrap().train_loss < h.epochs[0].train_loss);
    let best = h.best().unwrap().validation_loss;
    let min = h.epochs.iter().map(|e| e.validation_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(best, min);

    let mut again = NgarModel::<f32>::new(cfg, 3, 2).unwrap();
    train(&mut again, &seq).unwrap();
    assert_eq!(again.params, model.params);
}

#[test]
fn training_rejects_short_sequences() {
    let mut r = rng(2);
    let graphs = random_graphs(&mut r, 6, 3, 2);
    let mut model = NgarModel::<f32>::new(tiny(5, 0), 3, 2).unwrap();
    assert!(matches!(train(&mut model, &graphs), Err(ngar::Error::InvalidInput(_))));
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(3);
    let graphs = random_graphs(&mut r, 40, 3, 2);
    let mut model = NgarModel::<f32>::new(NgarConfig { max_epochs: 1, batch_size: 8, ..tiny(3, 5) }, 3, 2).unwrap();
    train(&mut model, &graphs).unwrap();
    let path = dir.path().join("m.json");
    save_checkpoint(&model, &path).unwrap();
    let back = load_checkpoint::<f32>(&path).unwrap();
    assert_eq!(back, model);
    assert!(back.adam.step > 0);
    assert!(load_checkpoint::<f64>(&path).is_err());

    let m64 = NgarModel::<f64>::new(tiny(2, 9), 3, 2).unwrap();
    save_checkpoint(&m64, &path).unwrap();
    assert_eq!(load_checkpoint::<f64>(&path).unwrap(), m64);
}

#[test]
fn non_finite_input_is_reported() {
    let mut r = rng(6);
    let graphs = random_graphs(&mut r, 3, 3, 2);
    let mut model = NgarModel::<f64>::new(tiny(2, 0), 3, 2).unwrap();
    model.params.conv1.w[[0, 0]] = f64::NAN;
    let err = ngar_backward(&model, &graphs[..2], &graphs[2]).unwrap_err();
    assert!(matches!(err, ngar::Error::Numerical(_)), "{err}");
}

#[test]
fn pooling_batch_agrees_with_single_graph() {
    let mut r = rng(7);
    let pool = GatedPool { gate: random_dense(&mut r, 3, 2), proj: random_dense(&mut r, 3, 2) };
    let h = random_array(&mut r, 8, 3);
    let (batch, _) = gated_pool_forward_batch(&pool, &h, 4).unwrap();
    let second = gated_pool_forward(&h.slice(ndarray::s![4.., ..]).to_owned(), &pool).unwrap();
    for (a, b) in batch.row(1).iter().zip(&second) {
        assert!((a - b).abs() < 1e-14);
    }
}

