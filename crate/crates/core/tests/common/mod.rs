#![allow(dead_code)]

use ndarray::{Array1, Array2};
use ngar::neural::layers::{
    decoder_backward_batch, decoder_forward_batch, gated_pool_backward_batch, gated_pool_forward_batch,
    gcn_backward_batch, gcn_forward_batch, lstm_layer_backward, lstm_layer_forward, Decoder, Dense, GatedPool,
    LstmLayer,
};
use ngar::neural::{ngar_backward, ngar_forward, ngar_loss, NgarConfig, NgarModel};
use ngar::AttributedGraph;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut impl Rng, n: usize, f: usize) -> AttributedGraph {
    let x: Vec<f64> = (0..n * f).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut a = vec![0u8; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let e = u8::from(rng.gen_bool(0.5));
            a[i * n + j] = e;
            a[j * n + i] = e;
        }
    }
    AttributedGraph::new(n, f, x, a).unwrap()
}

pub fn random_graphs(rng: &mut impl Rng, count: usize, n: usize, f: usize) -> Vec<AttributedGraph> {
    (0..count).map(|_| random_graph(rng, n, f)).collect()
}

pub fn random_array(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

pub fn random_dense(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Dense<f64> {
    Dense {
        w: random_array(rng, fan_in, fan_out),
        b: Array1::from_shape_fn(fan_out, |_| rng.gen_range(-0.5..0.5)),
    }
}

pub const FD_STEP: f64 = 1e-5;

/// `|numeric − analytic| / max(|numeric|, |analytic|, 1e-6)`.
pub fn relative_error(numeric: f64, analytic: f64) -> f64 {
    (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6)
}

/// Central differences of `loss` at `coords` random entries of `values`;
/// returns the largest relative error against `analytic`.
pub fn check_coordinates(
    values: &mut [f64],
    analytic: &[f64],
    coords: usize,
    rng: &mut impl Rng,
    mut loss: impl FnMut(&[f64]) -> f64,
) -> f64 {
    assert_eq!(values.len(), analytic.len());
    let picks = sample(rng, values.len(), coords.min(values.len()));
    let mut worst = 0.0f64;
    for idx in picks {
        let orig = values[idx];
        values[idx] = orig + FD_STEP;
        let up = loss(values);
        values[idx] = orig - FD_STEP;
        let down = loss(values);
        values[idx] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(numeric, analytic[idx]));
    }
    worst
}

fn weighted_sum(out: &Array2<f64>, c: &Array2<f64>) -> f64 {
    (out * c).sum()
}

fn flat(a: &Array2<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

/// Worst relative error of the graph convolution gradients (W, b and input)
/// over `coords` random coordinates of each.
pub fn gcn_gradient_error(seed: u64, coords: usize) -> f64 {
    let mut r = rng(seed);
    let (n, graphs, c_in, c_out) = (3, 2, 3, 4);
    let adj: Vec<Vec<f64>> = (0..graphs)
        .map(|_| {
            let g = random_graph(&mut r, n, 1);
            ngar::neural::normalize_adjacency::<f64>(g.adjacency(), n).iter().copied().collect()
        })
        .collect();
    let blocks: Vec<&[f64]> = adj.iter().map(Vec::as_slice).collect();
    let layer = random_dense(&mut r, c_in, c_out);
    let x = random_array(&mut r, graphs * n, c_in);
    let c = random_array(&mut r, graphs * n, c_out);
    let out = gcn_forward_batch(&layer, &x, &blocks, n).unwrap();
    let (grad, dx) = gcn_backward_batch(&layer, &x, &blocks, n, &out, &c);
    let loss = |l: &Dense<f64>, x: &Array2<f64>| weighted_sum(&gcn_forward_batch(l, x, &blocks, n).unwrap(), &c);

    let mut worst = 0.0f64;
    let mut w = flat(&layer.w);
    worst = worst.max(check_coordinates(&mut w, &flat(&grad.w), coords, &mut r, |v| {
        let l = Dense { w: Array2::from_shape_vec(layer.w.dim(), v.to_vec()).unwrap(), b: layer.b.clone() };
        loss(&l, &x)
    }));
    let mut b = layer.b.to_vec();
    worst = worst.max(check_coordinates(&mut b, &grad.b.to_vec(), coords, &mut r, |v| {
        let l = Dense { w: layer.w.clone(), b: Array1::from_vec(v.to_vec()) };
        loss(&l, &x)
    }));
    let mut xs = flat(&x);
    worst = worst.max(check_coordinates(&mut xs, &flat(&dx), coords, &mut r, |v| {
        loss(&layer, &Array2::from_shape_vec(x.dim(), v.to_vec()).unwrap())
    }));
    worst
}

pub fn pool_gradient_error(seed: u64, coords: usize) -> f64 {
    let mut r = rng(seed);
    let (n, graphs, c_in, c_out) = (3, 2, 4, 5);
    let pool = GatedPool { gate: random_dense(&mut r, c_in, c_out), proj: random_dense(&mut r, c_in, c_out) };
    let h = random_array(&mut r, graphs * n, c_in);
    let c = random_array(&mut r, graphs, c_out);
    let (_, cache) = gated_pool_forward_batch(&pool, &h, n).unwrap();
    let (grad, dh) = gated_pool_backward_batch(&pool, &h, n, &cache, &c);
    let loss = |p: &GatedPool<f64>, h: &Array2<f64>| weighted_sum(&gated_pool_forward_batch(p, h, n).unwrap().0, &c);

    let mut worst = 0.0f64;
    let mut gw = flat(&pool.gate.w);
    worst = worst.max(check_coordinates(&mut gw, &flat(&grad.gate.w), coords, &mut r, |v| {
        let mut p = pool.clone();
        p.gate.w = Array2::from_shape_vec(pool.gate.w.dim(), v.to_vec()).unwrap();
        loss(&p, &h)
    }));
    let mut gb = pool.gate.b.to_vec();
    worst = worst.max(check_coordinates(&mut gb, &grad.gate.b.to_vec(), coords, &mut r, |v| {
        let mut p = pool.clone();
        p.gate.b = Array1::from_vec(v.to_vec());
        loss(&p, &h)
    }));
    let mut pw = flat(&pool.proj.w);
    worst = worst.max(check_coordinates(&mut pw, &flat(&grad.proj.w), coords, &mut r, |v| {
        let mut p = pool.clone();
        p.proj.w = Array2::from_shape_vec(pool.proj.w.dim(), v.to_vec()).unwrap();
        loss(&p, &h)
    }));
    let mut pb = pool.proj.b.to_vec();
    worst = worst.max(check_coordinates(&mut pb, &grad.proj.b.to_vec(), coords, &mut r, |v| {
        let mut p = pool.clone();
        p.proj.b = Array1::from_vec(v.to_vec());
        loss(&p, &h)
    }));
    let mut hs = flat(&h);
    worst = worst.max(check_coordinates(&mut hs, &flat(&dh), coords, &mut r, |v| {
        loss(&pool, &Array2::from_shape_vec(h.dim(), v.to_vec()).unwrap())
    }));
    worst
}

pub fn lstm_gradient_error(seed: u64, coords: usize) -> f64 {
    let mut r = rng(seed);
    let (steps, batch, c_in, units) = (3, 2, 3, 4);
    let layer = LstmLayer {
        w_ih: random_array(&mut r, c_in, 4 * units),
        w_hh: random_array(&mut r, units, 4 * units),
        b: Array1::from_shape_fn(4 * units, |_| r.gen_range(-0.5..0.5)),
    };
    let x = random_array(&mut r, steps * batch, c_in);
    // loss reads every hidden state
    let c = random_array(&mut r, steps * batch, units);
    let cache = lstm_layer_forward(&layer, &x, batch).unwrap();
    let (grad, dx) = lstm_layer_backward(&layer, &x, &cache, &c);
    let loss = |l: &LstmLayer<f64>, x: &Array2<f64>| weighted_sum(&lstm_layer_forward(l, x, batch).unwrap().hidden, &c);

    let mut worst = 0.0f64;
    let mut wih = flat(&layer.w_ih);
    worst = worst.max(check_coordinates(&mut wih, &flat(&grad.w_ih), coords, &mut r, |v| {
        let mut l = layer.clone();
        l.w_ih = Array2::from_shape_vec(layer.w_ih.dim(), v.to_vec()).unwrap();
        loss(&l, &x)
    }));
    let mut whh = flat(&layer.w_hh);
    worst = worst.max(check_coordinates(&mut whh, &flat(&grad.w_hh), coords, &mut r, |v| {
        let mut l = layer.clone();
        l.w_hh = Array2::from_shape_vec(layer.w_hh.dim(), v.to_vec()).unwrap();
        loss(&l, &x)
    }));
    let mut b = layer.b.to_vec();
    worst = worst.max(check_coordinates(&mut b, &grad.b.to_vec(), coords, &mut r, |v| {
        let mut l = layer.clone();
        l.b = Array1::from_vec(v.to_vec());
        loss(&l, &x)
    }));
    let mut xs = flat(&x);
    worst = worst.max(check_coordinates(&mut xs, &flat(&dx), coords, &mut r, |v| {
        loss(&layer, &Array2::from_shape_vec(x.dim(), v.to_vec()).unwrap())
    }));
    worst
}

pub fn decoder_gradient_error(seed: u64, coords: usize) -> f64 {
    let mut r = rng(seed);
    let (batch, input, d1, d2, n, f) = (2, 4, 5, 5, 3, 2);
    let dec = Decoder {
        hidden1: random_dense(&mut r, input, d1),
        hidden2: random_dense(&mut r, d1, d2),
        head_adj: random_dense(&mut r, d2, n * n),
        head_feat: random_dense(&mut r, d2, n * f),
    };
    let h = random_array(&mut r, batch, input);
    let c_adj = random_array(&mut r, batch, n * n);
    let c_feat = random_array(&mut r, batch, n * f);
    // loss = Σ c_adj ⊙ sigmoid(logits) + Σ c_feat ⊙ features
    let loss = |d: &Decoder<f64>, h: &Array2<f64>| {
        let out = decoder_forward_batch(d, h).unwrap();
        weighted_sum(&out.adj_prob, &c_adj) + weighted_sum(&out.features, &c_feat)
    };
    let cache = decoder_forward_batch(&dec, &h).unwrap();
    let d_logits = &c_adj * &cache.adj_prob.mapv(|p| p * (1.0 - p));
    let (grad, dh) = decoder_backward_batch(&dec, &cache, &d_logits, &c_feat);

    let mut worst = 0.0f64;
    let tensors: [(fn(&mut Decoder<f64>) -> &mut Dense<f64>, &Dense<f64>); 4] = [
        (|d| &mut d.hidden1, &grad.hidden1),
        (|d| &mut d.hidden2, &grad.hidden2),
        (|d| &mut d.head_adj, &grad.head_adj),
        (|d| &mut d.head_feat, &grad.head_feat),
    ];
    for (get, g) in tensors {
        let mut probe = dec.clone();
        let mut w = flat(&get(&mut probe).w);
        worst = worst.max(check_coordinates(&mut w, &flat(&g.w), coords, &mut r, |v| {
            let mut d = dec.clone();
            let layer = get(&mut d);
            layer.w = Array2::from_shape_vec(layer.w.dim(), v.to_vec()).unwrap();
            loss(&d, &h)
        }));
        let mut b = get(&mut probe).b.to_vec();
        worst = worst.max(check_coordinates(&mut b, &g.b.to_vec(), coords, &mut r, |v| {
            let mut d = dec.clone();
            get(&mut d).b = Array1::from_vec(v.to_vec());
            loss(&d, &h)
        }));
    }
    let mut hs = flat(&h);
    worst = worst.max(check_coordinates(&mut hs, &flat(&dh), coords, &mut r, |v| {
        loss(&dec, &Array2::from_shape_vec(h.dim(), v.to_vec()).unwrap())
    }));
    worst
}

/// Full model: N = 3, k = 2, 4 channels, L2 active. Checks `coords` random
/// coordinates of every parameter tensor.
pub fn model_gradient_error(seed: u64, coords: usize) -> f64 {
    let mut r = rng(seed);
    let config = NgarConfig { window: 2, l2_weight: 0.01, seed, ..NgarConfig::default().with_width(4) };
    let l2 = config.l2_weight;
    let mut model = NgarModel::<f64>::new(config, 3, 2).unwrap();
    // zero biases put dead ReLU units exactly on the kink; move off it
    for (name, mut t) in model.params.tensors_mut() {
        if name.ends_with(".b") {
            t.mapv_inplace(|v| v + r.gen_range(-0.2..0.2));
        }
    }
    let graphs = random_graphs(&mut r, 3, 3, 2);
    let (window, target) = (&graphs[..2], &graphs[2]);
    let grads = ngar_backward(&model, window, target).unwrap();
    let names: Vec<&str> = model.params.tensors().iter().map(|(n, _)| *n).collect();
    let mut worst = 0.0f64;
    for (ti, _) in names.iter().enumerate() {
        let analytic: Vec<f64> = grads.tensors()[ti].1.iter().copied().collect();
        let mut values: Vec<f64> = model.params.tensors()[ti].1.iter().copied().collect();
        let err = check_coordinates(&mut values, &analytic, coords, &mut r, |v| {
            for (dst, src) in model.params.tensors_mut()[ti].1.iter_mut().zip(v) {
                *dst = *src;
            }
            let (a, x) = ngar_forward(&model, window).unwrap();
            ngar_loss(&a, &x, target, &model.params, l2).unwrap().total
        });
        // restore
        for (dst, src) in model.params.tensors_mut()[ti].1.iter_mut().zip(&values) {
            *dst = *src;
        }
        worst = worst.max(err);
    }
    worst
}

/// Squared distance of undirected, attribute-free graphs under `perm`,
/// written out directly.
pub fn oracle_squared_cost(g: &AttributedGraph, h: &AttributedGraph, perm: &[usize], edge_weight: f64) -> f64 {
    let (n, f) = (g.n_nodes(), g.n_features());
    let mut features = 0.0;
    for i in 0..n {
        for c in 0..f {
            let d = g.features()[i * f + c] - h.features()[perm[i] * f + c];
            features += d * d;
        }
    }
    let mut edges = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = f64::from(g.adjacency()[i * n + j]) - f64::from(h.adjacency()[perm[i] * n + perm[j]]);
            edges += d * d;
        }
    }
    features + edge_weight * edges
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Delaunay edges by brute force: `i–j` is an edge iff some third point `k`
/// makes a non-degenerate triangle whose circumcircle holds no other point
/// strictly inside.
pub fn oracle_delaunay(points: &[(f64, f64)]) -> Vec<u8> {
    let n = points.len();
    let mut a = vec![0u8; n * n];
    for i in 0..n {
        for j in i + 1..n {
            'third: for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let (p, q, r) = (points[i], points[j], points[k]);
                let det = 2.0 * (p.0 * (q.1 - r.1) + q.0 * (r.1 - p.1) + r.0 * (p.1 - q.1));
                if det.abs() < 1e-12 {
                    continue;
                }
                let sq = |s: (f64, f64)| s.0 * s.0 + s.1 * s.1;
                let ux = (sq(p) * (q.1 - r.1) + sq(q) * (r.1 - p.1) + sq(r) * (p.1 - q.1)) / det;
                let uy = (sq(p) * (r.0 - q.0) + sq(q) * (p.0 - r.0) + sq(r) * (q.0 - p.0)) / det;
                let rad2 = (p.0 - ux).powi(2) + (p.1 - uy).powi(2);
                for (m, s) in points.iter().enumerate() {
                    if m != i && m != j && m != k && (s.0 - ux).powi(2) + (s.1 - uy).powi(2) < rad2 * (1.0 - 1e-12) {
                        continue 'third;
                    }
                }
                a[i * n + j] = 1;
                a[j * n + i] = 1;
                break;
            }
        }
    }
    a
}

/// Sum of squared identity distances from `candidate` to the sample.
pub fn oracle_frechet_cost(candidate: &AttributedGraph, sample: &[AttributedGraph]) -> f64 {
    let id: Vec<usize> = (0..candidate.n_nodes()).collect();
    sample.iter().map(|s| oracle_squared_cost(candidate, s, &id, 1.0)).sum()
}
