use ndarray::{s, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{
    decoder_backward_batch, decoder_forward_batch, gated_pool_backward_batch, gated_pool_forward_batch,
    gcn_backward_batch, gcn_forward_batch, lstm_layer_backward, lstm_layer_forward, normalize_adjacency, Decoder,
    DecoderCache, Dense, GatedPool, LstmCache, LstmLayer, PoolCache,
};
use super::loss::{batch_loss, l2_penalty, LossBreakdown};
use super::{cast, widen, NgarConfig, Real};
use crate::error::{Error, Result};
use crate::graph::{threshold_adjacency, AttributedGraph};
use crate::sim::{random_orthogonal, seeded_rng};

/// Every learnable tensor of the network. Also used for gradients and
/// optimiser moments, which share the same layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgarParams<T> {
    pub conv1: Dense<T>,
    pub conv2: Dense<T>,
    pub pool: GatedPool<T>,
    pub lstm1: LstmLayer<T>,
    pub lstm2: LstmLayer<T>,
    pub decoder: Decoder<T>,
}

/// Tensors carrying the L2 penalty: convolution and hidden dense kernels.
pub(crate) const REGULARISED: [&str; 4] = ["conv1.w", "conv2.w", "decoder.hidden1.w", "decoder.hidden2.w"];

macro_rules! each_tensor {
    ($p:expr, $view:ident) => {
        vec![
            ("conv1.w", $p.conv1.w.$view().into_dyn()),
            ("conv1.b", $p.conv1.b.$view().into_dyn()),
            ("conv2.w", $p.conv2.w.$view().into_dyn()),
            ("conv2.b", $p.conv2.b.$view().into_dyn()),
            ("pool.gate.w", $p.pool.gate.w.$view().into_dyn()),
            ("pool.gate.b", $p.pool.gate.b.$view().into_dyn()),
            ("pool.proj.w", $p.pool.proj.w.$view().into_dyn()),
            ("pool.proj.b", $p.pool.proj.b.$view().into_dyn()),
            ("lstm1.w_ih", $p.lstm1.w_ih.$view().into_dyn()),
            ("lstm1.w_hh", $p.lstm1.w_hh.$view().into_dyn()),
            ("lstm1.b", $p.lstm1.b.$view().into_dyn()),
            ("lstm2.w_ih", $p.lstm2.w_ih.$view().into_dyn()),
            ("lstm2.w_hh", $p.lstm2.w_hh.$view().into_dyn()),
            ("lstm2.b", $p.lstm2.b.$view().into_dyn()),
            ("decoder.hidden1.w", $p.decoder.hidden1.w.$view().into_dyn()),
            ("decoder.hidden1.b", $p.decoder.hidden1.b.$view().into_dyn()),
            ("decoder.hidden2.w", $p.decoder.hidden2.w.$view().into_dyn()),
            ("decoder.hidden2.b", $p.decoder.hidden2.b.$view().into_dyn()),
            ("decoder.head_adj.w", $p.decoder.head_adj.w.$view().into_dyn()),
            ("decoder.head_adj.b", $p.decoder.head_adj.b.$view().into_dyn()),
            ("decoder.head_feat.w", $p.decoder.head_feat.w.$view().into_dyn()),
            ("decoder.head_feat.b", $p.decoder.head_feat.b.$view().into_dyn()),
        ]
    };
}

impl<T: Real> NgarParams<T> {
    pub fn zeros(config: &NgarConfig, n_nodes: usize, n_features: usize) -> Self {
        let c = config.conv_channels;
        let p = config.pool_channels;
        let h = config.rnn_units;
        let [d1, d2] = config.dense_units;
        Self {
            conv1: Dense::zeros(n_features, c),
            conv2: Dense::zeros(c, c),
            pool: GatedPool {
                gate: Dense::zeros(c, p),
                proj: Dense::zeros(c, p),
            },
            lstm1: LstmLayer::zeros(p, h),
            lstm2: LstmLayer::zeros(h, h),
            decoder: Decoder {
                hidden1: Dense::zeros(h, d1),
                hidden2: Dense::zeros(d1, d2),
                head_adj: Dense::zeros(d2, n_nodes * n_nodes),
                head_feat: Dense::zeros(d2, n_nodes * n_features),
            },
        }
    }

    /// Glorot-uniform kernels, orthogonal recurrent blocks, zero biases with
    /// the LSTM forget-gate bias set to one.
    pub fn initialise(config: &NgarConfig, n_nodes: usize, n_features: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(config, n_nodes, n_features);
        let glorot = |w: &mut Array2<T>, rng: &mut ChaCha8Rng| {
            let (fan_in, fan_out) = w.dim();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            w.mapv_inplace(|_| cast(rng.gen_range(-limit..limit)));
        };
        glorot(&mut p.conv1.w, rng);
        glorot(&mut p.conv2.w, rng);
        glorot(&mut p.pool.gate.w, rng);
        glorot(&mut p.pool.proj.w, rng);
        for layer in [&mut p.lstm1, &mut p.lstm2] {
            let h = layer.units();
            // the input kernel is initialised as one Glorot matrix over all gates
            glorot(&mut layer.w_ih, rng);
            for gate in 0..4 {
                let q = random_orthogonal(h, rng).expect("h ≥ 1");
                for i in 0..h {
                    for j in 0..h {
                        layer.w_hh[[i, gate * h + j]] = cast(q[(i, j)]);
                    }
                }
            }
            layer.b.slice_mut(s![h..2 * h]).fill(T::one());
        }
        glorot(&mut p.decoder.hidden1.w, rng);
        glorot(&mut p.decoder.hidden2.w, rng);
        glorot(&mut p.decoder.head_adj.w, rng);
        glorot(&mut p.decoder.head_feat.w, rng);
        p
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, mut t) in z.tensors_mut() {
            t.fill(T::zero());
        }
        z
    }

    /// Named views of every tensor in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, T>)> {
        each_tensor!(self, view)
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, T>)> {
        each_tensor!(self, view_mut)
    }

    pub fn n_parameters(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        for (name, t) in self.tensors() {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite {what} in layer tensor {name}")));
            }
        }
        Ok(())
    }
}

/// Adam moments and step counter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub m: NgarParams<T>,
    pub v: NgarParams<T>,
    pub step: u64,
}

/// Network parameters, optimiser state and the configuration they were
/// built for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgarModel<T> {
    pub config: NgarConfig,
    pub n_nodes: usize,
    pub n_features: usize,
    pub params: NgarParams<T>,
    pub adam: AdamState<T>,
}

impl<T: Real> NgarModel<T> {
    /// Freshly initialised model for graphs with `n_nodes` nodes and
    /// `n_features` features, seeded from `config.seed`.
    pub fn new(config: NgarConfig, n_nodes: usize, n_features: usize) -> Result<Self> {
        config.validate()?;
        if n_nodes == 0 || n_features == 0 {
            return Err(Error::invalid("model needs N ≥ 1 and F ≥ 1"));
        }
        let mut rng = seeded_rng(config.seed, 0);
        let params = NgarParams::initialise(&config, n_nodes, n_features, &mut rng);
        Ok(Self::from_params(config, n_nodes, n_features, params))
    }

    pub fn from_params(config: NgarConfig, n_nodes: usize, n_features: usize, params: NgarParams<T>) -> Self {
        let zeros = params.zeros_like();
        Self {
            config,
            n_nodes,
            n_features,
            adam: AdamState {
                m: zeros.clone(),
                v: zeros,
                step: 0,
            },
            params,
        }
    }

    /// L2 penalty `λ·Σ w²` over the regularised kernels.
    pub fn l2_penalty(&self, l2_weight: f64) -> f64 {
        l2_penalty(&self.params, l2_weight)
    }

    pub(crate) fn check_store(&self, store: &GraphStore<T>) -> Result<()> {
        if store.n_nodes != self.n_nodes || store.n_features != self.n_features {
            return Err(Error::invalid(format!(
                "graphs have N = {}, F = {}; model expects N = {}, F = {}",
                store.n_nodes, store.n_features, self.n_nodes, self.n_features
            )));
        }
        Ok(())
    }

    /// Forward pass over the windows starting at `starts` (each `k` graphs long).
    pub(crate) fn forward_batch<'s>(&self, store: &'s GraphStore<T>, starts: &[usize]) -> Result<Forward<'s, T>> {
        self.check_store(store)?;
        let k = self.config.window;
        let b = starts.len();
        if b == 0 {
            return Err(Error::invalid("empty batch"));
        }
        if let Some(&bad) = starts.iter().find(|&&s| s + k > store.len()) {
            return Err(Error::invalid(format!("window starting at {bad} runs past the stored graphs")));
        }
        let (n, f) = (self.n_nodes, self.n_features);
        // graph rows are step-major: row block s·B + b holds step s of window b
        let order: Vec<usize> = (0..k).flat_map(|step| starts.iter().map(move |&st| st + step)).collect();
        let mut x = Array2::<T>::zeros((order.len() * n, f));
        for (g, &idx) in order.iter().enumerate() {
            let src = &store.features[idx * n * f..(idx + 1) * n * f];
            x.slice_mut(s![g * n..(g + 1) * n, ..])
                .as_slice_mut()
                .expect("standard layout")
                .copy_from_slice(src);
        }
        let blocks: Vec<&[T]> = order.iter().map(|&idx| store.a_norm(idx)).collect();

        let p = &self.params;
        let h1 = finite(gcn_forward_batch(&p.conv1, &x, &blocks, n)?, "conv1")?;
        let h2 = finite(gcn_forward_batch(&p.conv2, &h1, &blocks, n)?, "conv2")?;
        let (z, pool_cache) = gated_pool_forward_batch(&p.pool, &h2, n)?;
        let z = finite(z, "pool")?;
        let l1 = lstm_layer_forward(&p.lstm1, &z, b)?;
        check(&l1.hidden, "lstm1")?;
        let l2 = lstm_layer_forward(&p.lstm2, &l1.hidden, b)?;
        check(&l2.hidden, "lstm2")?;
        let last = l2.hidden.slice(s![(k - 1) * b.., ..]).to_owned();
        let dec = decoder_forward_batch(&p.decoder, &last)?;
        check(&dec.adj_prob, "decoder.head_adj")?;
        check(&dec.features, "decoder.head_feat")?;
        Ok(Forward {
            batch: b,
            x,
            blocks,
            h1,
            h2,
            pool_cache,
            z,
            l1,
            l2,
            dec,
        })
    }

    /// Reverse pass from gradients at the adjacency logits and feature outputs.
    pub(crate) fn backward_batch(
        &self,
        fwd: &Forward<'_, T>,
        d_logits: &Array2<T>,
        d_features: &Array2<T>,
    ) -> Result<NgarParams<T>> {
        let p = &self.params;
        let n = self.n_nodes;
        let b = fwd.batch;
        let k = self.config.window;
        let (g_dec, dh_last) = decoder_backward_batch(&p.decoder, &fwd.dec, d_logits, d_features);
        let mut d_hidden2 = Array2::<T>::zeros(fwd.l2.hidden.dim());
        d_hidden2.slice_mut(s![(k - 1) * b.., ..]).assign(&dh_last);
        let (g_l2, d_hidden1) = lstm_layer_backward(&p.lstm2, &fwd.l1.hidden, &fwd.l2, &d_hidden2);
        let (g_l1, dz) = lstm_layer_backward(&p.lstm1, &fwd.z, &fwd.l1, &d_hidden1);
        let (g_pool, dh2) = gated_pool_backward_batch(&p.pool, &fwd.h2, n, &fwd.pool_cache, &dz);
        let (g_c2, dh1) = gcn_backward_batch(&p.conv2, &fwd.h1, &fwd.blocks, n, &fwd.h2, &dh2);
        let (g_c1, _) = gcn_backward_batch(&p.conv1, &fwd.x, &fwd.blocks, n, &fwd.h1, &dh1);
        Ok(NgarParams {
            conv1: g_c1,
            conv2: g_c2,
            pool: g_pool,
            lstm1: g_l1,
            lstm2: g_l2,
            decoder: g_dec,
        })
    }

    /// Mean loss over the batch (plus the L2 term) and its gradient.
    pub(crate) fn loss_and_gradient(
        &self,
        store: &GraphStore<T>,
        starts: &[usize],
    ) -> Result<(LossBreakdown, NgarParams<T>)> {
        let fwd = self.forward_batch(store, starts)?;
        let targets: Vec<usize> = starts.iter().map(|s| s + self.config.window).collect();
        let (mut loss, d_logits, d_features) = batch_loss(&fwd.dec, store, &targets, true)?;
        let mut grads = self.backward_batch(&fwd, &d_logits, &d_features)?;
        let lambda = self.config.l2_weight;
        loss.l2 = self.l2_penalty(lambda);
        loss.total += loss.l2;
        if lambda > 0.0 {
            let two_lambda: T = cast(2.0 * lambda);
            let params = self.params.tensors();
            for (name, mut g) in grads.tensors_mut() {
                if REGULARISED.contains(&name) {
                    let w = &params.iter().find(|(n, _)| *n == name).expect("same layout").1;
                    g.scaled_add(two_lambda, w);
                }
            }
        }
        grads.check_finite("gradient")?;
        Ok((loss, grads))
    }

    /// Loss breakdown and adjacency accuracy over the windows at `starts`,
    /// evaluated in chunks of the configured batch size.
    pub fn evaluate_windows(&self, store: &GraphStore<T>, starts: &[usize]) -> Result<NgarMetrics> {
        let mut mse = 0.0;
        let mut bce = 0.0;
        let mut correct = 0usize;
        let mut entries = 0usize;
        let threshold = self.config.adjacency_threshold;
        for chunk in starts.chunks(self.config.batch_size) {
            let fwd = self.forward_batch(store, chunk)?;
            let targets: Vec<usize> = chunk.iter().map(|s| s + self.config.window).collect();
            let (loss, _, _) = batch_loss(&fwd.dec, store, &targets, false)?;
            mse += loss.feature_mse * chunk.len() as f64;
            bce += loss.adjacency_logloss * chunk.len() as f64;
            for (row, &t) in targets.iter().enumerate() {
                let probs: Vec<f64> = fwd.dec.adj_prob.row(row).iter().map(|&v| widen(v)).collect();
                let a = threshold_adjacency(&probs, self.n_nodes, false, threshold);
                let truth = store.adjacency(t);
                correct += a.iter().zip(truth).filter(|(p, t)| f64::from(**p) == widen(**t)).count();
                entries += a.len();
            }
        }
        let count = starts.len().max(1) as f64;
        let l2 = self.l2_penalty(self.config.l2_weight);
        Ok(NgarMetrics {
            loss: mse / count + bce / count + l2,
            feature_mse: mse / count,
            adjacency_logloss: bce / count,
            adjacency_accuracy: if entries == 0 { 0.0 } else { correct as f64 / entries as f64 },
        })
    }

    /// Predictions for the windows at `starts`.
    pub fn predict_windows(&self, store: &GraphStore<T>, starts: &[usize]) -> Result<Vec<Prediction>> {
        let mut out = Vec::with_capacity(starts.len());
        for chunk in starts.chunks(self.config.batch_size) {
            let fwd = self.forward_batch(store, chunk)?;
            for row in 0..chunk.len() {
                out.push(Prediction {
                    adj_prob: fwd.dec.adj_prob.row(row).iter().map(|&v| widen(v)).collect(),
                    features: fwd.dec.features.row(row).iter().map(|&v| widen(v)).collect(),
                });
            }
        }
        Ok(out)
    }

    /// Thresholded graph from a raw prediction.
    pub fn to_graph(&self, prediction: &Prediction) -> Result<AttributedGraph> {
        let a = threshold_adjacency(
            &prediction.adj_prob,
            self.n_nodes,
            false,
            self.config.adjacency_threshold,
        );
        AttributedGraph::new(self.n_nodes, self.n_features, prediction.features.clone(), a)
    }
}

/// Raw network output for one window: row-major edge probabilities (`N²`)
/// and node features (`N·F`).
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub adj_prob: Vec<f64>,
    pub features: Vec<f64>,
}

/// Test-set metrics reported for the network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgarMetrics {
    /// Feature MSE + adjacency log-loss + L2 penalty.
    pub loss: f64,
    pub feature_mse: f64,
    pub adjacency_logloss: f64,
    /// Fraction of the `N²` adjacency entries predicted correctly after thresholding.
    pub adjacency_accuracy: f64,
}

fn check<T: Real>(a: &Array2<T>, layer: &str) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite activation at layer {layer}")));
    }
    Ok(())
}

fn finite<T: Real>(a: Array2<T>, layer: &str) -> Result<Array2<T>> {
    check(&a, layer)?;
    Ok(a)
}

/// Cached activations of one forward pass.
pub(crate) struct Forward<'s, T> {
    batch: usize,
    x: Array2<T>,
    blocks: Vec<&'s [T]>,
    h1: Array2<T>,
    h2: Array2<T>,
    pool_cache: PoolCache<T>,
    z: Array2<T>,
    l1: LstmCache<T>,
    l2: LstmCache<T>,
    pub(crate) dec: DecoderCache<T>,
}

/// Graphs converted once into network-ready arrays: features, normalised
/// adjacency and the raw adjacency as targets.
#[derive(Clone, Debug)]
pub struct GraphStore<T> {
    n_nodes: usize,
    n_features: usize,
    len: usize,
    features: Vec<T>,
    a_norm: Vec<T>,
    adjacency: Vec<T>,
}

impl<T: Real> GraphStore<T> {
    pub fn new(graphs: &[AttributedGraph]) -> Result<Self> {
        let first = graphs.first().ok_or_else(|| Error::invalid("no graphs to store"))?;
        let (n, f) = (first.n_nodes(), first.n_features());
        let mut features = Vec::with_capacity(graphs.len() * n * f);
        let mut a_norm = Vec::with_capacity(graphs.len() * n * n);
        let mut adjacency = Vec::with_capacity(graphs.len() * n * n);
        for (t, g) in graphs.iter().enumerate() {
            if g.n_nodes() != n || g.n_features() != f {
                return Err(Error::invalid(format!("graph {t} differs in shape from graph 0")));
            }
            features.extend(g.features().iter().map(|&v| cast::<T>(v)));
            a_norm.extend(normalize_adjacency::<T>(g.adjacency(), n).iter().copied());
            adjacency.extend(g.adjacency().iter().map(|&a| cast::<T>(f64::from(a))));
        }
        Ok(Self {
            n_nodes: n,
            n_features: f,
            len: graphs.len(),
            features,
            a_norm,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn a_norm(&self, t: usize) -> &[T] {
        let nn = self.n_nodes * self.n_nodes;
        &self.a_norm[t * nn..(t + 1) * nn]
    }

    pub(crate) fn adjacency(&self, t: usize) -> &[T] {
        let nn = self.n_nodes * self.n_nodes;
        &self.adjacency[t * nn..(t + 1) * nn]
    }

    pub(crate) fn features(&self, t: usize) -> &[T] {
        let nf = self.n_nodes * self.n_features;
        &self.features[t * nf..(t + 1) * nf]
    }
}

fn window_store<T: Real>(model: &NgarModel<T>, window: &[AttributedGraph]) -> Result<GraphStore<T>> {
    if window.len() != model.config.window {
        return Err(Error::invalid(format!(
            "window holds {} graphs, model expects k = {}",
            window.len(),
            model.config.window
        )));
    }
    GraphStore::new(window)
}

/// Edge probabilities (`N × N`) and node features (`N × F`) predicted for
/// the graph following `window`.
pub fn ngar_forward<T: Real>(model: &NgarModel<T>, window: &[AttributedGraph]) -> Result<(Array2<T>, Array2<T>)> {
    let store = window_store(model, window)?;
    let fwd = model.forward_batch(&store, &[0])?;
    let (n, f) = (model.n_nodes, model.n_features);
    let a = fwd.dec.adj_prob.row(0).to_owned().into_shape_with_order((n, n)).expect("N²");
    let x = fwd.dec.features.row(0).to_owned().into_shape_with_order((n, f)).expect("N·F");
    Ok((a, x))
}

/// Gradient of the single-window loss (with the configured L2 weight)
/// with respect to every parameter.
pub fn ngar_backward<T: Real>(
    model: &NgarModel<T>,
    window: &[AttributedGraph],
    target: &AttributedGraph,
) -> Result<NgarParams<T>> {
    let mut graphs = window.to_vec();
    graphs.push(target.clone());
    if window.len() != model.config.window {
        return Err(Error::invalid(format!(
            "window holds {} graphs, model expects k = {}",
            window.len(),
            model.config.window
        )));
    }
    let store = GraphStore::new(&graphs)?;
    let (_, grads) = model.loss_and_gradient(&store, &[0])?;
    Ok(grads)
}

/// Predicted next graph with the adjacency thresholded (pair-mean
/// symmetrisation, empty diagonal).
pub fn ngar_predict<T: Real>(model: &NgarModel<T>, window: &[AttributedGraph]) -> Result<AttributedGraph> {
    let store = window_store(model, window)?;
    let pred = model.predict_windows(&store, &[0])?.remove(0);
    model.to_graph(&pred)
}

/// Pooled embedding of each graph (rows), as fed to the recurrent block.
pub fn graph_embeddings<T: Real>(model: &NgarModel<T>, graphs: &[AttributedGraph]) -> Result<Array2<T>> {
    let store = GraphStore::new(graphs)?;
    model.check_store(&store)?;
    let n = model.n_nodes;
    let blocks: Vec<&[T]> = (0..store.len()).map(|t| store.a_norm(t)).collect();
    let x = Array2::from_shape_vec((store.len() * n, model.n_features), store.features.clone())
        .expect("stored features are (len·N) × F");
    let h1 = gcn_forward_batch(&model.params.conv1, &x, &blocks, n)?;
    let h2 = gcn_forward_batch(&model.params.conv2, &h1, &blocks, n)?;
    Ok(gated_pool_forward_batch(&model.params.pool, &h2, n)?.0)
}
