//! Layer primitives with hand-written reverse passes.
//!
//! Every layer works on a batch. Graph-level layers take a stack of `G`
//! graphs of `N` nodes as a `(G·N) × C` matrix plus one normalised adjacency
//! block per graph; the recurrent layer takes a step-major `(k·B) × C`
//! matrix whose rows `s·B .. (s+1)·B` hold time step `s` of all `B` windows.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use super::Real;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[inline]
fn relu<T: Real>(x: T) -> T {
    // NaN passes through so that it is caught downstream
    if x <= T::zero() {
        T::zero()
    } else {
        x
    }
}

/// Affine map `x·W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense<T> {
    pub w: Array2<T>,
    pub b: Array1<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn apply(&self, x: &ArrayView2<T>) -> Array2<T> {
        let mut out = x.dot(&self.w);
        out += &self.b;
        out
    }

    /// Gradients of `x·W + b` given the upstream gradient `dy`; returns the
    /// parameter gradient and `dx`.
    pub fn backward(&self, x: &ArrayView2<T>, dy: &ArrayView2<T>) -> (Dense<T>, Array2<T>) {
        let grad = Dense {
            w: x.t().dot(dy),
            b: dy.sum_axis(Axis(0)),
        };
        (grad, dy.dot(&self.w.t()))
    }

    fn check_input(&self, cols: usize, layer: &str) -> Result<()> {
        if cols != self.fan_in() {
            return Err(Error::invalid(format!(
                "{layer}: input has {cols} columns, layer expects {}",
                self.fan_in()
            )));
        }
        Ok(())
    }
}

/// Symmetrically normalised adjacency with self-loops,
/// `D̃^{−1/2} (A + I) D̃^{−1/2}` with `D̃` the degree matrix of `A + I`.
pub fn normalize_adjacency<T: Real>(adjacency: &[u8], n: usize) -> Array2<T> {
    let mut deg = vec![0usize; n];
    for i in 0..n {
        deg[i] = 1 + (0..n).filter(|&j| adjacency[i * n + j] != 0).count();
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let a = if i == j { 1.0 } else { f64::from(adjacency[i * n + j]) };
        super::cast(a * inv_sqrt[i] * inv_sqrt[j])
    })
}

/// `out[g·N + i] = Σ_j Â_g[i, j]·m[g·N + j]`, or with `Â_gᵀ` when `transpose`.
fn aggregate<T: Real>(blocks: &[&[T]], n: usize, m: &Array2<T>, transpose: bool) -> Array2<T> {
    let c = m.ncols();
    let mut out = Array2::<T>::zeros((blocks.len() * n, c));
    for (g, a) in blocks.iter().enumerate() {
        for i in 0..n {
            let mut row = out.row_mut(g * n + i);
            for j in 0..n {
                let coef = if transpose { a[j * n + i] } else { a[i * n + j] };
                if coef != T::zero() {
                    row.scaled_add(coef, &m.row(g * n + j));
                }
            }
        }
    }
    out
}

/// Graph convolution `ReLU(Â·X·W + b)` over a stack of graphs.
pub fn gcn_forward_batch<T: Real>(layer: &Dense<T>, x: &Array2<T>, blocks: &[&[T]], n: usize) -> Result<Array2<T>> {
    layer.check_input(x.ncols(), "graph convolution")?;
    if x.nrows() != blocks.len() * n {
        return Err(Error::invalid("graph convolution: node rows do not match adjacency blocks"));
    }
    let mut out = aggregate(blocks, n, &x.dot(&layer.w), false);
    out += &layer.b;
    out.mapv_inplace(relu);
    Ok(out)
}

/// Reverse pass of [`gcn_forward_batch`]; `out` is the forward output.
pub fn gcn_backward_batch<T: Real>(
    layer: &Dense<T>,
    x: &Array2<T>,
    blocks: &[&[T]],
    n: usize,
    out: &Array2<T>,
    d_out: &Array2<T>,
) -> (Dense<T>, Array2<T>) {
    let mut dz = d_out.clone();
    Zip::from(&mut dz).and(out).for_each(|d, &o| {
        if o <= T::zero() {
            *d = T::zero();
        }
    });
    let db = dz.sum_axis(Axis(0));
    let dm = aggregate(blocks, n, &dz, true);
    let grad = Dense {
        w: x.t().dot(&dm),
        b: db,
    };
    let dx = dm.dot(&layer.w.t());
    (grad, dx)
}

/// Single-graph convolution `ReLU(Â·X·W + b)`.
pub fn gcn_forward<T: Real>(x: &Array2<T>, a_norm: &Array2<T>, w: &Array2<T>, b: &Array1<T>) -> Result<Array2<T>> {
    let n = x.nrows();
    if a_norm.dim() != (n, n) {
        return Err(Error::invalid("graph convolution: adjacency must be N × N"));
    }
    if b.len() != w.ncols() {
        return Err(Error::invalid("graph convolution: bias length differs from output width"));
    }
    let layer = Dense {
        w: w.clone(),
        b: b.clone(),
    };
    let a = a_norm.as_standard_layout();
    gcn_forward_batch(&layer, x, &[a.as_slice().expect("standard layout")], n)
}

/// Soft-attention readout: `Σ_v σ(h_v·W_g + b_g) ⊙ (h_v·W_p + b_p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatedPool<T> {
    pub gate: Dense<T>,
    pub proj: Dense<T>,
}

/// Per-node gate activations and projections kept for the reverse pass.
pub struct PoolCache<T> {
    gates: Array2<T>,
    projections: Array2<T>,
}

pub fn gated_pool_forward_batch<T: Real>(
    pool: &GatedPool<T>,
    h: &Array2<T>,
    n: usize,
) -> Result<(Array2<T>, PoolCache<T>)> {
    pool.gate.check_input(h.ncols(), "gated pooling")?;
    pool.proj.check_input(h.ncols(), "gated pooling")?;
    if n == 0 || h.nrows() % n != 0 {
        return Err(Error::invalid("gated pooling: node rows are not a multiple of N"));
    }
    let hv = h.view();
    let mut gates = pool.gate.apply(&hv);
    gates.mapv_inplace(sigmoid);
    let projections = pool.proj.apply(&hv);
    let graphs = h.nrows() / n;
    let c = pool.proj.fan_out();
    let mut out = Array2::<T>::zeros((graphs, c));
    for g in 0..graphs {
        let mut row = out.row_mut(g);
        for v in g * n..(g + 1) * n {
            Zip::from(&mut row)
                .and(gates.row(v))
                .and(projections.row(v))
                .for_each(|o, &s, &p| *o += s * p);
        }
    }
    Ok((out, PoolCache { gates, projections }))
}

pub fn gated_pool_backward_batch<T: Real>(
    pool: &GatedPool<T>,
    h: &Array2<T>,
    n: usize,
    cache: &PoolCache<T>,
    d_out: &Array2<T>,
) -> (GatedPool<T>, Array2<T>) {
    let rows = h.nrows();
    let mut d_gate = Array2::<T>::zeros((rows, pool.gate.fan_out()));
    let mut d_proj = Array2::<T>::zeros((rows, pool.proj.fan_out()));
    for v in 0..rows {
        let dz = d_out.row(v / n);
        Zip::from(d_gate.row_mut(v))
            .and(d_proj.row_mut(v))
            .and(cache.gates.row(v))
            .and(cache.projections.row(v))
            .and(dz)
            .for_each(|dg, dp, &s, &p, &d| {
                *dg = d * p * s * (T::one() - s);
                *dp = d * s;
            });
    }
    let hv = h.view();
    let (g_gate, dh_gate) = pool.gate.backward(&hv, &d_gate.view());
    let (g_proj, dh_proj) = pool.proj.backward(&hv, &d_proj.view());
    (
        GatedPool {
            gate: g_gate,
            proj: g_proj,
        },
        dh_gate + dh_proj,
    )
}

/// Single-graph gated pooling of `H` (`N × C`).
pub fn gated_pool_forward<T: Real>(h: &Array2<T>, pool: &GatedPool<T>) -> Result<Array1<T>> {
    let (out, _) = gated_pool_forward_batch(pool, h, h.nrows())?;
    Ok(out.row(0).to_owned())
}

/// One LSTM layer; gate blocks are ordered input, forget, candidate, output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmLayer<T> {
    /// `C_in × 4H`
    pub w_ih: Array2<T>,
    /// `H × 4H`
    pub w_hh: Array2<T>,
    /// `4H`
    pub b: Array1<T>,
}

impl<T: Real> LstmLayer<T> {
    pub fn zeros(input: usize, units: usize) -> Self {
        Self {
            w_ih: Array2::zeros((input, 4 * units)),
            w_hh: Array2::zeros((units, 4 * units)),
            b: Array1::zeros(4 * units),
        }
    }

    pub fn units(&self) -> usize {
        self.w_hh.nrows()
    }
}

/// Activations of one LSTM layer over a step-major batch.
pub struct LstmCache<T> {
    batch: usize,
    /// post-nonlinearity gates `[i | f | g | o]`, `(k·B) × 4H`
    acts: Array2<T>,
    cells: Array2<T>,
    tanh_cells: Array2<T>,
    /// hidden states, `(k·B) × H`
    pub hidden: Array2<T>,
}

pub fn lstm_layer_forward<T: Real>(layer: &LstmLayer<T>, inputs: &Array2<T>, batch: usize) -> Result<LstmCache<T>> {
    if inputs.ncols() != layer.w_ih.nrows() {
        return Err(Error::invalid(format!(
            "LSTM: input width {} differs from layer input {}",
            inputs.ncols(),
            layer.w_ih.nrows()
        )));
    }
    if batch == 0 || inputs.nrows() == 0 || inputs.nrows() % batch != 0 {
        return Err(Error::invalid("LSTM: sequence rows are not a positive multiple of the batch"));
    }
    let steps = inputs.nrows() / batch;
    let hu = layer.units();
    let mut acts = inputs.dot(&layer.w_ih);
    acts += &layer.b;
    let mut cells = Array2::<T>::zeros((inputs.nrows(), hu));
    let mut tanh_cells = Array2::<T>::zeros((inputs.nrows(), hu));
    let mut hidden = Array2::<T>::zeros((inputs.nrows(), hu));

    for step in 0..steps {
        let rows = step * batch..(step + 1) * batch;
        if step > 0 {
            let prev = (step - 1) * batch..step * batch;
            let h_prev = hidden.slice(s![prev, ..]);
            let mut a = acts.slice_mut(s![rows.clone(), ..]);
            ndarray::linalg::general_mat_mul(T::one(), &h_prev, &layer.w_hh, T::one(), &mut a);
        }
        for r in rows.clone() {
            let mut a = acts.row_mut(r);
            for j in 0..hu {
                a[j] = sigmoid(a[j]);
                a[hu + j] = sigmoid(a[hu + j]);
                a[2 * hu + j] = a[2 * hu + j].tanh();
                a[3 * hu + j] = sigmoid(a[3 * hu + j]);
            }
            for j in 0..hu {
                let c_prev = if step > 0 { cells[[r - batch, j]] } else { T::zero() };
                let c = a[hu + j] * c_prev + a[j] * a[2 * hu + j];
                let tc = c.tanh();
                cells[[r, j]] = c;
                tanh_cells[[r, j]] = tc;
                hidden[[r, j]] = a[3 * hu + j] * tc;
            }
        }
    }
    Ok(LstmCache {
        batch,
        acts,
        cells,
        tanh_cells,
        hidden,
    })
}

/// Backpropagation through time for one layer. `d_hidden` holds the
/// gradient arriving at every hidden state from above (zero rows allowed);
/// returns parameter gradients and the gradient with respect to the inputs.
pub fn lstm_layer_backward<T: Real>(
    layer: &LstmLayer<T>,
    inputs: &Array2<T>,
    cache: &LstmCache<T>,
    d_hidden: &Array2<T>,
) -> (LstmLayer<T>, Array2<T>) {
    let batch = cache.batch;
    let steps = inputs.nrows() / batch;
    let hu = layer.units();
    let mut d_pre = Array2::<T>::zeros(cache.acts.dim());
    let mut d_w_hh = Array2::<T>::zeros(layer.w_hh.dim());
    let mut dh_next = Array2::<T>::zeros((batch, hu));
    let mut dc_next = Array2::<T>::zeros((batch, hu));

    for step in (0..steps).rev() {
        let base = step * batch;
        for b in 0..batch {
            let r = base + b;
            let a = cache.acts.row(r);
            let mut dp = d_pre.row_mut(r);
            for j in 0..hu {
                let dh = d_hidden[[r, j]] + dh_next[[b, j]];
                let (i, f, g, o) = (a[j], a[hu + j], a[2 * hu + j], a[3 * hu + j]);
                let tc = cache.tanh_cells[[r, j]];
                let dc = dh * o * (T::one() - tc * tc) + dc_next[[b, j]];
                let c_prev = if step > 0 { cache.cells[[r - batch, j]] } else { T::zero() };
                dp[j] = dc * g * i * (T::one() - i);
                dp[hu + j] = dc * c_prev * f * (T::one() - f);
                dp[2 * hu + j] = dc * i * (T::one() - g * g);
                dp[3 * hu + j] = dh * tc * o * (T::one() - o);
                dc_next[[b, j]] = dc * f;
            }
        }
        let dp_step = d_pre.slice(s![base..base + batch, ..]);
        if step > 0 {
            let h_prev = cache.hidden.slice(s![base - batch..base, ..]);
            ndarray::linalg::general_mat_mul(T::one(), &h_prev.t(), &dp_step, T::one(), &mut d_w_hh);
            dh_next = dp_step.dot(&layer.w_hh.t());
        }
    }
    let grad = LstmLayer {
        w_ih: inputs.t().dot(&d_pre),
        w_hh: d_w_hh,
        b: d_pre.sum_axis(Axis(0)),
    };
    let d_inputs = d_pre.dot(&layer.w_ih.t());
    (grad, d_inputs)
}

/// Runs stacked LSTM layers over a single `k × C` sequence from zero state
/// and returns the last layer's final hidden state.
pub fn lstm_forward<T: Real>(sequence: &Array2<T>, layers: &[LstmLayer<T>]) -> Result<Array1<T>> {
    if sequence.nrows() == 0 {
        return Err(Error::invalid("LSTM: empty sequence"));
    }
    let mut x = sequence.clone();
    for layer in layers {
        x = lstm_layer_forward(layer, &x, 1)?.hidden;
    }
    Ok(x.row(x.nrows() - 1).to_owned())
}

/// Two hidden ReLU layers followed by a sigmoid adjacency head and a linear
/// feature head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoder<T> {
    pub hidden1: Dense<T>,
    pub hidden2: Dense<T>,
    pub head_adj: Dense<T>,
    pub head_feat: Dense<T>,
}

pub struct DecoderCache<T> {
    input: Array2<T>,
    h1: Array2<T>,
    h2: Array2<T>,
    /// Edge probabilities, `B × N²`.
    pub adj_prob: Array2<T>,
    /// Node features, `B × N·F`.
    pub features: Array2<T>,
}

pub fn decoder_forward_batch<T: Real>(dec: &Decoder<T>, h: &Array2<T>) -> Result<DecoderCache<T>> {
    dec.hidden1.check_input(h.ncols(), "decoder")?;
    let mut h1 = dec.hidden1.apply(&h.view());
    h1.mapv_inplace(relu);
    let mut h2 = dec.hidden2.apply(&h1.view());
    h2.mapv_inplace(relu);
    let mut adj_prob = dec.head_adj.apply(&h2.view());
    adj_prob.mapv_inplace(sigmoid);
    let features = dec.head_feat.apply(&h2.view());
    Ok(DecoderCache {
        input: h.clone(),
        h1,
        h2,
        adj_prob,
        features,
    })
}

/// Reverse pass given gradients with respect to the adjacency-head
/// pre-activations (`d_logits`) and the feature head output.
pub fn decoder_backward_batch<T: Real>(
    dec: &Decoder<T>,
    cache: &DecoderCache<T>,
    d_logits: &Array2<T>,
    d_features: &Array2<T>,
) -> (Decoder<T>, Array2<T>) {
    let h2v = cache.h2.view();
    let (g_adj, dh2_a) = dec.head_adj.backward(&h2v, &d_logits.view());
    let (g_feat, dh2_f) = dec.head_feat.backward(&h2v, &d_features.view());
    let mut dh2 = dh2_a + dh2_f;
    Zip::from(&mut dh2).and(&cache.h2).for_each(|d, &o| {
        if o <= T::zero() {
            *d = T::zero();
        }
    });
    let (g2, mut dh1) = dec.hidden2.backward(&cache.h1.view(), &dh2.view());
    Zip::from(&mut dh1).and(&cache.h1).for_each(|d, &o| {
        if o <= T::zero() {
            *d = T::zero();
        }
    });
    let (g1, dh) = dec.hidden1.backward(&cache.input.view(), &dh1.view());
    (
        Decoder {
            hidden1: g1,
            hidden2: g2,
            head_adj: g_adj,
            head_feat: g_feat,
        },
        dh,
    )
}

/// Decodes one hidden vector into `(A_prob, X̂)` of shapes `N × N` and `N × F`.
pub fn decode_heads<T: Real>(h: &Array1<T>, dec: &Decoder<T>, n: usize, f: usize) -> Result<(Array2<T>, Array2<T>)> {
    if dec.head_adj.fan_out() != n * n || dec.head_feat.fan_out() != n * f {
        return Err(Error::invalid("decoder heads do not match N and F"));
    }
    let input = h.clone().insert_axis(Axis(0));
    let cache = decoder_forward_batch(dec, &input)?;
    let a = cache.adj_prob.into_shape_with_order((n, n)).expect("N² entries");
    let x = cache.features.into_shape_with_order((n, f)).expect("N·F entries");
    Ok((a, x))
}
