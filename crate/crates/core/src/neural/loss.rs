//! Training objective: feature MSE + adjacency binary cross-entropy + L2.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::layers::DecoderCache;
use super::model::{GraphStore, NgarParams, REGULARISED};
use super::{cast, widen, Real};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Probabilities are clipped to `[ε, 1 − ε]` inside the log-loss.
pub const LOG_CLIP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean squared error over the `N·F` feature entries.
    pub feature_mse: f64,
    /// Mean binary cross-entropy over the `N²` adjacency entries.
    pub adjacency_logloss: f64,
    pub l2: f64,
}

fn bce(p: f64, a: f64) -> f64 {
    let q = p.clamp(LOG_CLIP, 1.0 - LOG_CLIP);
    -(a * q.ln() + (1.0 - a) * (1.0 - q).ln())
}

/// `λ·Σ w²` over the convolution and hidden dense kernels.
pub(crate) fn l2_penalty<T: Real>(params: &NgarParams<T>, l2_weight: f64) -> f64 {
    if l2_weight == 0.0 {
        return 0.0;
    }
    let sum: f64 = params
        .tensors()
        .iter()
        .filter(|(name, _)| REGULARISED.contains(name))
        .flat_map(|(_, t)| t.iter().map(|&v| widen(v).powi(2)))
        .sum();
    l2_weight * sum
}

/// Loss of one prediction against `target`, including the L2 term of `params`.
pub fn ngar_loss<T: Real>(
    adj_prob: &Array2<T>,
    features: &Array2<T>,
    target: &AttributedGraph,
    params: &NgarParams<T>,
    l2_weight: f64,
) -> Result<LossBreakdown> {
    let (n, f) = (target.n_nodes(), target.n_features());
    if adj_prob.len() != n * n || features.len() != n * f {
        return Err(Error::invalid("prediction shape does not match the target graph"));
    }
    let mse = features
        .iter()
        .zip(target.features())
        .map(|(&x, &y)| (widen(x) - y).powi(2))
        .sum::<f64>()
        / (n * f) as f64;
    let logloss = adj_prob
        .iter()
        .zip(target.adjacency())
        .map(|(&p, &a)| bce(widen(p), f64::from(a)))
        .sum::<f64>()
        / (n * n) as f64;
    let l2 = l2_penalty(params, l2_weight);
    Ok(LossBreakdown {
        total: mse + logloss + l2,
        feature_mse: mse,
        adjacency_logloss: logloss,
        l2,
    })
}

/// Batch-mean data loss (no L2) and, when `with_grad`, its gradients with
/// respect to the adjacency logits and the feature outputs.
pub(crate) fn batch_loss<T: Real>(
    dec: &DecoderCache<T>,
    store: &GraphStore<T>,
    targets: &[usize],
    with_grad: bool,
) -> Result<(LossBreakdown, Array2<T>, Array2<T>)> {
    let b = targets.len();
    let (nn, nf) = (dec.adj_prob.ncols(), dec.features.ncols());
    let shape = |cols| if with_grad { (b, cols) } else { (0, 0) };
    let mut d_logits = Array2::<T>::zeros(shape(nn));
    let mut d_features = Array2::<T>::zeros(shape(nf));
    let (mut mse, mut logloss) = (0.0, 0.0);
    let adj_scale = 1.0 / (nn * b) as f64;
    let feat_scale = 2.0 / (nf * b) as f64;
    for (row, &t) in targets.iter().enumerate() {
        let truth_a = store.adjacency(t);
        let truth_x = store.features(t);
        for (j, (&p, &a)) in dec.adj_prob.row(row).iter().zip(truth_a).enumerate() {
            let (p, a) = (widen(p), widen(a));
            logloss += bce(p, a);
            if with_grad && p > LOG_CLIP && p < 1.0 - LOG_CLIP {
                d_logits[[row, j]] = cast((p - a) * adj_scale);
            }
        }
        for (j, (&x, &y)) in dec.features.row(row).iter().zip(truth_x).enumerate() {
            let diff = widen(x) - widen(y);
            mse += diff * diff;
            if with_grad {
                d_features[[row, j]] = cast(diff * feat_scale);
            }
        }
    }
    let feature_mse = mse / (nf * b) as f64;
    let adjacency_logloss = logloss / (nn * b) as f64;
    if !feature_mse.is_finite() || !adjacency_logloss.is_finite() {
        return Err(Error::Numerical("non-finite loss at the decoder output".into()));
    }
    Ok((
        LossBreakdown {
            total: feature_mse + adjacency_logloss,
            feature_mse,
            adjacency_logloss,
            l2: 0.0,
        },
        d_logits,
        d_features,
    ))
}
