//! Neural graph autoregression.
//!
//! The predictor composes three blocks trained end to end:
//!
//! 1. two graph convolutions followed by gated global pooling, applied with
//!    shared weights to each of the `k` graphs of the input window;
//! 2. a two-layer LSTM over the resulting sequence of graph embeddings;
//! 3. a dense decoder with a sigmoid adjacency head and a linear feature head.
//!
//! Gradients are computed by explicit reverse passes through each layer and
//! parameters are updated with Adam. The code is generic over the scalar
//! type: training normally runs in `f32`, gradient checks in `f64`.

pub mod adam;
pub mod checkpoint;
mod config;
pub mod layers;
pub mod loss;
mod model;
pub mod train;

pub use adam::adam_step;
pub use checkpoint::{load_checkpoint, save_checkpoint, NamedTensor};
pub use config::NgarConfig;
pub use layers::{decode_heads, gated_pool_forward, gcn_forward, lstm_forward, normalize_adjacency};
pub use loss::{ngar_loss, LossBreakdown};
pub use model::{
    graph_embeddings, ngar_backward, ngar_forward, ngar_predict, GraphStore, NgarMetrics, NgarModel, NgarParams, Prediction, AdamState,
};
pub use train::{train, train_with_callback, EpochRecord, TrainHistory};

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the network.
pub trait Real:
    LinalgScalar
    + Float
    + ScalarOperand
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Name stored in checkpoints.
    const DTYPE: &'static str;
}

impl Real for f32 {
    const DTYPE: &'static str = "f32";
}

impl Real for f64 {
    const DTYPE: &'static str = "f64";
}

#[inline]
pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite value representable in the scalar type")
}

#[inline]
pub(crate) fn widen<T: Real>(x: T) -> f64 {
    x.to_f64().expect("float widens to f64")
}
