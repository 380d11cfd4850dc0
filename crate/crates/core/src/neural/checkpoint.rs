//! JSON checkpoints of a model: configuration, named tensors and Adam state.
//!
//! Values are stored as `f64` with round-trip formatting, so a save/load
//! cycle reproduces `f32` and `f64` parameters bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{AdamState, NgarParams};
use super::{cast, widen, NgarConfig, NgarModel, Real};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    dtype: String,
    config: NgarConfig,
    n_nodes: usize,
    n_features: usize,
    adam_step: u64,
    params: Vec<NamedTensor>,
    adam_m: Vec<NamedTensor>,
    adam_v: Vec<NamedTensor>,
}

fn export<T: Real>(p: &NgarParams<T>) -> Vec<NamedTensor> {
    p.tensors()
        .into_iter()
        .map(|(name, t)| NamedTensor {
            name: name.to_string(),
            shape: t.shape().to_vec(),
            values: t.iter().map(|&v| widen(v)).collect(),
        })
        .collect()
}

fn import<T: Real>(into: &mut NgarParams<T>, tensors: &[NamedTensor]) -> Result<()> {
    let slots = into.tensors_mut();
    if slots.len() != tensors.len() {
        return Err(Error::invalid(format!(
            "checkpoint holds {} tensors, model has {}",
            tensors.len(),
            slots.len()
        )));
    }
    for ((name, mut slot), stored) in slots.into_iter().zip(tensors) {
        if stored.name != name || stored.shape != slot.shape() || stored.values.len() != slot.len() {
            return Err(Error::invalid(format!(
                "checkpoint tensor {} {:?} does not match model tensor {name} {:?}",
                stored.name,
                stored.shape,
                slot.shape()
            )));
        }
        for (dst, &v) in slot.iter_mut().zip(&stored.values) {
            *dst = cast(v);
        }
    }
    Ok(())
}

pub fn save_checkpoint<T: Real>(model: &NgarModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let ckpt = Checkpoint {
        dtype: T::DTYPE.to_string(),
        config: model.config.clone(),
        n_nodes: model.n_nodes,
        n_features: model.n_features,
        adam_step: model.adam.step,
        params: export(&model.params),
        adam_m: export(&model.adam.m),
        adam_v: export(&model.adam.v),
    };
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &ckpt).map_err(|e| Error::invalid(format!("serialising checkpoint: {e}")))?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint<T: Real>(path: impl AsRef<Path>) -> Result<NgarModel<T>> {
    let path = path.as_ref();
    let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if ckpt.dtype != T::DTYPE {
        return Err(Error::invalid(format!(
            "checkpoint stores {} parameters, requested {}",
            ckpt.dtype,
            T::DTYPE
        )));
    }
    ckpt.config.validate()?;
    let mut params = NgarParams::zeros(&ckpt.config, ckpt.n_nodes, ckpt.n_features);
    import(&mut params, &ckpt.params)?;
    let mut m = params.zeros_like();
    let mut v = params.zeros_like();
    import(&mut m, &ckpt.adam_m)?;
    import(&mut v, &ckpt.adam_v)?;
    let mut model = NgarModel::from_params(ckpt.config, ckpt.n_nodes, ckpt.n_features, params);
    model.adam = AdamState {
        m,
        v,
        step: ckpt.adam_step,
    };
    Ok(model)
}
