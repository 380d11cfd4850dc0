//! Mini-batch training with a chronological validation split and early stopping.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::adam_step;
use super::model::{GraphStore, NgarModel};
use super::Real;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::sim::seeded_rng;

/// RNG stream used for batch shuffling.
const SHUFFLE_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 for the untrained model.
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
    pub validation_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub train_windows: usize,
    pub validation_windows: usize,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }
}

/// Train on every `(k graphs → next graph)` window of `graphs`.
pub fn train<T: Real>(model: &mut NgarModel<T>, graphs: &[AttributedGraph]) -> Result<TrainHistory> {
    train_with_callback(model, graphs, |_| {})
}

/// As [`train`], calling `on_epoch` after the initial evaluation and after
/// every epoch.
///
/// The trailing `validation_fraction` of windows (in time order) is held out;
/// training stops after `patience` epochs without a lower validation loss and
/// the parameters of the best epoch are restored.
pub fn train_with_callback<T: Real, F: FnMut(&EpochRecord)>(
    model: &mut NgarModel<T>,
    graphs: &[AttributedGraph],
    mut on_epoch: F,
) -> Result<TrainHistory> {
    let cfg = model.config.clone();
    cfg.validate()?;
    let k = cfg.window;
    if graphs.len() < k + 2 {
        return Err(Error::invalid(format!(
            "training needs at least k + 2 = {} graphs, got {}",
            k + 2,
            graphs.len()
        )));
    }
    let store = GraphStore::<T>::new(graphs)?;
    model.check_store(&store)?;
    let windows = graphs.len() - k;
    let n_val = ((windows as f64 * cfg.validation_fraction).ceil() as usize).clamp(1, windows - 1);
    let n_train = windows - n_val;
    let mut train_starts: Vec<usize> = (0..n_train).collect();
    let val_starts: Vec<usize> = (n_train..windows).collect();

    let mut history = TrainHistory {
        train_windows: n_train,
        validation_windows: n_val,
        ..Default::default()
    };
    let initial_train = model.evaluate_windows(&store, &train_starts)?;
    let initial_val = model.evaluate_windows(&store, &val_starts)?;
    let record = EpochRecord {
        epoch: 0,
        train_loss: initial_train.loss,
        validation_loss: initial_val.loss,
        validation_accuracy: initial_val.adjacency_accuracy,
    };
    on_epoch(&record);
    history.epochs.push(record);
    let mut best_loss = initial_val.loss;
    let mut best_params = model.params.clone();
    let mut since_best = 0;

    let mut rng = seeded_rng(cfg.seed, SHUFFLE_STREAM);
    for epoch in 1..=cfg.max_epochs {
        train_starts.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train_starts.chunks(cfg.batch_size) {
            let (loss, grads) = model.loss_and_gradient(&store, batch)?;
            total += loss.total * batch.len() as f64;
            adam_step(&mut model.params, &mut model.adam, &grads, cfg.learning_rate);
        }
        model.params.check_finite("parameter")?;
        let val = model.evaluate_windows(&store, &val_starts)?;
        let record = EpochRecord {
            epoch,
            train_loss: total / n_train as f64,
            validation_loss: val.loss,
            validation_accuracy: val.adjacency_accuracy,
        };
        on_epoch(&record);
        history.epochs.push(record);
        if val.loss < best_loss {
            best_loss = val.loss;
            best_params = model.params.clone();
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    model.params = best_params;
    Ok(history)
}
