//! Reference predictors for the next graph of a sequence.
//!
//! * **Mean** – Fréchet mean of the whole training set (stationary i.i.d. assumption).
//! * **Mart** – the last observed graph (martingale assumption).
//! * **Move** – Fréchet mean of the last `k` graphs.
//! * **VAR** – linear vector autoregression on vectorised graphs, see [`var`].

pub mod var;

pub use var::{var_fit, var_predict, VarModel};

use crate::distance::DistanceParams;
use crate::error::{Error, Result};
use crate::frechet::frechet_mean_closed_form;
use crate::graph::{AttributedGraph, GraphSequence};

/// Default window for Move and VAR.
pub const DEFAULT_WINDOW: usize = 20;

/// Fréchet mean of every training graph.
pub fn predict_mean(train: &GraphSequence) -> Result<AttributedGraph> {
    if train.is_empty() {
        return Err(Error::invalid("Mean baseline needs a non-empty training sequence"));
    }
    frechet_mean_closed_form(train.graphs(), &DistanceParams::default())
}

/// The most recent graph of the window.
pub fn predict_mart(window: &[AttributedGraph]) -> Result<AttributedGraph> {
    window
        .last()
        .cloned()
        .ok_or_else(|| Error::invalid("Mart baseline needs a non-empty window"))
}

/// Fréchet mean of the last `k` graphs of the window.
pub fn predict_move(window: &[AttributedGraph], k: usize) -> Result<AttributedGraph> {
    if k == 0 {
        return Err(Error::invalid("Move window must be ≥ 1"));
    }
    if window.len() < k {
        return Err(Error::invalid(format!(
            "Move baseline needs {k} graphs, window holds {}",
            window.len()
        )));
    }
    frechet_mean_closed_form(&window[window.len() - k..], &DistanceParams::default())
}
