//! Autoregressive forecasting for sequences of attributed graphs.
//!
//! - [`graph`], [`distance`], [`frechet`]: the graph data model, a graph edit
//!   distance and Fréchet statistics built on it.
//! - [`sim`]: synthetic graph-generating processes (rotational and partially
//!   masked linear dynamics) with Delaunay topology, plus dataset files.
//! - [`baselines`]: Mean, Mart, Move and VAR predictors.
//! - [`neural`]: the neural graph-autoregressive model, its gradients and
//!   training loop.
//! - [`harness`]: experiment orchestration and reports.

pub mod baselines;
pub mod distance;
pub mod error;
pub mod frechet;
pub mod graph;
pub mod harness;
pub mod neural;
pub mod sim;

pub use distance::{ged, Correspondence, DistanceParams};
pub use error::{Error, Result};
pub use graph::{AttributedGraph, EdgeAttributes, GraphSequence};
