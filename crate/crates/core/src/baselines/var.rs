//! Vector autoregression on vectorised graphs.
//!
//! Each graph becomes `u_t = [vec(X_t); vec(A_t)] ∈ ℝ^D` with `D = N·F + N²`
//! (row-major vectorisation). The model `û_{t+1} = B_0 + Σ_{i=1..k} B_i u_{t−i+1}`
//! is fit by ridge-regularised least squares; the prediction is reassembled
//! into a graph by thresholding the adjacency block.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{threshold_adjacency, AttributedGraph, GraphSequence};

/// Default ridge penalty.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Rows accumulated per block when forming the normal equations.
const BLOCK_ROWS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub order: usize,
    pub n_nodes: usize,
    pub n_features: usize,
    pub directed: bool,
    /// `B_0`, length `D`.
    pub intercept: Vec<f64>,
    /// `B_1..B_k`, each row-major `D × D`.
    pub coefficients: Vec<Vec<f64>>,
    pub ridge: f64,
}

impl VarModel {
    pub fn dim(&self) -> usize {
        self.n_nodes * self.n_features + self.n_nodes * self.n_nodes
    }

    /// Every fitted parameter, intercept first.
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.intercept.iter().chain(self.coefficients.iter().flatten()).copied()
    }

    /// Raw prediction `û_{t+1}`; `window` is oldest first.
    pub fn predict_vector(&self, window: &[AttributedGraph]) -> Result<Vec<f64>> {
        if window.len() != self.order {
            return Err(Error::invalid(format!(
                "VAR window holds {} graphs, model order is {}",
                window.len(),
                self.order
            )));
        }
        let d = self.dim();
        let mut out = self.intercept.clone();
        for (lag, g) in window.iter().rev().enumerate() {
            if g.n_nodes() != self.n_nodes || g.n_features() != self.n_features {
                return Err(Error::invalid("window graph dimensions differ from the model"));
            }
            let u = vectorise(g);
            let b = &self.coefficients[lag];
            for (r, o) in out.iter_mut().enumerate() {
                let row = &b[r * d..(r + 1) * d];
                *o += row.iter().zip(&u).map(|(w, x)| w * x).sum::<f64>();
            }
        }
        Ok(out)
    }
}

/// `[vec(X); vec(A)]`, both row-major.
pub fn vectorise(g: &AttributedGraph) -> Vec<f64> {
    g.features()
        .iter()
        .copied()
        .chain(g.adjacency().iter().map(|&a| f64::from(a)))
        .collect()
}

/// Fit `B_0..B_k` by minimising `Σ_t ‖u_{t+1} − B_0 − Σ_i B_i u_{t−i+1}‖² + λ‖B‖²`
/// over all parameters including the intercept. Coefficients acting on the
/// adjacency diagonal, which is identically zero, are fixed at zero.
pub fn var_fit(train: &GraphSequence, k: usize, ridge: f64) -> Result<VarModel> {
    if k == 0 {
        return Err(Error::invalid("VAR order must be ≥ 1"));
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::invalid("ridge penalty must be finite and ≥ 0"));
    }
    let (n, f) = train.dims().ok_or_else(|| Error::invalid("empty training sequence"))?;
    let d = n * f + n * n;
    if train.len() <= k + d {
        return Err(Error::invalid(format!(
            "VAR({k}) with D = {d} needs more than {} training graphs, got {}",
            k + d,
            train.len()
        )));
    }
    let us: Vec<Vec<f64>> = train.graphs().iter().map(vectorise).collect();
    // adjacency diagonals are structurally zero; they are not regressors
    let active: Vec<usize> = (0..d)
        .filter(|&c| c < n * f || (c - n * f) % (n + 1) != 0)
        .collect();
    let a = active.len();
    let p = 1 + k * a;
    let rows = train.len() - k;

    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut cross = DMatrix::<f64>::zeros(p, d);
    let mut start = 0;
    while start < rows {
        let len = BLOCK_ROWS.min(rows - start);
        // row r predicts u_{t+1} from u_t..u_{t-k+1}, t = k - 1 + start + r
        let z = DMatrix::<f64>::from_fn(len, p, |r, c| {
            if c == 0 {
                return 1.0;
            }
            let t = k - 1 + start + r;
            let lag = (c - 1) / a;
            us[t - lag][active[(c - 1) % a]]
        });
        let y = DMatrix::<f64>::from_fn(len, d, |r, c| us[k + start + r][c]);
        gram += z.tr_mul(&z);
        cross += z.tr_mul(&y);
        start += len;
    }
    for i in 0..p {
        gram[(i, i)] += ridge;
    }

    let chol = gram.cholesky().ok_or_else(|| {
        Error::Numerical("VAR normal equations are singular; use a ridge penalty λ > 0".into())
    })?;
    if ridge == 0.0 {
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if (lo / hi).powi(2) < 1e-13 {
            return Err(Error::Numerical(
                "VAR normal equations are numerically singular; use a ridge penalty λ > 0".into(),
            ));
        }
    }
    let sol = chol.solve(&cross);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("VAR solution is not finite".into()));
    }

    let intercept = (0..d).map(|r| sol[(0, r)]).collect();
    let coefficients = (0..k)
        .map(|lag| {
            let mut b = vec![0.0; d * d];
            for r in 0..d {
                for (slot, &c) in active.iter().enumerate() {
                    b[r * d + c] = sol[(1 + lag * a + slot, r)];
                }
            }
            b
        })
        .collect();
    Ok(VarModel {
        order: k,
        n_nodes: n,
        n_features: f,
        directed: train[0].is_directed(),
        intercept,
        coefficients,
        ridge,
    })
}

/// Predict the next graph: the first `N·F` entries of `û_{t+1}` are the
/// features, the next `N²` are edge scores thresholded at 0.5 with pair-mean
/// symmetrisation.
pub fn var_predict(model: &VarModel, window: &[AttributedGraph]) -> Result<AttributedGraph> {
    let u = model.predict_vector(window)?;
    let nf = model.n_nodes * model.n_features;
    let adjacency = threshold_adjacency(&u[nf..], model.n_nodes, model.directed, 0.5);
    AttributedGraph::with_options(model.n_nodes, model.n_features, u[..nf].to_vec(), adjacency, None, model.directed)
}
