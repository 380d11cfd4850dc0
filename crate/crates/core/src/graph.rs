//! Attributed graphs of fixed order and time-ordered sequences of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::GeneratorConfig;

/// Per-edge real attribute vectors, stored densely as an `N × N × S` tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeAttributes {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl EdgeAttributes {
    pub fn get(&self, n_nodes: usize, i: usize, j: usize) -> &[f64] {
        let start = (i * n_nodes + j) * self.dim;
        &self.data[start..start + self.dim]
    }
}

/// A graph with `N` identified nodes, an `N × F` node-feature matrix, a binary
/// adjacency matrix and optional edge attributes.
///
/// Values are validated on construction and immutable afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributedGraph {
    n_nodes: usize,
    n_features: usize,
    features: Vec<f64>,
    adjacency: Vec<u8>,
    edge_attributes: Option<EdgeAttributes>,
    directed: bool,
}

impl AttributedGraph {
    /// Undirected graph without edge attributes.
    ///
    /// `features` is row-major `N × F`, `adjacency` row-major `N × N`.
    pub fn new(n_nodes: usize, n_features: usize, features: Vec<f64>, adjacency: Vec<u8>) -> Result<Self> {
        Self::with_options(n_nodes, n_features, features, adjacency, None, false)
    }

    pub fn with_options(
        n_nodes: usize,
        n_features: usize,
        features: Vec<f64>,
        adjacency: Vec<u8>,
        edge_attributes: Option<EdgeAttributes>,
        directed: bool,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::invalid("graph must have at least one node"));
        }
        if features.len() != n_nodes * n_features {
            return Err(Error::invalid(format!(
                "feature matrix has {} entries, expected {}×{}",
                features.len(),
                n_nodes,
                n_features
            )));
        }
        if adjacency.len() != n_nodes * n_nodes {
            return Err(Error::invalid(format!(
                "adjacency has {} entries, expected {}×{}",
                adjacency.len(),
                n_nodes,
                n_nodes
            )));
        }
        for i in 0..n_nodes {
            for j in 0..n_nodes {
                let a = adjacency[i * n_nodes + j];
                if a > 1 {
                    return Err(Error::invalid(format!("adjacency entry ({i},{j}) = {a} is not binary")));
                }
                if i == j && a != 0 {
                    return Err(Error::invalid(format!("self-loop at node {i}")));
                }
                if !directed && a != adjacency[j * n_nodes + i] {
                    return Err(Error::invalid(format!("undirected adjacency is asymmetric at ({i},{j})")));
                }
            }
        }
        if let Some(e) = &edge_attributes {
            if e.data.len() != n_nodes * n_nodes * e.dim {
                return Err(Error::invalid("edge attribute tensor has wrong size"));
            }
            for i in 0..n_nodes {
                for j in 0..n_nodes {
                    let attrs = e.get(n_nodes, i, j);
                    if adjacency[i * n_nodes + j] == 0 && attrs.iter().any(|&v| v != 0.0) {
                        return Err(Error::invalid(format!("edge attributes present on absent edge ({i},{j})")));
                    }
                    if !directed && attrs != e.get(n_nodes, j, i) {
                        return Err(Error::invalid(format!("undirected edge attributes asymmetric at ({i},{j})")));
                    }
                }
            }
        }
        Ok(Self {
            n_nodes,
            n_features,
            features,
            adjacency,
            edge_attributes,
            directed,
        })
    }

    /// Edgeless graph with the given features.
    pub fn edgeless(n_nodes: usize, n_features: usize, features: Vec<f64>) -> Result<Self> {
        Self::new(n_nodes, n_features, features, vec![0; n_nodes * n_nodes])
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Row-major `N × F` node features.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn node_features(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Row-major `N × N` adjacency.
    pub fn adjacency(&self) -> &[u8] {
        &self.adjacency
    }

    #[inline]
    pub fn edge(&self, i: usize, j: usize) -> u8 {
        self.adjacency[i * self.n_nodes + j]
    }

    pub fn edge_attributes(&self) -> Option<&EdgeAttributes> {
        self.edge_attributes.as_ref()
    }

    pub fn edge_attribute_dim(&self) -> usize {
        self.edge_attributes.as_ref().map_or(0, |e| e.dim)
    }

    /// Number of edges (unordered pairs when undirected).
    pub fn edge_count(&self) -> usize {
        let total: usize = self.adjacency.iter().map(|&a| a as usize).sum();
        if self.directed {
            total
        } else {
            total / 2
        }
    }

    /// Relabel nodes so that node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_nodes;
        if perm.len() != n {
            return Err(Error::invalid("permutation length differs from graph order"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let f = self.n_features;
        let mut features = Vec::with_capacity(n * f);
        for &p in perm {
            features.extend_from_slice(self.node_features(p));
        }
        let mut adjacency = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                adjacency[i * n + j] = self.edge(perm[i], perm[j]);
            }
        }
        let edge_attributes = self.edge_attributes.as_ref().map(|e| {
            let mut data = Vec::with_capacity(e.data.len());
            for i in 0..n {
                for j in 0..n {
                    data.extend_from_slice(e.get(n, perm[i], perm[j]));
                }
            }
            EdgeAttributes { dim: e.dim, data }
        });
        Ok(Self {
            n_nodes: n,
            n_features: f,
            features,
            adjacency,
            edge_attributes,
            directed: self.directed,
        })
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.n_nodes == other.n_nodes
            && self.n_features == other.n_features
            && self.directed == other.directed
            && self.edge_attribute_dim() == other.edge_attribute_dim()
    }
}

/// Time-ordered graphs sharing order, feature dimension and directedness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSequence {
    graphs: Vec<AttributedGraph>,
    origin: Option<GeneratorConfig>,
}

impl GraphSequence {
    pub fn new(graphs: Vec<AttributedGraph>) -> Result<Self> {
        Self::with_origin(graphs, None)
    }

    pub fn with_origin(graphs: Vec<AttributedGraph>, origin: Option<GeneratorConfig>) -> Result<Self> {
        if let Some(first) = graphs.first() {
            if let Some((t, _)) = graphs.iter().enumerate().find(|(_, g)| !g.same_shape(first)) {
                return Err(Error::invalid(format!("graph {t} differs in shape from graph 0")));
            }
        }
        Ok(Self { graphs, origin })
    }

    pub fn empty() -> Self {
        Self {
            graphs: Vec::new(),
            origin: None,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[AttributedGraph] {
        &self.graphs
    }

    pub fn get(&self, t: usize) -> Option<&AttributedGraph> {
        self.graphs.get(t)
    }

    pub fn origin(&self) -> Option<&GeneratorConfig> {
        self.origin.as_ref()
    }

    /// `(N, F)` of the stored graphs, if any.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.graphs.first().map(|g| (g.n_nodes(), g.n_features()))
    }

    /// Sub-sequence `[start, end)`; keeps the origin.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            graphs: self.graphs[start..end].to_vec(),
            origin: self.origin.clone(),
        }
    }

    pub fn into_graphs(self) -> Vec<AttributedGraph> {
        self.graphs
    }
}

impl std::ops::Index<usize> for GraphSequence {
    type Output = AttributedGraph;

    fn index(&self, t: usize) -> &AttributedGraph {
        &self.graphs[t]
    }
}

/// Binary adjacency from edge scores.
///
/// Undirected: `a_ij = a_ji = 1` iff `(p_ij + p_ji) / 2 > threshold`.
/// Directed: `a_ij = 1` iff `p_ij > threshold`. The diagonal is always zero.
pub fn threshold_adjacency(scores: &[f64], n_nodes: usize, directed: bool, threshold: f64) -> Vec<u8> {
    let n = n_nodes;
    let mut a = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = if directed {
                scores[i * n + j]
            } else {
                (scores[i * n + j] + scores[j * n + i]) / 2.0
            };
            a[i * n + j] = u8::from(s > threshold);
        }
    }
    a
}
