//! Synthetic graph-generating processes.
//!
//! A latent vector process `x_{t+1} = f(x_t, …, x_{t−p+1}) + ε` is observed
//! through its first `N·F` components, reshaped row-major into node features,
//! and each graph's topology is the Delaunay triangulation of its node
//! features read as planar points.

mod delaunay;
pub mod io;
mod pmlds;
mod rotational;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use delaunay::delaunay_adjacency;
pub use pmlds::{pmlds_step, random_orthogonal, PmldsConfig};
pub use rotational::{rotation_omega, rotational_step, RotationalConfig};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphSequence};

/// Discarded steps between initialisation and the first emitted graph.
pub const BURN_IN: usize = 100;

/// Independent random streams derived from one seed.
pub(crate) mod stream {
    /// Model parameters (phase offsets, dynamics matrix).
    pub const PARAMETERS: u64 = 0;
    /// Initial state and process noise.
    pub const TRAJECTORY: u64 = 1;
}

/// Deterministic generator for `seed` on the given stream.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Added inside the recursion, so it propagates to later states.
    Process,
}

/// Gaussian noise `ε ~ N(0, σ²)` applied entrywise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub std: f64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn process(std: f64) -> Self {
        Self {
            std,
            mode: NoiseMode::Process,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.std >= 0.0) || !self.std.is_finite() {
            return Err(Error::invalid(format!("noise std must be finite and ≥ 0, got {}", self.std)));
        }
        Ok(())
    }

    pub(crate) fn perturb(&self, x: &mut [f64], rng: &mut ChaCha8Rng) {
        if self.std > 0.0 {
            for v in x {
                *v += self.std * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
}

/// Configuration of one of the supported processes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorConfig {
    Rotational(RotationalConfig),
    Pmlds(PmldsConfig),
}

impl GeneratorConfig {
    pub fn n_nodes(&self) -> usize {
        match self {
            Self::Rotational(c) => c.n_nodes,
            Self::Pmlds(c) => c.n_nodes,
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            Self::Rotational(c) => c.feature_dim,
            Self::Pmlds(c) => c.feature_dim,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::Rotational(c) => c.seed,
            Self::Pmlds(c) => c.seed,
        }
    }

    /// Short label such as `rotational(p=5)` or `pmlds(c=11)`.
    pub fn label(&self) -> String {
        match self {
            Self::Rotational(c) => format!("rotational(p={})", c.order),
            Self::Pmlds(c) => format!("pmlds(c={})", c.complexity),
        }
    }

    /// The complexity parameter: `p` for rotational, `c` for PMLDS.
    pub fn complexity(&self) -> (&'static str, usize) {
        match self {
            Self::Rotational(c) => ("p", c.order),
            Self::Pmlds(c) => ("c", c.complexity),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Rotational(c) => c.validate(),
            Self::Pmlds(c) => c.validate(),
        }
    }
}

/// A running latent process.
#[derive(Clone, Debug)]
pub struct GgpProcess {
    config: GeneratorConfig,
    /// Newest state first; a single entry for PMLDS.
    history: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl GgpProcess {
    /// Initial state(s) drawn standard normal; no burn-in applied.
    pub fn new(config: &GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded_rng(config.seed(), stream::TRAJECTORY);
        let history = match config {
            GeneratorConfig::Rotational(c) => rotational::initial_history(c, &mut rng),
            GeneratorConfig::Pmlds(c) => vec![pmlds::initial_state(c, &mut rng)],
        };
        Ok(Self {
            config: config.clone(),
            history,
            rng,
        })
    }

    /// Full latent state `x_t`.
    pub fn latent(&self) -> &[f64] {
        &self.history[0]
    }

    /// Observed components, i.e. the first `N·F` latent entries.
    pub fn observed(&self) -> &[f64] {
        let d = self.config.n_nodes() * self.config.feature_dim();
        &self.history[0][..d]
    }

    pub fn advance(&mut self) -> Result<()> {
        match &self.config {
            GeneratorConfig::Rotational(c) => {
                let next = rotational_step(&self.history, c, &mut self.rng)?;
                self.history.pop();
                self.history.insert(0, next);
            }
            GeneratorConfig::Pmlds(c) => {
                self.history[0] = pmlds_step(&self.history[0], c, &mut self.rng)?;
            }
        }
        Ok(())
    }

    /// Graph built from the current observed state.
    pub fn graph(&self) -> Result<AttributedGraph> {
        let n = self.config.n_nodes();
        let f = self.config.feature_dim();
        let features = self.observed().to_vec();
        let adjacency = delaunay_adjacency(&features, f)?;
        AttributedGraph::new(n, f, features, adjacency)
    }
}

/// Runs the configured process for `BURN_IN` discarded steps and then emits
/// `length` graphs, one per step.
pub fn generate_sequence(config: &GeneratorConfig, length: usize) -> Result<GraphSequence> {
    if config.feature_dim() != 2 {
        return Err(Error::invalid("Delaunay topology requires feature_dim = 2"));
    }
    let mut process = GgpProcess::new(config)?;
    for _ in 0..BURN_IN {
        process.advance()?;
    }
    let mut graphs = Vec::with_capacity(length);
    for _ in 0..length {
        process.advance()?;
        graphs.push(process.graph()?);
    }
    GraphSequence::with_origin(graphs, Some(config.clone()))
}
