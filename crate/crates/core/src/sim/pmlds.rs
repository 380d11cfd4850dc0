use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{seeded_rng, stream, NoiseSpec};
use crate::error::{Error, Result};

/// Partially masked linear dynamical system of complexity `c`: a latent
/// state in `ℝ^c` evolves under an orthogonal map and only the first `N·F`
/// components are observed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PmldsConfig {
    pub n_nodes: usize,
    pub feature_dim: usize,
    pub complexity: usize,
    /// Row-major `c × c` orthogonal dynamics.
    pub dynamics_matrix: Vec<f64>,
    pub noise_std: f64,
    pub seed: u64,
}

#[derive(Deserialize)]
struct PmldsConfigRepr {
    n_nodes: usize,
    feature_dim: usize,
    complexity: usize,
    #[serde(default)]
    dynamics_matrix: Option<Vec<f64>>,
    #[serde(default = "default_noise")]
    noise_std: f64,
    seed: u64,
}

fn default_noise() -> f64 {
    0.001
}

// Config files may omit the dynamics matrix; it is then redrawn from the seed.
impl<'de> Deserialize<'de> for PmldsConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PmldsConfigRepr::deserialize(d)?;
        let built = match r.dynamics_matrix {
            Some(m) => PmldsConfig::with_dynamics(r.n_nodes, r.feature_dim, r.complexity, m, r.noise_std, r.seed),
            None => PmldsConfig::new(r.n_nodes, r.feature_dim, r.complexity, r.seed)
                .and_then(|c| c.with_noise_std(r.noise_std)),
        };
        built.map_err(serde::de::Error::custom)
    }
}

impl PmldsConfig {
    /// Draws a Haar-random orthogonal dynamics matrix from `seed`; noise std 0.001.
    pub fn new(n_nodes: usize, feature_dim: usize, complexity: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed, stream::PARAMETERS);
        let r = random_orthogonal(complexity, &mut rng)?;
        Self::with_dynamics(n_nodes, feature_dim, complexity, row_major(&r), 0.001, seed)
    }

    pub fn with_dynamics(
        n_nodes: usize,
        feature_dim: usize,
        complexity: usize,
        dynamics_matrix: Vec<f64>,
        noise_std: f64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            n_nodes,
            feature_dim,
            complexity,
            dynamics_matrix,
            noise_std,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_noise_std(mut self, sigma: f64) -> Result<Self> {
        self.noise_std = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let observed = self.n_nodes * self.feature_dim;
        if observed == 0 {
            return Err(Error::invalid("PMLDS needs N ≥ 1 and F ≥ 1"));
        }
        if self.complexity <= observed {
            return Err(Error::invalid(format!(
                "complexity {} must exceed the observed dimension N·F = {observed}",
                self.complexity
            )));
        }
        let c = self.complexity;
        if self.dynamics_matrix.len() != c * c {
            return Err(Error::invalid("dynamics matrix must be c × c"));
        }
        let r = self.dynamics();
        let defect = (r.transpose() * &r - DMatrix::<f64>::identity(c, c)).amax();
        if !(defect <= 1e-10) {
            return Err(Error::invalid(format!("dynamics matrix is not orthogonal (‖RᵀR − I‖_max = {defect:e})")));
        }
        NoiseSpec::process(self.noise_std).validate()
    }

    pub fn dynamics(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.complexity, self.complexity, &self.dynamics_matrix)
    }

    pub fn observed_dim(&self) -> usize {
        self.n_nodes * self.feature_dim
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Haar-distributed random orthogonal `c × c` matrix.
///
/// QR factorisation of a standard-normal matrix with the signs of `Q`'s
/// columns chosen so that `R` has a positive diagonal, which makes the
/// factorisation unique.
pub fn random_orthogonal(size: usize, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    if size == 0 {
        return Err(Error::invalid("orthogonal matrix size must be ≥ 1"));
    }
    let g = DMatrix::from_fn(size, size, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..size {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// One step `x_{t+1} = R·x_t + ε`.
pub fn pmlds_step(x: &[f64], config: &PmldsConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let c = config.complexity;
    if x.len() != c {
        return Err(Error::invalid(format!("state has length {}, expected {c}", x.len())));
    }
    let mut next = vec![0.0; c];
    for (i, out) in next.iter_mut().enumerate() {
        let row = &config.dynamics_matrix[i * c..(i + 1) * c];
        *out = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
    NoiseSpec::process(config.noise_std).perturb(&mut next, rng);
    Ok(next)
}

pub(crate) fn initial_state(config: &PmldsConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: DVector<f64> = DVector::from_fn(config.complexity, |_, _| rng.sample(StandardNormal));
    v.as_slice().to_vec()
}
