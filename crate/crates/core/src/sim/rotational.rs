use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{seeded_rng, stream, NoiseSpec};
use crate::error::{Error, Result};

/// Rotational process: each node's 2-D feature is rotated by an angle that
/// depends on the last `p` states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationalConfig {
    pub n_nodes: usize,
    pub feature_dim: usize,
    /// Memory order `p`.
    pub order: usize,
    /// Per-node base angles `c_n ∈ (−1, 1]`.
    pub phase_offsets: Vec<f64>,
    /// Modulation amplitude `α`.
    pub amplitude: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl RotationalConfig {
    /// Draws the phase offsets uniformly on `(−1, 1]` from `seed`; amplitude
    /// 0.01, noise std 0.001.
    pub fn new(n_nodes: usize, order: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed, stream::PARAMETERS);
        // 1 − 2u with u ∈ [0, 1) lands in (−1, 1]
        let phase_offsets = (0..n_nodes).map(|_| 1.0 - 2.0 * rng.gen::<f64>()).collect();
        let cfg = Self {
            n_nodes,
            feature_dim: 2,
            order,
            phase_offsets,
            amplitude: 0.01,
            noise_std: 0.001,
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

    pub fn with_amplitude(mut self, alpha: f64) -> Result<Self> {
        self.amplitude = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::invalid("rotational model needs at least one node"));
        }
        if self.feature_dim != 2 {
            return Err(Error::invalid("rotational model requires feature_dim = 2"));
        }
        if self.order == 0 {
            return Err(Error::invalid("rotational model order must be ≥ 1"));
        }
        if self.phase_offsets.len() != self.n_nodes {
            return Err(Error::invalid("one phase offset per node is required"));
        }
        if let Some(c) = self.phase_offsets.iter().find(|c| !(**c > -1.0 && **c <= 1.0)) {
            return Err(Error::invalid(format!("phase offset {c} outside (−1, 1]")));
        }
        if !(self.amplitude >= 0.0) {
            return Err(Error::invalid("amplitude must be ≥ 0"));
        }
        NoiseSpec::process(self.noise_std).validate()
    }

    pub fn state_dim(&self) -> usize {
        self.n_nodes * self.feature_dim
    }
}

/// Rotation angle of node `node` (0-based):
/// `ω = c_n + α·cos(Σ_i x_{t−i}[2n] + x_{t−i}[2n+1])` over the `p` most recent
/// states, `history[0]` being the newest.
pub fn rotation_omega<V: AsRef<[f64]>>(history: &[V], node: usize, config: &RotationalConfig) -> Result<f64> {
    if history.len() != config.order {
        return Err(Error::invalid(format!(
            "history holds {} states, model order is {}",
            history.len(),
            config.order
        )));
    }
    if node >= config.n_nodes {
        return Err(Error::invalid(format!("node {node} out of range")));
    }
    let mut phase = 0.0;
    for x in history {
        let x = x.as_ref();
        if x.len() != config.state_dim() {
            return Err(Error::invalid("history state has wrong length"));
        }
        phase += x[2 * node] + x[2 * node + 1];
    }
    Ok(config.phase_offsets[node] + config.amplitude * phase.cos())
}

/// One step `x_{t+1} = R(history)·x_t + ε` with block-diagonal rotations
/// `[[cos ω, sin ω], [−sin ω, cos ω]]`.
pub fn rotational_step<V: AsRef<[f64]>>(history: &[V], config: &RotationalConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let current = history
        .first()
        .ok_or_else(|| Error::invalid("empty history"))?
        .as_ref();
    let mut next = vec![0.0; config.state_dim()];
    for n in 0..config.n_nodes {
        let omega = rotation_omega(history, n, config)?;
        let (s, c) = omega.sin_cos();
        let (a, b) = (current[2 * n], current[2 * n + 1]);
        next[2 * n] = c * a + s * b;
        next[2 * n + 1] = -s * a + c * b;
    }
    NoiseSpec::process(config.noise_std).perturb(&mut next, rng);
    Ok(next)
}

/// Initial history of `p` standard-normal states, newest first.
pub(crate) fn initial_history(config: &RotationalConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..config.order)
        .map(|_| (0..config.state_dim()).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn config(n: usize, p: usize, offsets: Vec<f64>, alpha: f64, sigma: f64) -> RotationalConfig {
        RotationalConfig {
            n_nodes: n,
            feature_dim: 2,
            order: p,
            phase_offsets: offsets,
            amplitude: alpha,
            noise_std: sigma,
            seed: 0,
        }
    }

    #[test]
    fn omega_at_zero_history() {
        let cfg = config(2, 1, vec![0.5, 0.0], 0.01, 0.0);
        let w = rotation_omega(&[vec![0.0; 4]], 0, &cfg).unwrap();
        assert!((w - 0.51).abs() < 1e-15);
    }

    #[test]
    fn omega_without_modulation_is_the_offset() {
        let cfg = config(1, 2, vec![-0.3], 0.0, 0.0);
        let w = rotation_omega(&[vec![4.0, 1.0], vec![-2.0, 7.0]], 0, &cfg).unwrap();
        assert_eq!(w, -0.3);
    }

    #[test]
    fn omega_sums_over_the_window() {
        let cfg = config(2, 2, vec![0.0, 0.0], 0.01, 0.0);
        let hist = [vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
        let w = rotation_omega(&hist, 0, &cfg).unwrap();
        assert!((w - 0.01 * 2f64.cos()).abs() < 1e-15);
        assert!(rotation_omega(&hist[..1], 0, &cfg).is_err());
    }

    #[test]
    fn quarter_turn_maps_x_axis_down() {
        // ω = π/2 lies outside the (−1, 1] range enforced by validate(), which
        // the step function does not call
        let cfg = config(1, 1, vec![FRAC_PI_2], 0.0, 0.0);
        let mut rng = seeded_rng(0, 0);
        let next = rotational_step(&[vec![1.0, 0.0]], &cfg, &mut rng).unwrap();
        assert!(next[0].abs() < 1e-15);
        assert!((next[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_rotation_and_norm() {
        let mut rng = seeded_rng(3, 0);
        let cfg = config(2, 1, vec![0.0, 0.0], 0.0, 0.0);
        let x = vec![0.3, -1.2, 2.0, 0.7];
        assert_eq!(rotational_step(&[x.clone()], &cfg, &mut rng).unwrap(), x);

        let cfg = config(2, 1, vec![0.4, -0.9], 0.01, 0.0);
        let y = rotational_step(&[x.clone()], &cfg, &mut rng).unwrap();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((norm(&x) - norm(&y)).abs() < 1e-12);
    }

    #[test]
    fn random_offsets_are_in_range() {
        let cfg = RotationalConfig::new(50, 3, 11).unwrap();
        assert!(cfg.phase_offsets.iter().all(|c| *c > -1.0 && *c <= 1.0));
        assert!(cfg.clone().with_noise_std(-1.0).is_err());
        assert!(RotationalConfig::new(3, 0, 1).is_err());
    }
}
