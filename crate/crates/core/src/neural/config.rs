use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture and training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NgarConfig {
    /// Input window length `k`.
    pub window: usize,
    /// Width of both graph convolution layers.
    pub conv_channels: usize,
    /// Width of the pooled graph embedding.
    pub pool_channels: usize,
    /// Units of both LSTM layers.
    pub rnn_units: usize,
    pub dense_units: [usize; 2],
    pub l2_weight: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    /// Trailing fraction of training pairs held out for early stopping.
    pub validation_fraction: f64,
    pub adjacency_threshold: f64,
    pub seed: u64,
}

impl Default for NgarConfig {
    fn default() -> Self {
        Self {
            window: 20,
            conv_channels: 128,
            pool_channels: 128,
            rnn_units: 256,
            dense_units: [256, 512],
            l2_weight: 5e-4,
            learning_rate: 1e-3,
            batch_size: 256,
            patience: 20,
            max_epochs: 200,
            validation_fraction: 0.1,
            adjacency_threshold: 0.5,
            seed: 0,
        }
    }
}

impl NgarConfig {
    /// Same hyperparameters with every layer `width` wide.
    pub fn with_width(mut self, width: usize) -> Self {
        self.conv_channels = width;
        self.pool_channels = width;
        self.rnn_units = width;
        self.dense_units = [width, width];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let widths = [
            self.window,
            self.conv_channels,
            self.pool_channels,
            self.rnn_units,
            self.dense_units[0],
            self.dense_units[1],
            self.batch_size,
            self.max_epochs,
        ];
        if widths.contains(&0) {
            return Err(Error::invalid("window, layer widths, batch size and max epochs must be ≥ 1"));
        }
        if !(self.l2_weight >= 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::invalid("l2 weight must be ≥ 0 and learning rate > 0"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid("validation fraction must lie in (0, 1)"));
        }
        if !(self.adjacency_threshold > 0.0 && self.adjacency_threshold < 1.0) {
            return Err(Error::invalid("adjacency threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}
