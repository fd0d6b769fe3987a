use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub point: f64,
    pub low: f64,
    pub high: f64,
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn scaled(self, factor: f64) -> Self {
        ConfidenceInterval {
            point: self.point * factor,
            low: self.low * factor,
            high: self.high * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            level: 0.95,
            replicates: 10_000,
            seed: 0,
        }
    }
}

/// Percentile bootstrap interval for the mean. Replicate `i` draws from its
/// own ChaCha stream `i` under `seed`, so results do not depend on evaluation
/// order.
pub fn bootstrap_ci(scores: &[f64], config: &BootstrapConfig) -> Result<ConfidenceInterval> {
    let BootstrapConfig {
        level,
        replicates,
        seed,
    } = *config;
    let point = mean(scores)
        .ok_or_else(|| Error::InvalidInput("bootstrap needs at least one score".into()))?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level {level} must lie strictly between 0 and 1"
        )));
    }
    if replicates == 0 {
        return Err(Error::InvalidInput(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    let n = scores.len();
    let mut means: Vec<f64> = (0..replicates)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let sum: f64 = (0..n).map(|_| scores[rng.random_range(0..n)]).sum();
            sum / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(ConfidenceInterval {
        point,
        low: quantile_sorted(&means, alpha).unwrap_or(point),
        high: quantile_sorted(&means, 1.0 - alpha).unwrap_or(point),
        level,
        replicates,
        seed,
    })
}
