//! Additive white Gaussian noise channel, `r_k = s_k + ξ_k` with
//! `ξ_k ~ N(0, N0/2)` drawn once per chip.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::BasebandSignal;

const MODULE: &str = "channel";

/// Identifies the pseudo-random source; echoed into result files.
pub const RNG_ALGORITHM: &str = "chacha20/rand_distr-0.5-standard-normal-ziggurat";

/// Configuration of an AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnConfig {
    /// One-sided noise spectral density `N0`; per-sample variance is `N0/2`.
    pub noise_spectral: f64,
    pub seed: u64,
}

impl Default for AwgnConfig {
    fn default() -> Self {
        Self {
            noise_spectral: 0.0,
            seed: 1,
        }
    }
}

/// A channel instance owning its random stream.
#[derive(Debug, Clone)]
pub struct AwgnChannel {
    config: AwgnConfig,
    sigma: f64,
    rng: ChaCha20Rng,
}

impl AwgnChannel {
    pub fn new(config: AwgnConfig) -> Result<Self> {
        if !(config.noise_spectral.is_finite() && config.noise_spectral >= 0.0) {
            return Err(Error::domain(
                MODULE,
                "noise_spectral",
                format!("{} must be non-negative", config.noise_spectral),
            ));
        }
        Ok(Self {
            config,
            sigma: (config.noise_spectral / 2.0).sqrt(),
            rng: ChaCha20Rng::seed_from_u64(config.seed),
        })
    }

    pub fn config(&self) -> AwgnConfig {
        self.config
    }

    /// Per-sample noise variance `N0/2`.
    pub fn variance(&self) -> f64 {
        self.config.noise_spectral / 2.0
    }

    /// Next `len` noise samples of the stream.
    pub fn noise(&mut self, len: usize) -> Vec<f64> {
        if self.sigma == 0.0 {
            return vec![0.0; len];
        }
        (0..len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                self.sigma * z
            })
            .collect()
    }

    /// Adds the next noise realization to `signal`. With `N0 = 0` the input
    /// comes back unchanged.
    pub fn transmit(&mut self, signal: &BasebandSignal) -> BasebandSignal {
        if self.sigma == 0.0 {
            return signal.clone();
        }
        let noise = self.noise(signal.len());
        BasebandSignal {
            samples: signal.samples.iter().zip(noise).map(|(s, n)| s + n).collect(),
            sample_period: signal.sample_period,
        }
    }
}
