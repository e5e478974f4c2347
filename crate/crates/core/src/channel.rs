//! Frequency-selective Rayleigh fading on both hops.
//!
//! Each subcarrier of each hop carries an independent exponential channel
//! gain `|h_i(n)|^2` with mean `mu_i`. Gains are drawn by inverse-CDF
//! transform of a uniform variate so a fixed uniform stream reproduces the
//! same realization on every platform.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static description of the two-hop channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    n_t: usize,
    mu_1: f64,
    mu_2: f64,
    n_0: f64,
}

impl ChannelParams {
    pub fn new(n_t: usize, mu_1: f64, mu_2: f64, n_0: f64) -> Result<Self> {
        if n_t < 2 {
            return Err(Error::param("n_t", format!("{n_t} subcarriers, need at least 2")));
        }
        for (field, value) in [("mu_1", mu_1), ("mu_2", mu_2), ("n_0", n_0)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(field, format!("{value} must be finite and > 0")));
            }
        }
        Ok(ChannelParams {
            n_t,
            mu_1,
            mu_2,
            n_0,
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn mu_1(&self) -> f64 {
        self.mu_1
    }

    pub fn mu_2(&self) -> f64 {
        self.mu_2
    }

    pub fn n_0(&self) -> f64 {
        self.n_0
    }
}

/// One quasi-static draw of per-subcarrier channel gains on both hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    gains_hop1: Vec<f64>,
    gains_hop2: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(gains_hop1: Vec<f64>, gains_hop2: Vec<f64>) -> Result<Self> {
        if gains_hop1.len() != gains_hop2.len() {
            return Err(Error::DimensionMismatch {
                expected: gains_hop1.len(),
                actual: gains_hop2.len(),
            });
        }
        if gains_hop1.len() < 2 {
            return Err(Error::param(
                "gains",
                format!("{} subcarriers, need at least 2", gains_hop1.len()),
            ));
        }
        if let Some(g) = gains_hop1
            .iter()
            .chain(&gains_hop2)
            .find(|g| !(g.is_finite() && **g >= 0.0))
        {
            return Err(Error::param("gains", format!("{g} is not a finite nonnegative gain")));
        }
        Ok(ChannelRealization {
            gains_hop1,
            gains_hop2,
        })
    }

    pub fn n_t(&self) -> usize {
        self.gains_hop1.len()
    }

    pub fn gains_hop1(&self) -> &[f64] {
        &self.gains_hop1
    }

    pub fn gains_hop2(&self) -> &[f64] {
        &self.gains_hop2
    }

    /// Gains of hop `1` or `2`.
    pub fn hop(&self, hop: usize) -> &[f64] {
        match hop {
            1 => &self.gains_hop1,
            2 => &self.gains_hop2,
            _ => panic!("hop index {hop} is not 1 or 2"),
        }
    }

    /// The same realization with the two hops exchanged.
    pub fn swapped(&self) -> Self {
        ChannelRealization {
            gains_hop1: self.gains_hop2.clone(),
            gains_hop2: self.gains_hop1.clone(),
        }
    }
}

/// Inverse CDF of the exponential distribution with mean `mu`.
///
/// `u` must lie in `[0, 1)`; `u = 1` would map to infinity.
pub fn exp_inverse_cdf(u: f64, mu: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&u));
    -mu * (-u).ln_1p()
}

/// CDF `1 - exp(-s / mu)` of an exponential channel gain.
pub fn exp_cdf(s: f64, mu: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::param("s", format!("{s} is outside the support [0, inf)")));
    }
    if !(mu > 0.0) {
        return Err(Error::param("mu", format!("{mu} must be > 0")));
    }
    Ok(-(-s / mu).exp_m1())
}

/// Draws all hop-1 gains, then all hop-2 gains, from `rng`.
///
/// `Rng::random::<f64>()` samples from `[0, 1)`, so the logarithm is always finite.
pub fn sample_realization<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> ChannelRealization {
    let mut draw = |mu: f64| -> Vec<f64> {
        (0..params.n_t)
            .map(|_| exp_inverse_cdf(rng.random::<f64>(), mu))
            .collect()
    };
    let gains_hop1 = draw(params.mu_1);
    let gains_hop2 = draw(params.mu_2);
    ChannelRealization {
        gains_hop1,
        gains_hop2,
    }
}

/// Random stream owned by one Monte Carlo trial.
///
/// ChaCha supports 2^64 independent streams per key, so `(master_seed, trial)`
/// names a stream regardless of which worker runs the trial.
pub fn trial_stream(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
