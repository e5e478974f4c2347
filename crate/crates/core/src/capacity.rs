//! Network capacity of a two-hop DF relay under OFDM index modulation.
//!
//! For pattern `k > 1` the capacity is `sum_n 1/2 min_i log2(1 + gamma_i(n))`
//! over the active positions; for `k = 1` the whole budget goes to each
//! hop's complementary subcarrier. The `1/2` accounts for the two half-duplex
//! phases.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{pattern_count, pattern_from_index, ActivationPattern, MappingSelection, SelectionMode};
use crate::waterfill::{uniform_allocation, waterfill, AllocationProblem, PowerAllocation};

/// Default bound on `2^N_S` for exact pattern enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Waterfilling from instantaneous CSI.
    Dynamic,
    /// `P_t / N_A(k)` on every active subcarrier.
    Uniform,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Dynamic, Strategy::Uniform];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Dynamic => "dynamic",
            Strategy::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dynamic" | "waterfill" => Ok(Strategy::Dynamic),
            "uniform" => Ok(Strategy::Uniform),
            other => Err(Error::param("strategy", format!("unknown strategy {other:?}"))),
        }
    }
}

/// How the expectation over activation patterns is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternPolicy {
    /// Average over all `2^N_S` patterns.
    Exact,
    /// Sample mean over this many uniformly drawn pattern indices.
    Sampled(usize),
}

impl fmt::Display for PatternPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternPolicy::Exact => f.write_str("exact"),
            PatternPolicy::Sampled(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for PatternPolicy {
    type Err = Error;

    /// `exact`, or a positive draw count (`sampled:N` is also accepted).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("exact") {
            return Ok(PatternPolicy::Exact);
        }
        let count = s.strip_prefix("sampled:").unwrap_or(s);
        match count.parse::<usize>() {
            Ok(n) if n > 0 => Ok(PatternPolicy::Sampled(n)),
            _ => Err(Error::param(
                "pattern_policy",
                format!("{s:?} is neither \"exact\" nor a positive draw count"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCapacity {
    pub k: u64,
    /// End-to-end capacity in bit/s/Hz.
    pub capacity: f64,
    pub alloc_hop1: PowerAllocation,
    pub alloc_hop2: PowerAllocation,
    /// Per-hop sum capacity `sum_n 1/2 log2(1 + gamma_i(n))`.
    pub hop_capacity: [f64; 2],
}

fn half_log2_1p(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / LN_2
}

fn allocate(gains: Vec<f64>, n_0: f64, budget: f64, strategy: Strategy) -> Result<PowerAllocation> {
    match strategy {
        Strategy::Uniform => uniform_allocation(gains.len(), budget),
        Strategy::Dynamic => {
            let n = gains.len();
            match waterfill(&AllocationProblem::new(gains, n_0, budget)?) {
                // Every active gain is zero: capacity is zero under any split.
                Err(Error::DegenerateProblem) => uniform_allocation(n, budget),
                other => other,
            }
        }
    }
}

pub fn pattern_capacity(
    selection: &MappingSelection,
    pattern: &ActivationPattern,
    budget: f64,
    n_0: f64,
    strategy: Strategy,
) -> Result<PatternCapacity> {
    let n_s = selection.n_s();
    if pattern.n_s != n_s {
        return Err(Error::DimensionMismatch {
            expected: n_s,
            actual: pattern.n_s,
        });
    }
    if let Some(&j) = pattern.active_positions.iter().find(|&&j| j >= n_s) {
        return Err(Error::DimensionMismatch {
            expected: n_s,
            actual: j + 1,
        });
    }
    if !(n_0.is_finite() && n_0 > 0.0) {
        return Err(Error::param("n_0", format!("{n_0} must be finite and > 0")));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::param("budget", format!("{budget} must be finite and >= 0")));
    }

    if pattern.is_zero_active() {
        let hop_capacity = selection.comp_gains.map(|g| half_log2_1p(budget * g / n_0));
        let alloc = uniform_allocation(1, budget)?;
        return Ok(PatternCapacity {
            k: pattern.k,
            capacity: hop_capacity[0].min(hop_capacity[1]),
            alloc_hop1: alloc.clone(),
            alloc_hop2: alloc,
            hop_capacity,
        });
    }

    let active = |gains: &[f64]| -> Vec<f64> { pattern.active_positions.iter().map(|&j| gains[j]).collect() };
    let g1 = active(&selection.effective_gains_hop1);
    let g2 = active(&selection.effective_gains_hop2);
    let (alloc_hop1, alloc_hop2) = match (strategy, selection.mode) {
        (Strategy::Dynamic, SelectionMode::Centralized) => {
            let links = g1.iter().zip(&g2).map(|(a, b)| a.min(*b)).collect();
            let alloc = allocate(links, n_0, budget, strategy)?;
            (alloc.clone(), alloc)
        }
        (Strategy::Dynamic, SelectionMode::Decentralized) => (
            allocate(g1.clone(), n_0, budget, strategy)?,
            allocate(g2.clone(), n_0, budget, strategy)?,
        ),
        (Strategy::Uniform, _) => {
            let alloc = uniform_allocation(g1.len(), budget)?;
            (alloc.clone(), alloc)
        }
    };

    let mut capacity = 0.0;
    let mut hop_capacity = [0.0; 2];
    for n in 0..g1.len() {
        let c1 = half_log2_1p(alloc_hop1.powers[n] * g1[n] / n_0);
        let c2 = half_log2_1p(alloc_hop2.powers[n] * g2[n] / n_0);
        capacity += c1.min(c2);
        hop_capacity[0] += c1;
        hop_capacity[1] += c2;
    }
    Ok(PatternCapacity {
        k: pattern.k,
        capacity,
        alloc_hop1,
        alloc_hop2,
        hop_capacity,
    })
}

/// Average of `C(k)` over activation patterns for one channel realization.
///
/// `rng` is only consumed by [`PatternPolicy::Sampled`]. Patterns are summed
/// in a fixed order so the result is reproducible.
pub fn average_capacity_over_patterns<R: Rng + ?Sized>(
    selection: &MappingSelection,
    budget: f64,
    n_0: f64,
    strategy: Strategy,
    policy: PatternPolicy,
    enumeration_cap: u64,
    rng: &mut R,
) -> Result<f64> {
    let n_s = selection.n_s();
    let count = pattern_count(n_s)?;
    match policy {
        PatternPolicy::Exact => {
            if count > enumeration_cap {
                return Err(Error::EnumerationCapExceeded {
                    n_s,
                    cap: enumeration_cap,
                });
            }
            let mut sum = 0.0;
            for k in 1..=count {
                let pattern = pattern_from_index(k, n_s)?;
                sum += pattern_capacity(selection, &pattern, budget, n_0, strategy)?.capacity;
            }
            Ok(sum / count as f64)
        }
        PatternPolicy::Sampled(draws) => {
            if draws == 0 {
                return Err(Error::param("draws", "sampled policy needs at least one draw"));
            }
            let mut sum = 0.0;
            for _ in 0..draws {
                let pattern = pattern_from_index(sample_pattern_index(rng, n_s), n_s)?;
                sum += pattern_capacity(selection, &pattern, budget, n_0, strategy)?.capacity;
            }
            Ok(sum / draws as f64)
        }
    }
}

/// Uniform draw from `1..=2^n_s` (`n_s <= 63`).
pub fn sample_pattern_index<R: Rng + ?Sized>(rng: &mut R, n_s: usize) -> u64 {
    let mask = (1u64 << n_s) - 1;
    1 + (rng.random::<u64>() & mask)
}
