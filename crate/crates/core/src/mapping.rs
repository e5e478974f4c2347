//! Mapping-scheme selection and subcarrier activation patterns.
//!
//! Physical subcarrier indices and pattern positions are zero-based here. A
//! selection keeps `N_S` subcarriers per hop ordered by descending gain, so
//! position `j` on hop 1 forwards to position `j` on hop 2.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Largest `N_S` for which a pattern index `k` fits in a `u64`.
pub const MAX_PATTERN_BITS: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Source and relay each select from their own hop gains.
    Decentralized,
    /// The source selects once from the link gains and the relay reuses it.
    Centralized,
}

impl SelectionMode {
    pub const ALL: [SelectionMode; 2] = [SelectionMode::Decentralized, SelectionMode::Centralized];

    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMode::Decentralized => "decentralized",
            SelectionMode::Centralized => "centralized",
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "decentralized" | "d" => Ok(SelectionMode::Decentralized),
            "centralized" | "c" => Ok(SelectionMode::Centralized),
            other => Err(Error::param("mode", format!("unknown selection mode {other:?}"))),
        }
    }
}

/// The chosen mapping scheme on both hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingSelection {
    pub mode: SelectionMode,
    pub selected_hop1: Vec<usize>,
    pub selected_hop2: Vec<usize>,
    pub comp_hop1: usize,
    pub comp_hop2: usize,
    pub effective_gains_hop1: Vec<f64>,
    pub effective_gains_hop2: Vec<f64>,
    /// Hop gains at the complementary subcarriers.
    pub comp_gains: [f64; 2],
}

impl MappingSelection {
    pub fn n_s(&self) -> usize {
        self.selected_hop1.len()
    }

    pub fn effective_gains(&self, hop: usize) -> &[f64] {
        match hop {
            1 => &self.effective_gains_hop1,
            2 => &self.effective_gains_hop2,
            _ => panic!("hop index {hop} is not 1 or 2"),
        }
    }

    /// Positionwise minimum of the two hops' effective gains.
    pub fn effective_link_gains(&self) -> Vec<f64> {
        self.effective_gains_hop1
            .iter()
            .zip(&self.effective_gains_hop2)
            .map(|(a, b)| a.min(*b))
            .collect()
    }
}

/// Orders by descending gain, then ascending index.
fn by_gain_desc(gains: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        gains[b]
            .partial_cmp(&gains[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

fn check_n_s(n_s: usize, n_t: usize) -> Result<()> {
    if n_s < 1 || n_s >= n_t {
        return Err(Error::param(
            "n_s",
            format!("{n_s} must satisfy 1 <= n_s < n_t = {n_t}"),
        ));
    }
    Ok(())
}

/// Picks the `n_s` strongest subcarriers and the strongest remaining one.
///
/// The selection sum is a sum of per-subcarrier increasing terms, so the top
/// `n_s` gains maximise it. Ties go to the lowest index.
pub fn select_decentralized(gains: &[f64], n_s: usize) -> Result<(Vec<usize>, usize)> {
    check_n_s(n_s, gains.len())?;
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(by_gain_desc(gains));
    let complementary = order[n_s];
    order.truncate(n_s);
    Ok((order, complementary))
}

/// Elementwise minimum of the two hop gain vectors.
pub fn link_gains(realization: &ChannelRealization) -> Vec<f64> {
    realization
        .gains_hop1()
        .iter()
        .zip(realization.gains_hop2())
        .map(|(a, b)| a.min(*b))
        .collect()
}

/// Shared selection for both hops from the link gains.
pub fn select_centralized(realization: &ChannelRealization, n_s: usize) -> Result<MappingSelection> {
    let links = link_gains(realization);
    let (selected, comp) = select_decentralized(&links, n_s)?;
    let h1 = realization.gains_hop1();
    let h2 = realization.gains_hop2();
    Ok(MappingSelection {
        mode: SelectionMode::Centralized,
        effective_gains_hop1: selected.iter().map(|&n| h1[n]).collect(),
        effective_gains_hop2: selected.iter().map(|&n| h2[n]).collect(),
        selected_hop2: selected.clone(),
        selected_hop1: selected,
        comp_hop1: comp,
        comp_hop2: comp,
        comp_gains: [h1[comp], h2[comp]],
    })
}

pub fn build_selection(
    realization: &ChannelRealization,
    n_s: usize,
    mode: SelectionMode,
) -> Result<MappingSelection> {
    match mode {
        SelectionMode::Centralized => select_centralized(realization, n_s),
        SelectionMode::Decentralized => {
            let h1 = realization.gains_hop1();
            let h2 = realization.gains_hop2();
            let (selected_hop1, comp_hop1) = select_decentralized(h1, n_s)?;
            let (selected_hop2, comp_hop2) = select_decentralized(h2, n_s)?;
            Ok(MappingSelection {
                mode,
                effective_gains_hop1: selected_hop1.iter().map(|&n| h1[n]).collect(),
                effective_gains_hop2: selected_hop2.iter().map(|&n| h2[n]).collect(),
                selected_hop1,
                selected_hop2,
                comp_hop1,
                comp_hop2,
                comp_gains: [h1[comp_hop1], h2[comp_hop2]],
            })
        }
    }
}

/// One on/off configuration of the `N_S` selected subcarriers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationPattern {
    /// One-based pattern index; `k = 1` is the all-inactive pattern.
    pub k: u64,
    pub n_s: usize,
    /// Zero-based positions into the ordered selection.
    pub active_positions: Vec<usize>,
}

impl ActivationPattern {
    pub fn n_a(&self) -> usize {
        self.active_positions.len()
    }

    /// True for the all-inactive pattern that falls back to the complementary subcarrier.
    pub fn is_zero_active(&self) -> bool {
        self.k == 1
    }
}

/// Number of patterns `2^n_s`.
pub fn pattern_count(n_s: usize) -> Result<u64> {
    if n_s > MAX_PATTERN_BITS {
        return Err(Error::param(
            "n_s",
            format!("{n_s} exceeds the {MAX_PATTERN_BITS}-bit pattern index"),
        ));
    }
    Ok(1u64 << n_s)
}

/// Bit `j` of `k - 1` (least significant first) switches position `j` on.
pub fn pattern_from_index(k: u64, n_s: usize) -> Result<ActivationPattern> {
    let max = pattern_count(n_s)?;
    if k < 1 || k > max {
        return Err(Error::PatternOutOfRange { k, max });
    }
    let bits = k - 1;
    let active_positions = (0..n_s).filter(|j| bits >> j & 1 == 1).collect();
    Ok(ActivationPattern {
        k,
        n_s,
        active_positions,
    })
}

/// Bits carried by one block: `N_S` on/off bits plus `b_m` per active symbol.
pub fn pattern_bit_length(pattern: &ActivationPattern, n_s: usize, b_m: u32) -> u64 {
    n_s as u64 + pattern.n_a() as u64 * u64::from(b_m)
}
