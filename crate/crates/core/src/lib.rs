//! Power allocation for adaptive OFDM index modulation over a two-hop
//! decode-and-forward relay network.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws i.i.d. exponential (Rayleigh-faded) subcarrier gains per hop.
//! * [`mapping`] picks the `N_S` subcarriers used for index modulation, the
//!   complementary subcarrier for the all-inactive pattern, and enumerates
//!   activation patterns.
//! * [`waterfill`] solves the per-pattern power allocation exactly and checks
//!   KKT certificates.
//! * [`capacity`] evaluates the per-pattern network capacity and its average
//!   over activation patterns.
//! * [`experiment`] runs the Monte Carlo sweep over transmit-power-to-noise
//!   ratios with common random numbers and deterministic parallelism.
//! * [`cli`] is the command-line front end (`sweep`, `allocate`, `kkt-check`,
//!   `selftest`).

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod mapping;
pub mod waterfill;

pub use capacity::{
    average_capacity_over_patterns, pattern_capacity, PatternCapacity, PatternPolicy, Strategy,
};
pub use channel::{exp_cdf, sample_realization, trial_stream, ChannelParams, ChannelRealization};
pub use error::{Error, Result};
pub use experiment::{run_sweep, SweepConfig, SweepResult, SweepRow};
pub use mapping::{
    build_selection, link_gains, pattern_bit_length, pattern_from_index, select_centralized,
    select_decentralized, ActivationPattern, MappingSelection, SelectionMode,
};
pub use waterfill::{
    interior_allocation, uniform_allocation, verify_kkt, waterfill, AllocationProblem, Interior,
    KktReport, PowerAllocation,
};
