//! Monte Carlo sweep of average network capacity against `P_t / N0`.
//!
//! Trial `t` owns the random stream `(master_seed, t)`. Its channel
//! realization, and for sampled pattern policies its pattern draws, are
//! shared by every SNR point, selection mode, strategy and `N_S` so strategy
//! comparisons are paired. Trials run on a rayon pool but are folded into the
//! row statistics in trial order, so the output does not depend on the number
//! of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{average_capacity_over_patterns, PatternPolicy, Strategy, DEFAULT_ENUMERATION_CAP};
use crate::channel::{sample_realization, trial_stream, ChannelParams};
use crate::error::{Error, Result};
use crate::mapping::{
    build_selection, pattern_count, ActivationPattern, MappingSelection, SelectionMode, MAX_PATTERN_BITS,
};
use crate::waterfill::{waterfill, AllocationProblem};

/// Trials per rayon work item.
const CHUNK_TRIALS: u64 = 64;
/// Work items materialised at once before folding into the accumulators.
const CHUNKS_PER_BATCH: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_t: usize,
    pub n_s_list: Vec<usize>,
    pub snr_points_db: Vec<f64>,
    pub trials: u64,
    pub mu_1: f64,
    pub mu_2: f64,
    pub n_0: f64,
    pub modes: Vec<SelectionMode>,
    pub strategies: Vec<Strategy>,
    pub master_seed: u64,
    pub pattern_policy: PatternPolicy,
    pub enumeration_cap: u64,
}

impl Default for SweepConfig {
    /// Desk scale: 16 subcarriers, `N_S` in {2, 4, 8}, 0..=40 dB in 5 dB steps.
    fn default() -> Self {
        SweepConfig {
            n_t: 16,
            n_s_list: vec![2, 4, 8],
            snr_points_db: (0..=8).map(|i| 5.0 * f64::from(i)).collect(),
            trials: 10_000,
            mu_1: 1.0,
            mu_2: 1.0,
            n_0: 1.0,
            modes: SelectionMode::ALL.to_vec(),
            strategies: Strategy::ALL.to_vec(),
            master_seed: 1,
            pattern_policy: PatternPolicy::Exact,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, a)| items[..i].contains(a))
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        ChannelParams::new(self.n_t, self.mu_1, self.mu_2, self.n_0).map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::config(field, reason),
            other => other,
        })?;
        if self.n_s_list.is_empty() {
            return Err(Error::config("n_s", "list is empty"));
        }
        for &n_s in &self.n_s_list {
            if n_s < 1 || n_s >= self.n_t {
                return Err(Error::config(
                    "n_s",
                    format!("{n_s} must satisfy 1 <= n_s < n_t = {}", self.n_t),
                ));
            }
            if n_s > MAX_PATTERN_BITS {
                return Err(Error::config(
                    "n_s",
                    format!("{n_s} exceeds the supported maximum of {MAX_PATTERN_BITS}"),
                ));
            }
        }
        if has_duplicates(&self.n_s_list) {
            return Err(Error::config("n_s", "list contains duplicates"));
        }
        if self.snr_points_db.is_empty() {
            return Err(Error::config("snr_db", "list is empty"));
        }
        if let Some(x) = self.snr_points_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::config("snr_db", format!("{x} is not finite")));
        }
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.modes.is_empty() || has_duplicates(&self.modes) {
            return Err(Error::config("mode", "list must be nonempty without duplicates"));
        }
        if self.strategies.is_empty() || has_duplicates(&self.strategies) {
            return Err(Error::config("strategy", "list must be nonempty without duplicates"));
        }
        match self.pattern_policy {
            PatternPolicy::Sampled(0) => {
                return Err(Error::config("pattern_policy", "sampled policy needs at least one draw"))
            }
            PatternPolicy::Exact => {
                for &n_s in &self.n_s_list {
                    if pattern_count(n_s)? > self.enumeration_cap {
                        return Err(Error::EnumerationCapExceeded {
                            n_s,
                            cap: self.enumeration_cap,
                        });
                    }
                }
            }
            PatternPolicy::Sampled(_) => {}
        }
        Ok(())
    }

    pub fn channel_params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.n_t, self.mu_1, self.mu_2, self.n_0)
    }

    /// Transmit power `P_t = N0 10^(snr_db / 10)`.
    pub fn budget(&self, snr_db: f64) -> f64 {
        self.n_0 * 10f64.powf(snr_db / 10.0)
    }

    /// Row identities in output order: SNR, then mode, strategy, `N_S`.
    pub fn row_keys(&self) -> Vec<RowKey> {
        let mut keys = Vec::with_capacity(
            self.snr_points_db.len() * self.modes.len() * self.strategies.len() * self.n_s_list.len(),
        );
        for &snr_db in &self.snr_points_db {
            for &mode in &self.modes {
                for &strategy in &self.strategies {
                    for &n_s in &self.n_s_list {
                        keys.push(RowKey {
                            snr_db,
                            mode,
                            strategy,
                            n_s,
                        });
                    }
                }
            }
        }
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowKey {
    pub snr_db: f64,
    pub mode: SelectionMode,
    pub strategy: Strategy,
    pub n_s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub mode: SelectionMode,
    pub strategy: Strategy,
    pub n_t: usize,
    pub n_s: usize,
    pub mean_capacity: f64,
    /// Sample standard deviation over trials divided by `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn find(&self, snr_db: f64, mode: SelectionMode, strategy: Strategy, n_s: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.snr_db == snr_db && r.mode == mode && r.strategy == strategy && r.n_s == n_s)
    }
}

/// Per-trial average capacity for every row of `config`, in [`SweepConfig::row_keys`] order.
pub fn run_trial(config: &SweepConfig, params: &ChannelParams, trial: u64) -> Result<Vec<f64>> {
    let mut rng = trial_stream(config.master_seed, trial);
    let realization = sample_realization(params, &mut rng);
    // Pattern draws continue the trial stream; every row restarts from this state.
    let pattern_rng = rng;

    let selections: Vec<Vec<MappingSelection>> = config
        .modes
        .iter()
        .map(|&mode| {
            config
                .n_s_list
                .iter()
                .map(|&n_s| build_selection(&realization, n_s, mode))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(config.row_keys().len());
    for &snr_db in &config.snr_points_db {
        let budget = config.budget(snr_db);
        for by_n_s in &selections {
            for &strategy in &config.strategies {
                for selection in by_n_s {
                    values.push(average_capacity_over_patterns(
                        selection,
                        budget,
                        config.n_0,
                        strategy,
                        config.pattern_policy,
                        config.enumeration_cap,
                        &mut pattern_rng.clone(),
                    )?);
                }
            }
        }
    }
    Ok(values)
}

/// Running mean and sum of squared deviations (Welford), one per row.
#[derive(Debug, Clone)]
pub struct RowAccumulator {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RowAccumulator {
    pub fn new(rows: usize) -> Self {
        RowAccumulator {
            count: 0,
            mean: vec![0.0; rows],
            m2: vec![0.0; rows],
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(values) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    /// Standard errors; zero when fewer than two trials were pushed.
    pub fn std_errors(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.m2.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|m2| (m2 / (n - 1.0)).sqrt() / n.sqrt()).collect()
    }

    pub fn into_result(self, config: &SweepConfig) -> SweepResult {
        let std_errors = self.std_errors();
        let rows = config
            .row_keys()
            .into_iter()
            .zip(self.mean.iter().zip(std_errors))
            .map(|(key, (&mean_capacity, std_error))| SweepRow {
                snr_db: key.snr_db,
                mode: key.mode,
                strategy: key.strategy,
                n_t: config.n_t,
                n_s: key.n_s,
                mean_capacity,
                std_error,
                trials: self.count,
            })
            .collect();
        SweepResult { rows }
    }
}

/// Runs every trial and hands the per-trial row values to `visit` in trial order.
pub fn for_each_trial<F>(config: &SweepConfig, mut visit: F) -> Result<()>
where
    F: FnMut(u64, &[f64]),
{
    config.validate()?;
    let params = config.channel_params()?;
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let mut first_chunk = 0;
    while first_chunk < chunks {
        let last_chunk = (first_chunk + CHUNKS_PER_BATCH).min(chunks);
        let batch: Vec<Vec<Vec<f64>>> = (first_chunk..last_chunk)
            .into_par_iter()
            .map(|c| {
                let end = ((c + 1) * CHUNK_TRIALS).min(config.trials);
                (c * CHUNK_TRIALS..end)
                    .map(|t| run_trial(config, &params, t))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut trial = first_chunk * CHUNK_TRIALS;
        for values in batch.iter().flatten() {
            visit(trial, values);
            trial += 1;
        }
        first_chunk = last_chunk;
    }
    Ok(())
}

/// Runs the sweep on the current rayon pool (the global pool by default).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let mut acc = RowAccumulator::new(config.row_keys().len());
    for_each_trial(config, |_, values| acc.push(values))?;
    Ok(acc.into_result(config))
}

/// Runs the sweep on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(config: &SweepConfig, workers: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| run_sweep(config))
}

/// `max_n |P_n - P_t/N_A| / (P_t/N_A)` of the waterfilling solution.
pub fn uniform_deviation(gains: &[f64], n_0: f64, budget: f64) -> Result<f64> {
    if gains.iter().any(|g| *g <= 0.0) {
        return Err(Error::param("gains", "every gain must be > 0"));
    }
    if !(budget > 0.0) {
        return Err(Error::param("budget", format!("{budget} must be > 0")));
    }
    let alloc = waterfill(&AllocationProblem::new(gains.to_vec(), n_0, budget)?)?;
    let share = budget / gains.len() as f64;
    Ok(alloc
        .powers
        .iter()
        .map(|p| (p - share).abs() / share)
        .fold(0.0, f64::max))
}

/// Relative deviation from the uniform split for each budget.
///
/// Centralized selections are measured on the link gains; decentralized ones
/// report the larger deviation of the two hops.
pub fn high_snr_convergence_check(
    selection: &MappingSelection,
    pattern: &ActivationPattern,
    n_0: f64,
    budgets: &[f64],
) -> Result<Vec<f64>> {
    if pattern.n_s != selection.n_s() {
        return Err(Error::DimensionMismatch {
            expected: selection.n_s(),
            actual: pattern.n_s,
        });
    }
    if pattern.is_zero_active() {
        return Err(Error::param("pattern", "needs at least one active position"));
    }
    let pick = |gains: &[f64]| -> Vec<f64> { pattern.active_positions.iter().map(|&j| gains[j]).collect() };
    let gain_sets = match selection.mode {
        SelectionMode::Centralized => vec![pick(&selection.effective_link_gains())],
        SelectionMode::Decentralized => vec![
            pick(&selection.effective_gains_hop1),
            pick(&selection.effective_gains_hop2),
        ],
    };
    budgets
        .iter()
        .map(|&budget| {
            gain_sets
                .iter()
                .map(|g| uniform_deviation(g, n_0, budget))
                .try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
        })
        .collect()
}

/// Whether waterfilling puts the whole budget on the strongest position.
///
/// That happens exactly when `P_t <= N0/g_(2) - N0/g_(1)` (second-strongest
/// against strongest threshold). The prediction is evaluated with the same
/// threshold offset the solver uses and checked against the solver output;
/// a disagreement is reported as [`Error::ConcentrationMismatch`].
pub fn low_snr_concentration_check(problem: &AllocationProblem) -> Result<bool> {
    let gains = problem.gains();
    if gains.len() < 2 {
        return Err(Error::param("gains", "needs at least two positions"));
    }
    if gains.iter().any(|g| *g <= 0.0) {
        return Err(Error::param("gains", "every gain must be > 0"));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    let threshold = |n: usize| problem.n_0() / gains[n];
    order.sort_by(|&a, &b| threshold(a).total_cmp(&threshold(b)).then(a.cmp(&b)));
    let (strongest, second) = (order[0], order[1]);
    let predicted = problem.budget() <= threshold(second) - threshold(strongest);

    let alloc = waterfill(problem)?;
    let observed = alloc.support == [strongest];
    if predicted != observed && problem.budget() > 0.0 {
        return Err(Error::ConcentrationMismatch { predicted, observed });
    }
    Ok(observed)
}
