//! Per-pattern power allocation.
//!
//! Maximises `sum_n 1/2 log2(1 + P_n g_n / N0)` subject to `sum_n P_n <= P_t`
//! and `P_n >= 0`. The optimum is the waterfilling solution
//! `P_n = [nu - N0/g_n]^+`; the water level `nu` absorbs the `1 / (2 ln 2)`
//! factor of the budget multiplier and is found exactly by sorting the
//! thresholds `N0/g_n` and accumulating them.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    gains: Vec<f64>,
    n_0: f64,
    budget: f64,
}

impl AllocationProblem {
    pub fn new(gains: Vec<f64>, n_0: f64, budget: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::param("gains", "at least one position is required"));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::param("gains", format!("{g} is not a finite nonnegative gain")));
        }
        if !(n_0.is_finite() && n_0 > 0.0) {
            return Err(Error::param("n_0", format!("{n_0} must be finite and > 0")));
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::param("budget", format!("{budget} must be finite and >= 0")));
        }
        Ok(AllocationProblem { gains, n_0, budget })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn n_0(&self) -> f64 {
        self.n_0
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Sum capacity `sum_n 1/2 log2(1 + P_n g_n / N0)` of `powers`.
    pub fn objective(&self, powers: &[f64]) -> f64 {
        sum_capacity(&self.gains, powers, self.n_0)
    }
}

/// `sum_n 1/2 log2(1 + P_n g_n / N0)`.
pub fn sum_capacity(gains: &[f64], powers: &[f64], n_0: f64) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| 0.5 * (p * g / n_0).ln_1p() / LN_2)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// `nu` with `P_n + N0/g_n = nu` on the support. `None` for allocations
    /// that are not waterfilling solutions (uniform) or have no finite level.
    pub water_level: Option<f64>,
    /// Positions receiving strictly positive power, ascending.
    pub support: Vec<usize>,
}

impl PowerAllocation {
    fn from_powers(powers: Vec<f64>, water_level: Option<f64>) -> Self {
        let support = powers
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(n, _)| n)
            .collect();
        PowerAllocation {
            powers,
            water_level,
            support,
        }
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Exact waterfilling by sort-and-cumulate.
///
/// With thresholds `t_(1) <= t_(2) <= ...` the active set is the longest
/// prefix whose last threshold stays below the water level. Working with
/// offsets `d_j = t_(j) - t_(1)` keeps the spent power equal to the budget to
/// within a few ulps of the budget even when thresholds dwarf it.
pub fn waterfill(problem: &AllocationProblem) -> Result<PowerAllocation> {
    let n_0 = problem.n_0;
    let budget = problem.budget;
    let mut order: Vec<usize> = (0..problem.len()).filter(|&n| problem.gains[n] > 0.0).collect();
    let threshold = |n: usize| n_0 / problem.gains[n];
    order.sort_by(|&a, &b| threshold(a).total_cmp(&threshold(b)).then(a.cmp(&b)));

    let mut powers = vec![0.0; problem.len()];
    let Some(&first) = order.first() else {
        if budget > 0.0 {
            return Err(Error::DegenerateProblem);
        }
        return Ok(PowerAllocation::from_powers(powers, None));
    };
    let floor = threshold(first);
    if budget == 0.0 {
        return Ok(PowerAllocation::from_powers(powers, Some(floor)));
    }

    // Position i (0-based) joins iff budget + sum_{j<i} d_j > i * d_i, i.e. the
    // water level of the first i positions lies strictly above t_(i).
    let mut offsets_sum = 0.0;
    let mut active = 0;
    for (i, &n) in order.iter().enumerate() {
        let offset = threshold(n) - floor;
        if i > 0 && budget + offsets_sum <= i as f64 * offset {
            break;
        }
        offsets_sum += offset;
        active = i + 1;
    }
    let level_above_floor = (budget + offsets_sum) / active as f64;
    for &n in &order[..active] {
        powers[n] = (level_above_floor - (threshold(n) - floor)).max(0.0);
    }
    Ok(PowerAllocation::from_powers(powers, Some(floor + level_above_floor)))
}

/// Equal split `budget / n_active`.
pub fn uniform_allocation(n_active: usize, budget: f64) -> Result<PowerAllocation> {
    if n_active == 0 {
        return Err(Error::param("n_active", "at least one active position is required"));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::param("budget", format!("{budget} must be finite and >= 0")));
    }
    Ok(PowerAllocation::from_powers(
        vec![budget / n_active as f64; n_active],
        None,
    ))
}

/// Outcome of the closed-form interior point.
#[derive(Debug, Clone, PartialEq)]
pub enum Interior {
    Feasible(PowerAllocation),
    /// Some entry is negative: the water level sits below that threshold.
    Infeasible { point: Vec<f64> },
}

/// `P_n = (P_t + sum_m N0/g_m) / N_A - N0/g_n`, the waterfilling solution
/// whenever every position is active.
pub fn interior_allocation(problem: &AllocationProblem) -> Result<Interior> {
    if problem.gains.iter().any(|g| *g <= 0.0) {
        return Err(Error::param("gains", "interior allocation needs every gain > 0"));
    }
    let thresholds: Vec<f64> = problem.gains.iter().map(|g| problem.n_0 / g).collect();
    let level = (problem.budget + thresholds.iter().sum::<f64>()) / problem.len() as f64;
    let point: Vec<f64> = thresholds.iter().map(|t| level - t).collect();
    if point.iter().any(|p| *p < 0.0) {
        return Ok(Interior::Infeasible { point });
    }
    Ok(Interior::Feasible(PowerAllocation::from_powers(point, Some(level))))
}

/// KKT certificate for an allocation.
///
/// Multipliers follow the Lagrangian `C + eps (P_t - sum P_n) + sum eps_n P_n`.
/// The stationarity residual is reported relative to `eps` so it is
/// comparable across gain and noise scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub epsilon: f64,
    pub epsilon_n: Vec<f64>,
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    /// Largest violation of `eps_n >= 0`.
    pub dual_residual: f64,
    /// Largest violation of `P_n >= 0`.
    pub primal_residual: f64,
    pub budget_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn marginal(gain: f64, power: f64, n_0: f64) -> f64 {
    gain / (2.0 * LN_2 * (n_0 + gain * power))
}

pub fn verify_kkt(problem: &AllocationProblem, allocation: &PowerAllocation, tol: f64) -> Result<KktReport> {
    let powers = &allocation.powers;
    if powers.is_empty() {
        return Err(Error::param("powers", "allocation is empty"));
    }
    if powers.len() != problem.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.len(),
            actual: powers.len(),
        });
    }
    let n_0 = problem.n_0;
    let gains = &problem.gains;

    // Reference position: the largest power. With nothing allocated, the
    // smallest dual-feasible eps is the largest marginal at zero power.
    let reference = (0..powers.len())
        .filter(|&n| powers[n] > 0.0)
        .max_by(|&a, &b| powers[a].total_cmp(&powers[b]).then(b.cmp(&a)));
    let epsilon = match reference {
        Some(n) => marginal(gains[n], powers[n], n_0),
        None => gains.iter().map(|g| marginal(*g, 0.0, n_0)).fold(0.0, f64::max),
    };

    let mut epsilon_n = Vec::with_capacity(powers.len());
    let mut stationarity: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    let mut dual: f64 = 0.0;
    let mut primal: f64 = 0.0;
    for (&g, &p) in gains.iter().zip(powers) {
        primal = primal.max(-p);
        let m = marginal(g, p.max(0.0), n_0);
        let eps_n = if p > 0.0 {
            let residual = if epsilon > 0.0 { (m - epsilon).abs() / epsilon } else { m.abs() };
            stationarity = stationarity.max(residual);
            0.0
        } else {
            epsilon - m
        };
        dual = dual.max(-eps_n);
        complementarity = complementarity.max((eps_n * p).abs());
        epsilon_n.push(eps_n);
    }
    let budget_residual = (powers.iter().sum::<f64>() - problem.budget).abs();
    let passed = [stationarity, complementarity, dual, primal, budget_residual]
        .iter()
        .all(|r| *r <= tol);
    Ok(KktReport {
        epsilon,
        epsilon_n,
        stationarity_residual: stationarity,
        complementarity_residual: complementarity,
        dual_residual: dual,
        primal_residual: primal,
        budget_residual,
        tolerance: tol,
        passed,
    })
}
