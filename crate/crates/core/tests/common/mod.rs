//! Test-only oracles, independent of the library's solution paths.

#![allow(dead_code)]

use std::f64::consts::LN_2;

/// `sum_n 1/2 log2(1 + P_n g_n / N0)`, written out independently.
pub fn objective(gains: &[f64], powers: &[f64], n_0: f64) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| 0.5 * (1.0 + p * g / n_0).log2())
        .sum()
}

/// Euclidean projection onto `{x >= 0, sum x = budget}` by bisection on the shift.
fn project_simplex(y: &[f64], budget: f64) -> Vec<f64> {
    let mass = |tau: f64| y.iter().map(|v| (v - tau).max(0.0)).sum::<f64>();
    let mut lo = y.iter().cloned().fold(f64::INFINITY, f64::min) - budget;
    let mut hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    y.iter().map(|v| (v - tau).max(0.0)).collect()
}

/// Accelerated projected gradient ascent (FISTA with adaptive restart) on the
/// power simplex, run until the projected-gradient step stalls.
pub fn projected_gradient_oracle(gains: &[f64], n_0: f64, budget: f64) -> Vec<f64> {
    let n = gains.len();
    let grad = |x: &[f64]| -> Vec<f64> {
        gains
            .iter()
            .zip(x)
            .map(|(g, p)| g / (2.0 * LN_2 * (n_0 + g * p)))
            .collect()
    };
    // Curvature of each term is largest at zero power.
    let lipschitz = gains.iter().map(|g| g * g / (2.0 * LN_2 * n_0 * n_0)).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;

    let mut x = vec![budget / n as f64; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut f_prev = objective(gains, &x, n_0);
    let mut momentum = false;
    for _ in 0..500_000 {
        let g = grad(&y);
        let ascent: Vec<f64> = y.iter().zip(&g).map(|(v, d)| v + step * d).collect();
        let x_next = project_simplex(&ascent, budget);
        let f_next = objective(gains, &x_next, n_0);
        if momentum && f_next < f_prev {
            // Overshoot: drop momentum and retake a plain step from x.
            t = 1.0;
            y = x.clone();
            momentum = false;
            continue;
        }
        let moved = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a + beta * (a - b)).max(0.0))
            .collect();
        momentum = beta > 0.0;
        x = x_next;
        t = t_next;
        f_prev = f_prev.max(f_next);
        if moved <= 1e-13 * budget.max(1.0) {
            // Confirm with a plain projected step from x before stopping.
            let g = grad(&x);
            let plain: Vec<f64> = x.iter().zip(&g).map(|(v, d)| v + step * d).collect();
            let residual = project_simplex(&plain, budget)
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if residual <= 1e-13 * budget.max(1.0) {
                break;
            }
            t = 1.0;
            y = x.clone();
            momentum = false;
        }
    }
    x
}

/// Best `n_s`-subset by exhaustive enumeration of `sum_{n in S} metric[n]`,
/// returned with its objective. Ties keep the first subset in bitmask order.
pub fn best_subset(metric: &[f64], n_s: usize) -> (Vec<usize>, f64) {
    let n_t = metric.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for mask in 0u32..(1 << n_t) {
        if mask.count_ones() as usize != n_s {
            continue;
        }
        let subset: Vec<usize> = (0..n_t).filter(|i| mask >> i & 1 == 1).collect();
        let value: f64 = subset.iter().map(|&i| metric[i]).sum();
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((subset, value));
        }
    }
    best.expect("at least one subset")
}

/// Strongest index outside `subset`, lowest index on ties.
pub fn best_outside(metric: &[f64], subset: &[usize]) -> usize {
    (0..metric.len())
        .filter(|i| !subset.contains(i))
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if metric[b] >= metric[i] => Some(b),
            _ => Some(i),
        })
        .expect("nonempty complement")
}
