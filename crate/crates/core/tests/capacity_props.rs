use ofdmim::capacity::{
    average_capacity_over_patterns, pattern_capacity, PatternPolicy, Strategy as Alloc, DEFAULT_ENUMERATION_CAP,
};
use ofdmim::channel::{trial_stream, ChannelRealization};
use ofdmim::mapping::{build_selection, pattern_count, pattern_from_index, MappingSelection, SelectionMode};
use proptest::prelude::*;

fn realization_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (3usize..=9).prop_flat_map(|n_t| {
        (
            prop::collection::vec(1e-3f64..5.0, n_t),
            prop::collection::vec(1e-3f64..5.0, n_t),
            1..n_t.min(6),
        )
    })
}

fn budget_strategy() -> impl Strategy<Value = f64> {
    (-2.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

fn average(sel: &MappingSelection, budget: f64, strategy: Alloc) -> f64 {
    average_capacity_over_patterns(
        sel,
        budget,
        1.0,
        strategy,
        PatternPolicy::Exact,
        DEFAULT_ENUMERATION_CAP,
        &mut trial_stream(0, 0),
    )
    .unwrap()
}

fn patterns(n_s: usize) -> impl Iterator<Item = ofdmim::mapping::ActivationPattern> {
    (1..=pattern_count(n_s).unwrap()).map(move |k| pattern_from_index(k, n_s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn centralized_dynamic_dominates_per_pattern((h1, h2, n_s) in realization_strategy(), budget in budget_strategy()) {
        let r = ChannelRealization::new(h1, h2).unwrap();
        let sel = build_selection(&r, n_s, SelectionMode::Centralized).unwrap();
        for p in patterns(n_s) {
            let d = pattern_capacity(&sel, &p, budget, 1.0, Alloc::Dynamic).unwrap().capacity;
            let u = pattern_capacity(&sel, &p, budget, 1.0, Alloc::Uniform).unwrap().capacity;
            prop_assert!(d >= u - 1e-12 * d.max(1.0), "k = {}: {} < {}", p.k, d, u);
            if budget > 0.0 {
                prop_assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn decentralized_dynamic_dominates_per_hop((h1, h2, n_s) in realization_strategy(), budget in budget_strategy()) {
        let r = ChannelRealization::new(h1, h2).unwrap();
        let sel = build_selection(&r, n_s, SelectionMode::Decentralized).unwrap();
        for p in patterns(n_s) {
            let d = pattern_capacity(&sel, &p, budget, 1.0, Alloc::Dynamic).unwrap();
            let u = pattern_capacity(&sel, &p, budget, 1.0, Alloc::Uniform).unwrap();
            for hop in 0..2 {
                prop_assert!(d.hop_capacity[hop] >= u.hop_capacity[hop] - 1e-12 * d.hop_capacity[hop].max(1.0));
            }
        }
    }

    #[test]
    fn nondecreasing_in_budget((h1, h2, n_s) in realization_strategy(), budget in budget_strategy(), factor in 1.0f64..10.0) {
        let r = ChannelRealization::new(h1, h2).unwrap();
        for mode in SelectionMode::ALL {
            let sel = build_selection(&r, n_s, mode).unwrap();
            for strategy in Alloc::ALL {
                for p in patterns(n_s) {
                    let lo = pattern_capacity(&sel, &p, budget, 1.0, strategy).unwrap().capacity;
                    let hi = pattern_capacity(&sel, &p, budget * factor, 1.0, strategy).unwrap().capacity;
                    prop_assert!(hi >= lo - 1e-12 * hi.max(1.0));
                }
            }
        }
    }

    #[test]
    fn centralized_dynamic_nondecreasing_in_gains(
        (h1, h2, n_s) in realization_strategy(),
        budget in budget_strategy(),
        bump in 0.0f64..3.0,
        which in 0usize..18,
    ) {
        let r = ChannelRealization::new(h1.clone(), h2.clone()).unwrap();
        let (mut b1, mut b2) = (h1.clone(), h2.clone());
        let n_t = h1.len();
        if which % 2 == 0 { b1[(which / 2) % n_t] += bump } else { b2[(which / 2) % n_t] += bump }
        let bumped = ChannelRealization::new(b1, b2).unwrap();

        // Fixed selection: each pattern's capacity can only grow.
        let sel = build_selection(&r, n_s, SelectionMode::Centralized).unwrap();
        let mut sel_bumped = sel.clone();
        for (slot, &n) in sel.selected_hop1.iter().enumerate() {
            sel_bumped.effective_gains_hop1[slot] = bumped.gains_hop1()[n];
            sel_bumped.effective_gains_hop2[slot] = bumped.gains_hop2()[n];
        }
        sel_bumped.comp_gains = [bumped.gains_hop1()[sel.comp_hop1], bumped.gains_hop2()[sel.comp_hop2]];
        for p in patterns(n_s) {
            let before = pattern_capacity(&sel, &p, budget, 1.0, Alloc::Dynamic).unwrap().capacity;
            let after = pattern_capacity(&sel_bumped, &p, budget, 1.0, Alloc::Dynamic).unwrap().capacity;
            prop_assert!(after >= before - 1e-12 * after.max(1.0));
        }

        // With reselection the pattern average can only grow as well.
        let resel = build_selection(&bumped, n_s, SelectionMode::Centralized).unwrap();
        let before = average(&sel, budget, Alloc::Dynamic);
        let after = average(&resel, budget, Alloc::Dynamic);
        prop_assert!(after >= before - 1e-12 * after.max(1.0));
    }

    #[test]
    fn centralized_symmetric_under_hop_swap((h1, h2, n_s) in realization_strategy(), budget in budget_strategy()) {
        let r = ChannelRealization::new(h1, h2).unwrap();
        let a = build_selection(&r, n_s, SelectionMode::Centralized).unwrap();
        let b = build_selection(&r.swapped(), n_s, SelectionMode::Centralized).unwrap();
        for strategy in Alloc::ALL {
            let ca = average(&a, budget, strategy);
            let cb = average(&b, budget, strategy);
            prop_assert!((ca - cb).abs() <= 1e-12 * ca.max(1.0));
        }
    }
}

#[test]
fn sampled_agrees_with_exact() {
    let r = ChannelRealization::new(
        vec![0.3, 1.7, 0.9, 2.4, 0.1, 1.1, 0.6, 0.2],
        vec![1.2, 0.4, 2.2, 0.8, 0.5, 1.9, 0.7, 0.3],
    )
    .unwrap();
    let n_s = 4;
    let budget = 10.0;
    for mode in SelectionMode::ALL {
        let sel = build_selection(&r, n_s, mode).unwrap();
        for strategy in Alloc::ALL {
            let values: Vec<f64> = patterns(n_s)
                .map(|p| pattern_capacity(&sel, &p, budget, 1.0, strategy).unwrap().capacity)
                .collect();
            let exact = average(&sel, budget, strategy);
            let variance = values.iter().map(|v| (v - exact).powi(2)).sum::<f64>() / values.len() as f64;
            let draws = 100_000;
            let se = (variance / draws as f64).sqrt();
            let sampled = average_capacity_over_patterns(
                &sel,
                budget,
                1.0,
                strategy,
                PatternPolicy::Sampled(draws),
                DEFAULT_ENUMERATION_CAP,
                &mut trial_stream(3, 1),
            )
            .unwrap();
            assert!((sampled - exact).abs() <= 3.0 * se, "{mode} {strategy}: {sampled} vs {exact} (se {se})");
        }
    }
}
