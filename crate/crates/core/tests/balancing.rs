// SPDX-License-Identifier: Apache-2.0
//! Simulation-derived delays against an independent longest-path
//! computation (repeated edge relaxation instead of memoized recursion).

use std::collections::BTreeMap;

use latbal_core::analyzer::compute_delays;
use latbal_core::fixtures::{build_ex1, random_dag, RandomDagParams, TABLE1_CASES};
use latbal_core::marker::MarkerWindow;
use latbal_core::netlist::{DelayAssignment, Netlist, NodeKind};
use latbal_core::oracle::{max_latency, static_delays};
use latbal_core::simulator::{simulate, SeededStimulus, SimConfig, SimMode};
use latbal_core::IntSimOutcome;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Arrival latency at every input port, by relaxing all edges until nothing
/// changes. Returns per-equalizer input latencies.
fn relaxed_arrivals(n: &Netlist) -> BTreeMap<String, Vec<u64>> {
    let count = n.nodes().len();
    let mut arrive: Vec<Vec<u64>> = n
        .nodes()
        .iter()
        .map(|x| vec![0; x.kind.input_count()])
        .collect();
    for _ in 0..=count {
        let mut changed = false;
        for e in n.edges() {
            let src = &n.node(e.from.node).kind;
            let ins = &arrive[e.from.node.0];
            let out = match src {
                NodeKind::Source { .. } => 0,
                NodeKind::Op { latency, .. } => {
                    ins.iter().copied().max().unwrap_or(0) + u64::from(*latency)
                }
                NodeKind::Lceq { delays, .. } => ins
                    .iter()
                    .zip(delays)
                    .map(|(&l, &d)| l + u64::from(d))
                    .max()
                    .unwrap_or(0),
                NodeKind::Sink => unreachable!(),
            };
            if arrive[e.to.node.0][e.to.port] != out {
                arrive[e.to.node.0][e.to.port] = out;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    n.lceqs()
        .map(|(id, leq, _)| (leq.to_string(), arrive[id.0].clone()))
        .collect()
}

fn relaxed_delays(n: &Netlist) -> DelayAssignment {
    let arrivals = relaxed_arrivals(n);
    let mut d = DelayAssignment::new();
    for (_, leq, delays) in n.lceqs() {
        let key = leq.to_string();
        let tot: Vec<u64> = arrivals[&key]
            .iter()
            .zip(delays)
            .map(|(&l, &x)| l + u64::from(x))
            .collect();
        let m = *tot.iter().max().unwrap();
        for (p, t) in tot.into_iter().enumerate() {
            d.set(key.clone(), p, (m - t) as u32);
        }
    }
    d
}

fn analyze(n: &Netlist, seed: u64) -> DelayAssignment {
    let cycles = max_latency(n).unwrap() + 40;
    let cfg = SimConfig::new(SimMode::Analysis, cycles, MarkerWindow::default());
    let out: IntSimOutcome = simulate(n, cfg, &mut SeededStimulus::new(seed)).unwrap();
    compute_delays(cfg.domain, out.report.unwrap().groups().unwrap()).unwrap()
}

fn final_passes(n: &Netlist, seed: u64) -> bool {
    let cycles = max_latency(n).unwrap() + 40;
    let cfg = SimConfig::new(SimMode::FinalTest, cycles, MarkerWindow::default());
    let out: IntSimOutcome = simulate(n, cfg, &mut SeededStimulus::new(seed)).unwrap();
    out.passed()
}

#[test]
fn example_system_matches_relaxation() {
    for p in TABLE1_CASES {
        let n = build_ex1(&p).unwrap();
        assert_eq!(analyze(&n, 1), relaxed_delays(&n), "{p:?}");
    }
}

#[test]
fn unbalanced_design_fails_final_test() {
    let n = build_ex1(&TABLE1_CASES[3]).unwrap();
    assert!(!final_passes(&n, 0));
    let fixed = n.apply_delays(&analyze(&n, 0)).unwrap();
    assert!(final_passes(&fixed, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn analysis_equals_longest_path(seed in any::<u64>()) {
        let n = random_dag(&mut ChaCha8Rng::seed_from_u64(seed), &RandomDagParams::default());
        let d = analyze(&n, seed);
        prop_assert_eq!(&d, &relaxed_delays(&n));
        prop_assert_eq!(&d, &static_delays(&n).unwrap());

        let fixed = n.apply_delays(&d).unwrap();
        prop_assert!(final_passes(&fixed, seed ^ 1));
        prop_assert!(analyze(&fixed, seed ^ 2).is_all_zero());
    }

    /// Starting from arbitrary configured delays, one pass still lands on a
    /// balanced design.
    #[test]
    fn converges_from_preset_delays(seed in any::<u64>(), preset in proptest::collection::vec(0u32..6, 32)) {
        let n = random_dag(&mut ChaCha8Rng::seed_from_u64(seed), &RandomDagParams::default());
        let mut start = DelayAssignment::new();
        let mut k = 0;
        for (_, leq, delays) in n.lceqs() {
            for p in 0..delays.len() {
                start.set(leq.to_string(), p, preset[k % preset.len()]);
                k += 1;
            }
        }
        let n = n.apply_delays(&start).unwrap();
        let extra = analyze(&n, seed);
        prop_assert_eq!(&extra, &relaxed_delays(&n));
        let fixed = n.apply_delays(&start.combined(&extra)).unwrap();
        prop_assert!(final_passes(&fixed, seed));
    }
}
