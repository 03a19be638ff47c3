use dynamarket::hypergraph::LayeredPartition;
use dynamarket::engine::run_replicas;
use dynamarket::{simulate, EngineConfig, ModelParams};
use proptest::prelude::*;

fn config(n: u32, r: u32, d: u32, lambda: f64, kappa: f64, horizon: f64, seed: u64) -> EngineConfig {
    EngineConfig::new(ModelParams::new(n, r, d, lambda, kappa).unwrap(), horizon, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn work_is_conserved(
        blocks in 1u32..6, r in 1u32..3, d in 1u32..3,
        lambda in 0.05f64..0.95, kappa in 0.0f64..4.0, seed in any::<u64>(),
    ) {
        let n = 2 * r * blocks;
        let run = simulate(&config(n, r, d, lambda, kappa, 50.0, seed)).unwrap();
        let served = run.services - run.idle_services;
        prop_assert_eq!(run.final_queues.total(), run.arrivals - served);
        prop_assert_eq!(run.events_total, run.arrivals + run.services + run.swaps);
        prop_assert!(run.graph_changes <= run.swaps);
        prop_assert!(run.busy_fractions().iter().all(|&b| (0.0..=1.0).contains(&b)));
        let g = LayeredPartition::from_text(&run.final_graph).unwrap();
        prop_assert!(g.verify().is_ok());
        prop_assert!(u64::from(run.max_queue_seen) >= run.final_queues.lengths().iter().copied().max().map(u64::from).unwrap());
    }
}

#[test]
fn reruns_are_identical() {
    let cfg = config(64, 2, 2, 0.3, 1.5, 200.0, 99);
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    assert_ne!(simulate(&cfg.clone().with_seed(100)).unwrap(), simulate(&cfg).unwrap());
}

#[test]
fn replicas_use_distinct_streams() {
    let runs = run_replicas(&config(16, 1, 1, 0.5, 1.0, 100.0, 3), 4).unwrap();
    assert_eq!(runs.len(), 4);
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(runs[i].seed, runs[j].seed);
            assert_ne!(runs[i].final_queues, runs[j].final_queues);
        }
    }
}

#[test]
fn frozen_graph_without_swaps() {
    let cfg = config(32, 2, 2, 0.2, 0.0, 500.0, 11);
    let (_, g0) = cfg.initial_state();
    let run = simulate(&cfg).unwrap();
    assert_eq!(run.swaps, 0);
    assert_eq!(run.final_graph, g0.to_text());
}

#[test]
fn light_load_busy_fraction_near_lambda() {
    // total work arrives at rate n*lambda and each server clears one per unit
    let run = simulate(&config(256, 1, 1, 0.2, 1.0, 2000.0, 5)).unwrap();
    let mean: f64 = run.busy_fractions().iter().sum::<f64>() / 256.0;
    assert!((mean - 0.2).abs() < 0.01, "{mean}");
}
