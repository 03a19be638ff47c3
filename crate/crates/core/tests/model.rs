use dynamarket::hypergraph::LayeredPartition;
use dynamarket::seed;
use dynamarket::{apply_arrival, apply_service, derive_m, ModelParams, ParamError, QueueVector};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (u32, u32, u32)> {
    (1u32..4, 1u32..4, 1u32..8).prop_map(|(r, d, blocks)| (2 * r * blocks, r, d))
}

proptest! {
    #[test]
    fn neighbourhoods_are_symmetric((n, r, d) in shape(), s in any::<u64>(), kappa in 0.0f64..5.0) {
        let p = ModelParams::new(n, r, d, 0.1, kappa).unwrap();
        let mut rng = seed::stream(s, 0);
        let mut g = LayeredPartition::sample(&p, &mut rng);
        g.evolve(kappa, 3.0, &mut rng);
        prop_assert!(g.verify().is_ok());
        for v in 0..n {
            let nb = g.closed_neighbourhood(v);
            prop_assert_eq!(nb.len() as u32, derive_m(r, d));
            prop_assert_eq!(nb[0], v);
            for &u in &nb[1..] {
                prop_assert!(g.closed_neighbourhood(u)[1..].contains(&v));
            }
        }
    }

    #[test]
    fn text_form_round_trips((n, r, d) in shape(), s in any::<u64>()) {
        let p = ModelParams::new(n, r, d, 0.1, 1.0).unwrap();
        let g = LayeredPartition::sample(&p, &mut seed::stream(s, 0));
        let back = LayeredPartition::from_text(&g.to_text()).unwrap();
        prop_assert_eq!(back.canonical_key(), g.canonical_key());
        prop_assert!(back.matches(&p));
    }

    #[test]
    fn arrivals_join_a_shortest_queue(lengths in proptest::collection::vec(0u32..4, 4..12), s in any::<u64>()) {
        let mut q = QueueVector::from_lengths(lengths.clone());
        let nbhd: Vec<u32> = (0..lengths.len() as u32).step_by(2).collect();
        let shortest = nbhd.iter().map(|&v| lengths[v as usize]).min().unwrap();
        let v = apply_arrival(&mut q, &nbhd, &mut seed::stream(s, 1));
        prop_assert!(nbhd.contains(&v));
        prop_assert_eq!(lengths[v as usize], shortest);
        prop_assert_eq!(q.total(), lengths.iter().map(|&x| u64::from(x)).sum::<u64>() + 1);
        prop_assert!(apply_service(&mut q, v));
        prop_assert_eq!(q.lengths(), lengths.as_slice());
    }
}

#[test]
fn parameter_rules() {
    let p = ModelParams::new(12, 3, 2, 0.01, 0.0).unwrap();
    assert_eq!(p.m(), 11);
    assert_eq!(p.block_size(), 6);
    assert_eq!(ModelParams::new(14, 2, 1, 0.1, 1.0), Err(ParamError::Divisibility { n: 14, r: 2 }));
    assert!(ModelParams::new(4, 1, 1, 0.0, 1.0).is_err());
    assert!(ModelParams::new(4, 1, 1, 0.1, f64::NAN).is_err());
    assert!(ModelParams::new(4, 1, 0, 0.1, 1.0).is_err());
}

#[test]
fn idle_service_is_a_no_op() {
    let mut q = QueueVector::empty(3);
    assert!(!apply_service(&mut q, 1));
    assert_eq!(q.total(), 0);
}
