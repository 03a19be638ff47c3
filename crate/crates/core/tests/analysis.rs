use dynamarket::analysis::{
    coalescence_time, estimate_marginal, explore_dependence, linear_fit, loaded_half, median, read_rows, tv_distance,
    write_rows, ResultRow,
};
use dynamarket::oracle::{supermarket_marginal, DEFAULT_STATE_CAP};
use dynamarket::{EngineConfig, ModelParams, QueueVector};
use proptest::prelude::*;

fn pmf() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 1..8).prop_filter("mass", |v| v.iter().sum::<f64>() > 1e-6)
}

proptest! {
    #[test]
    fn tv_is_a_metric(p in pmf(), q in pmf(), r in pmf()) {
        let (pq, qp) = (tv_distance(&p, &q), tv_distance(&q, &p));
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!(tv_distance(&p, &p) < 1e-12);
        prop_assert!(pq <= tv_distance(&p, &r) + tv_distance(&r, &q) + 1e-12);
    }

    #[test]
    fn fit_recovers_a_line(slope in -5.0f64..5.0, icpt in -5.0f64..5.0) {
        let xs: Vec<f64> = (0..6).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| icpt + slope * x).collect();
        let fit = linear_fit(&xs, &ys);
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - icpt).abs() < 1e-9);
    }
}

#[test]
fn median_of_even_and_odd_samples() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

#[test]
fn rows_round_trip() {
    let p = ModelParams::new(8, 1, 1, 0.1, 1.0).unwrap();
    let rows = vec![
        ResultRow::new("sweep", &p, 100.0, 0, 1).stat("max_queue", 3.0, f64::NAN, 1),
        ResultRow::new("sweep", &p, 100.0, 1, 2).stat("marginal_p1", 0.12, 0.01, 40),
    ];
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows).unwrap();
    let back = read_rows(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[1].statistic, "marginal_p1");
    assert_eq!(back[1].value, 0.12);
    assert!(back[0].stderr.is_nan());
}

#[test]
fn identical_starts_coalesce_at_once() {
    let p = ModelParams::new(16, 1, 1, 0.1, 1.0).unwrap();
    let q = loaded_half(16);
    let res = coalescence_time(&p, &q, &q, 1, 100.0).unwrap();
    assert_eq!(res.time, 0.0);
    assert!(!res.capped);
    let res = coalescence_time(&p, &q, &QueueVector::empty(16), 1, 1e4).unwrap();
    assert!(res.time > 0.0 && !res.capped);
    assert!(coalescence_time(&p, &q, &QueueVector::empty(8), 1, 1.0).is_err());
}

#[test]
fn sampled_marginal_close_to_exact() {
    let p = ModelParams::new(4, 1, 1, 0.3, 1.0).unwrap();
    let exact = supermarket_marginal(&p, 10, DEFAULT_STATE_CAP).unwrap();
    let est = estimate_marginal(&EngineConfig::new(p, 5e4, 17), 100.0, 1.0).unwrap();
    let tv = tv_distance(&est, &exact);
    assert!(tv < 0.02, "{tv}");
}

#[test]
fn exploration_is_deterministic_and_sized() {
    let p = ModelParams::new(64, 1, 1, 0.01, 1.0).unwrap();
    let a = explore_dependence(&p, 100.0, 5, 42);
    assert_eq!(a.h_size, explore_dependence(&p, 100.0, 5, 42).h_size);
    assert!(a.h_size >= 1);
    assert_eq!(a.offspring.iter().sum::<u32>() + 1, a.h_size);
}
