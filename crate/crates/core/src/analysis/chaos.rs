//! Dependence between a few queues at stationarity.
//!
//! Each replica is run to the burn-in time and contributes its whole
//! queue-length histogram. By exchangeability, the law of `x` distinct
//! labelled queues is estimated without bias by counting ordered `x`-tuples
//! of distinct vertices (falling factorials), and compared with the product
//! of the pooled one-queue marginals.

use serde::Serialize;

use crate::engine::{run_replicas_map, simulate, EngineConfig};
use crate::error::SimError;

/// Lengths at or above this share one category.
pub const L_CAP: u32 = 6;
const MIN_REPLICAS: usize = 50;

#[derive(Clone, Debug, Serialize)]
pub struct ChaosEstimate {
    pub tv: f64,
    pub x: u32,
    pub replicas: usize,
    pub burn_in: f64,
}

/// Estimates `TV(law(Q_1..Q_x), marginal^{⊗x})` from `replicas`
/// independent copies observed at time `burn_in`.
pub fn chaos_test(cfg: &EngineConfig, x: u32, replicas: usize, burn_in: f64) -> Result<ChaosEstimate, SimError> {
    let n = cfg.params.n();
    if x == 0 || x > 3 || x > n {
        return Err(SimError::Refused(format!("x = {x} must be 1, 2 or 3 and at most n")));
    }
    if replicas < MIN_REPLICAS {
        return Err(SimError::Refused(format!(
            "{replicas} replicas are too few for the joint support; need {MIN_REPLICAS}"
        )));
    }
    let cats = L_CAP as usize + 1;
    let base = cfg.clone().with_horizon(burn_in);
    let hists: Vec<Vec<u64>> = run_replicas_map(&base, replicas, |_, c| {
        let s = simulate(&c)?;
        let mut h = vec![0u64; cats];
        for &q in s.final_queues.lengths() {
            h[q.min(L_CAP) as usize] += 1;
        }
        Ok(h)
    })?;
    let tuples = cats.pow(x);
    let falling: f64 = (0..x).map(|i| f64::from(n - i)).product();
    let mut joint = vec![0.0; tuples];
    let mut marginal = vec![0.0; cats];
    let mut labels = vec![0usize; x as usize];
    for h in &hists {
        for (c, &k) in h.iter().enumerate() {
            marginal[c] += k as f64 / f64::from(n);
        }
        for (t, slot) in joint.iter_mut().enumerate() {
            decode(t, cats, &mut labels);
            let mut count = 1.0;
            for i in 0..labels.len() {
                let repeats = labels[..i].iter().filter(|&&l| l == labels[i]).count() as f64;
                count *= h[labels[i]] as f64 - repeats;
            }
            *slot += count / falling;
        }
    }
    let r = hists.len() as f64;
    marginal.iter_mut().for_each(|m| *m /= r);
    let mut l1 = 0.0;
    for (t, j) in joint.iter().enumerate() {
        decode(t, cats, &mut labels);
        let product: f64 = labels.iter().map(|&l| marginal[l]).product();
        l1 += (j / r - product).abs();
    }
    Ok(ChaosEstimate {
        tv: (0.5 * l1).clamp(0.0, 1.0),
        x,
        replicas,
        burn_in,
    })
}

fn decode(mut t: usize, cats: usize, out: &mut [usize]) {
    for o in out.iter_mut() {
        *o = t % cats;
        t /= cats;
    }
}
