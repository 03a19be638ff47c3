//! Grand couplings driven by one shared stream of marks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Driver, QueueEvent};
use crate::error::SimError;
use crate::hypergraph::LayeredPartition;
use crate::params::ModelParams;
use crate::queue::{choose_shortest, Fault, QueueVector};
use crate::seed;

const STREAM_COUPLING: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceResult {
    pub time: f64,
    pub capped: bool,
}

/// `⌈ln n⌉` tasks at every even vertex, none elsewhere.
pub fn loaded_half(n: u32) -> QueueVector {
    let h = f64::from(n).ln().ceil() as u32;
    QueueVector::from_lengths((0..n).map(|v| if v % 2 == 0 { h } else { 0 }).collect())
}

/// First time two copies started from `q_a` and `q_b` agree, when they share
/// the graph trajectory, event times, sites, and tie-break uniforms.
pub fn coalescence_time(
    params: &ModelParams,
    q_a: &QueueVector,
    q_b: &QueueVector,
    seed: u64,
    cap: f64,
) -> Result<CoalescenceResult, SimError> {
    let n = params.n() as usize;
    if q_a.len() != n || q_b.len() != n {
        return Err(SimError::InitialQueues {
            got: q_a.len().min(q_b.len()),
            expected: n,
        });
    }
    let mut a = q_a.clone();
    let mut b = q_b.clone();
    let mut differ = (0..n).filter(|&v| a[v] != b[v]).count();
    if differ == 0 {
        return Ok(CoalescenceResult {
            time: 0.0,
            capped: false,
        });
    }
    let mut g = LayeredPartition::sample(params, &mut seed::stream(seed, 0));
    let mut driver = Driver::new(params, seed);
    let mut nbhd = Vec::with_capacity(params.m() as usize);
    loop {
        let t = driver.next_time();
        if t > cap {
            return Ok(CoalescenceResult { time: cap, capped: true });
        }
        match driver.event_at(t) {
            QueueEvent::Service(v) => {
                let v = v as usize;
                let before = a[v] != b[v];
                a.decrement(v);
                b.decrement(v);
                differ = differ + usize::from(a[v] != b[v]) - usize::from(before);
            }
            QueueEvent::Arrival { site, tie } => {
                driver.advance_graph(&mut g, t);
                g.closed_neighbourhood_into(site, &mut nbhd);
                let va = choose_shortest(&a, &nbhd, tie, Fault::None) as usize;
                let vb = choose_shortest(&b, &nbhd, tie, Fault::None) as usize;
                let mismatched = |a: &QueueVector, b: &QueueVector| {
                    usize::from(a[va] != b[va]) + usize::from(va != vb && a[vb] != b[vb])
                };
                let before = mismatched(&a, &b);
                a.increment(va);
                b.increment(vb);
                differ = differ + mismatched(&a, &b) - before;
            }
        }
        if differ == 0 {
            return Ok(CoalescenceResult { time: t, capped: false });
        }
    }
}

/// How the two systems in [`domination_coupled_run`] share service marks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceCoupling {
    /// Both systems serve the same vertex.
    Vertex,
    /// Both systems serve their `j`-th longest queue for a shared uniform `j`.
    Rank,
}

/// Violation counts of the comparison between the hypergraph model and the
/// matching cut out of its first layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub events: u64,
    pub coupling: ServiceCoupling,
    /// Events after which `#{v: Q_v ≥ k}` is larger in the hypergraph model
    /// for some `k`.
    pub level_violations: u64,
    /// Events after which the number of customers at position `≥ k` is
    /// larger in the hypergraph model for some `k`.
    pub position_violations: u64,
    pub first_violation: Option<u64>,
}

struct Levels {
    q: QueueVector,
    /// `at_least[k] = #{v : Q_v ≥ k}` for `k ≥ 1`
    at_least: Vec<u64>,
}

impl Levels {
    fn new(n: usize) -> Self {
        Self {
            q: QueueVector::empty(n),
            at_least: vec![n as u64, 0],
        }
    }

    fn join(&mut self, v: u32) {
        self.q.increment(v as usize);
        let len = self.q[v as usize] as usize;
        if self.at_least.len() <= len + 1 {
            self.at_least.resize(len + 2, 0);
        }
        self.at_least[len] += 1;
    }

    fn serve(&mut self, v: u32) {
        let len = self.q[v as usize] as usize;
        if self.q.decrement(v as usize) {
            self.at_least[len] -= 1;
        }
    }

    /// A vertex holding the `j`-th longest queue (0-based); among equal
    /// lengths the `u`-th fraction of them in vertex order.
    fn ranked(&self, j: u64, u: f64) -> u32 {
        let mut len = self.at_least.len() - 1;
        while len > 0 && self.at_least[len] <= j {
            len -= 1;
        }
        let same: Vec<u32> = (0..self.q.len() as u32).filter(|&v| self.q[v as usize] as usize == len).collect();
        same[((u * same.len() as f64) as usize).min(same.len() - 1)]
    }

    fn level(&self, k: usize) -> u64 {
        self.at_least.get(k).copied().unwrap_or(0)
    }
}

/// Runs the hypergraph model and the matching model given by cutting layer 0
/// into consecutive slot pairs, on one graph trajectory with shared arrival
/// sites and tie uniforms, for `events` queue events. The matching is a
/// subgraph of the hypergraph at all times.
pub fn domination_coupled_run(
    params: &ModelParams,
    events: u64,
    seed: u64,
    coupling: ServiceCoupling,
) -> DominationReport {
    let n = params.n() as usize;
    let mut g = LayeredPartition::sample(params, &mut seed::stream(seed, 0));
    let mut driver = Driver::new(params, seed);
    let mut marks = seed::stream(seed, STREAM_COUPLING);
    let mut hyper = Levels::new(n);
    let mut matched = Levels::new(n);
    let mut nbhd = Vec::with_capacity(params.m() as usize);
    let mut report = DominationReport {
        events,
        coupling,
        level_violations: 0,
        position_violations: 0,
        first_violation: None,
    };
    for e in 0..events {
        let t = driver.next_time();
        driver.advance_graph(&mut g, t);
        match driver.event_at(t) {
            QueueEvent::Service(v) => match coupling {
                ServiceCoupling::Vertex => {
                    hyper.serve(v);
                    matched.serve(v);
                }
                ServiceCoupling::Rank => {
                    let j = u64::from(v);
                    let u: f64 = marks.random();
                    let vh = hyper.ranked(j, u);
                    let vm = matched.ranked(j, u);
                    hyper.serve(vh);
                    matched.serve(vm);
                }
            },
            QueueEvent::Arrival { site, tie } => {
                g.closed_neighbourhood_into(site, &mut nbhd);
                hyper.join(choose_shortest(&hyper.q, &nbhd, tie, Fault::None));
                let pair = [site, g.pair_mate(site)];
                matched.join(choose_shortest(&matched.q, &pair, tie, Fault::None));
            }
        }
        let top = hyper.at_least.len().max(matched.at_least.len());
        let mut level_bad = false;
        let mut position_bad = false;
        let (mut sh, mut sm) = (0u64, 0u64);
        for k in (1..top).rev() {
            let (h, m) = (hyper.level(k), matched.level(k));
            level_bad |= h > m;
            sh += h;
            sm += m;
            position_bad |= sh > sm;
        }
        report.level_violations += u64::from(level_bad);
        report.position_violations += u64::from(position_bad);
        if (level_bad || position_bad) && report.first_violation.is_none() {
            report.first_violation = Some(e);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_starts_coalesce_immediately() {
        let p = ModelParams::new(16, 1, 1, 0.1, 1.0).unwrap();
        let q = loaded_half(16);
        let r = coalescence_time(&p, &q, &q, 1, 100.0).unwrap();
        assert_eq!(r.time, 0.0);
        assert!(!r.capped);
    }

    #[test]
    fn loaded_copies_coalesce() {
        let p = ModelParams::new(64, 1, 1, 0.1, 1.0).unwrap();
        let r = coalescence_time(&p, &loaded_half(64), &QueueVector::empty(64), 3, 1e4).unwrap();
        assert!(!r.capped);
        assert!(r.time > 0.0);
    }

    #[test]
    fn tiny_cap_is_reported() {
        let p = ModelParams::new(64, 1, 1, 0.1, 1.0).unwrap();
        let r = coalescence_time(&p, &loaded_half(64), &QueueVector::empty(64), 3, 0.5).unwrap();
        assert!(r.capped);
    }

    #[test]
    fn matching_model_coincides_with_itself() {
        let p = ModelParams::new(64, 1, 1, 0.1, 1.0).unwrap();
        for coupling in [ServiceCoupling::Vertex, ServiceCoupling::Rank] {
            let rep = domination_coupled_run(&p, 200_000, 9, coupling);
            assert_eq!(rep.level_violations, 0);
            assert_eq!(rep.position_violations, 0);
        }
    }

    #[test]
    fn rank_selection() {
        let mut l = Levels::new(4);
        l.join(2);
        l.join(2);
        l.join(0);
        assert_eq!(l.ranked(0, 0.0), 2);
        assert_eq!(l.ranked(1, 0.0), 0);
        assert_eq!(l.ranked(2, 0.0), 1);
        assert_eq!(l.ranked(3, 0.99), 3);
    }
}
