//! Backward exploration of the set of vertices whose randomness can reach a
//! queue at time 0.
//!
//! The dominating system puts an independent M/M/1 queue (arrivals `mλ`,
//! services 1) at every vertex. Stationary birth-death chains are
//! reversible, so each queue's past is simulated forward in reversed time
//! `s = -t` with the same rates: a reversed up-jump from 0 is a time at which
//! the forward queue emptied, and a reversed down-jump is a forward arrival.
//! The graph dynamic is reversible with uniform stationary law, so the graph
//! is sampled uniform at its first use and evolved forward in `s`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::hypergraph::LayeredPartition;
use crate::params::ModelParams;
use crate::seed::{self, SimRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationOutcome {
    /// Number of distinct vertices that were ever active.
    pub h_size: u32,
    /// The exploration ran past `window` before every vertex went dormant.
    pub censored: bool,
    pub window: f64,
    /// New vertices brought in by each explored vertex, in activation order.
    pub offspring: Vec<u32>,
}

struct Walk {
    s: f64,
    y: u32,
    active: bool,
    order: usize,
}

#[derive(PartialEq, PartialOrd)]
struct Time(f64);

impl Eq for Time {}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Explorer<'a> {
    params: &'a ModelParams,
    up: f64,
    walks: HashMap<u32, Walk>,
    heap: BinaryHeap<Reverse<(Time, u32)>>,
    offspring: Vec<u32>,
    queues: SimRng,
    graph_rng: SimRng,
    graph: Option<(LayeredPartition, f64)>,
    nbhd: Vec<u32>,
}

impl Explorer<'_> {
    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.queues);
        e / rate
    }

    fn walk(&mut self, v: u32) -> &mut Walk {
        if !self.walks.contains_key(&v) {
            // stationary geometric start: P(y = x) = (1 - mλ)(mλ)^x
            let mut y = 0;
            while self.queues.random::<f64>() < self.up {
                y += 1;
            }
            let order = self.walks.len();
            self.walks.insert(
                v,
                Walk {
                    s: 0.0,
                    y,
                    active: false,
                    order,
                },
            );
            self.offspring.push(0);
        }
        self.walks.get_mut(&v).unwrap()
    }

    /// Runs `v`'s walk from where it was left up to time `to`.
    fn catch_up(&mut self, v: u32, to: f64) {
        loop {
            let (s, y) = {
                let w = self.walk(v);
                (w.s, w.y)
            };
            let rate = self.up + if y > 0 { 1.0 } else { 0.0 };
            let next = s + self.exp(rate);
            let up = self.queues.random::<f64>() * rate < self.up;
            let w = self.walk(v);
            if next > to {
                w.s = to;
                return;
            }
            w.s = next;
            w.y = if up { y + 1 } else { y - 1 };
        }
    }

    fn schedule(&mut self, v: u32) {
        let (s, y) = {
            let w = &self.walks[&v];
            (w.s, w.y)
        };
        let rate = self.up + if y > 0 { 1.0 } else { 0.0 };
        let next = s + self.exp(rate);
        self.heap.push(Reverse((Time(next), v)));
    }

    /// Activates `v` at `s`; returns whether it was new to the exploration.
    fn activate(&mut self, v: u32, s: f64) -> bool {
        let fresh = !self.walks.contains_key(&v);
        if self.walk(v).active {
            return false;
        }
        self.catch_up(v, s);
        self.walk(v).active = true;
        self.schedule(v);
        fresh
    }

    fn neighbourhood_at(&mut self, v: u32, s: f64) {
        let kappa = self.params.kappa();
        match &mut self.graph {
            Some((g, at)) => {
                g.evolve(kappa, s - *at, &mut self.graph_rng);
                *at = s;
            }
            None => self.graph = Some((LayeredPartition::sample(self.params, &mut self.graph_rng), s)),
        }
        self.graph.as_ref().unwrap().0.closed_neighbourhood_into(v, &mut self.nbhd);
    }
}

/// Explores backwards from `root` over reversed time `[0, window]`.
pub fn explore_dependence(params: &ModelParams, window: f64, root: u32, seed: u64) -> ExplorationOutcome {
    let up = f64::from(params.m()) * params.lambda();
    assert!(up < 1.0, "the dominating queues need mλ < 1");
    assert!(root < params.n(), "root out of range");
    let mut ex = Explorer {
        params,
        up,
        walks: HashMap::new(),
        heap: BinaryHeap::new(),
        offspring: Vec::new(),
        queues: seed::stream(seed, 1),
        graph_rng: seed::stream(seed, 2),
        graph: None,
        nbhd: Vec::with_capacity(params.m() as usize),
    };
    let mut labels = seed::stream(seed, 3);
    ex.activate(root, 0.0);
    let mut censored = false;
    while let Some(Reverse((Time(s), v))) = ex.heap.pop() {
        if s > window {
            censored = true;
            break;
        }
        let rate = up + if ex.walks[&v].y > 0 { 1.0 } else { 0.0 };
        let is_up = ex.queues.random::<f64>() * rate < up;
        let w = ex.walks.get_mut(&v).unwrap();
        w.s = s;
        if is_up {
            let emptied = w.y == 0;
            w.y += 1;
            if emptied {
                w.active = false;
                continue;
            }
        } else {
            // a forward arrival at v, labelled with a uniform position of
            // its neighbourhood: every vertex there becomes relevant
            w.y -= 1;
            let parent = w.order;
            ex.neighbourhood_at(v, s);
            let site = ex.nbhd[labels.random_range(0..ex.nbhd.len())];
            ex.neighbourhood_at(site, s);
            let reached = ex.nbhd.clone();
            for u in reached {
                if ex.activate(u, s) {
                    ex.offspring[parent] += 1;
                }
            }
        }
        ex.schedule(v);
    }
    ExplorationOutcome {
        h_size: ex.walks.len() as u32,
        censored,
        window,
        offspring: ex.offspring,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_lambda_gives_singletons() {
        let p = ModelParams::new(64, 1, 1, 1e-4, 1.0).unwrap();
        let window = 20.0 / (2.0 * 1e-4);
        let singles = (0..2000)
            .filter(|&i| {
                let o = explore_dependence(&p, window, 0, i);
                !o.censored && o.h_size == 1
            })
            .count();
        assert!(singles as f64 >= 0.99 * 2000.0);
    }

    #[test]
    fn offspring_accounts_for_size() {
        let p = ModelParams::new(64, 1, 1, 0.05, 1.0).unwrap();
        for seed in 0..500 {
            let o = explore_dependence(&p, 1e4, 3, seed);
            assert!(o.h_size >= 1);
            assert_eq!(o.offspring.iter().sum::<u32>() + 1, o.h_size);
            assert_eq!(o.offspring.len() as u32, o.h_size);
        }
    }

    #[test]
    fn short_window_censors() {
        let p = ModelParams::new(64, 1, 1, 0.05, 1.0).unwrap();
        let censored = (0..200).filter(|&s| explore_dependence(&p, 1e-3, 0, s).censored).count();
        assert!(censored > 150);
    }

    #[test]
    fn deterministic() {
        let p = ModelParams::new(64, 1, 1, 0.05, 1.0).unwrap();
        assert_eq!(explore_dependence(&p, 1e4, 0, 7), explore_dependence(&p, 1e4, 0, 7));
    }
}
