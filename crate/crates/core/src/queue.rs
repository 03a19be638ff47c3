//! Queue state and the elementary arrival/service transitions.

use std::ops::Index;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Deliberate defects used by the verification harness to check that the
/// acceptance criteria are sensitive to real bugs. Never set outside of that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Ties are always resolved towards the lowest vertex index.
    LowestIndexTieBreak,
    /// The arrival vertex is dropped from its own neighbourhood.
    OmitSelfFromNeighbourhood,
}

/// Queue lengths indexed by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueueVector(Vec<u32>);

impl QueueVector {
    pub fn empty(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_lengths(lengths: Vec<u32>) -> Self {
        Self(lengths)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lengths(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&q| u64::from(q)).sum()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Histogram `h[x] = #{v : Q_v = x}`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.max() as usize + 1];
        for &q in &self.0 {
            h[q as usize] += 1;
        }
        h
    }

    pub(crate) fn increment(&mut self, v: usize) {
        let q = &mut self.0[v];
        *q = q.checked_add(1).expect("queue length overflow");
    }

    /// Decrements `v` if nonempty; returns whether a customer left.
    pub(crate) fn decrement(&mut self, v: usize) -> bool {
        let q = &mut self.0[v];
        if *q > 0 {
            *q -= 1;
            true
        } else {
            false
        }
    }
}

impl Index<usize> for QueueVector {
    type Output = u32;

    fn index(&self, v: usize) -> &u32 {
        &self.0[v]
    }
}

/// Picks the vertex an arriving task joins: uniform over the distinct
/// vertices of `nbhd` attaining the minimum queue length. `tie` is a uniform
/// in `[0, 1)`; it is consumed even when the minimum is unique so that
/// coupled copies stay on the same random stream.
///
/// Panics if `nbhd` is empty.
pub fn choose_shortest(q: &QueueVector, nbhd: &[u32], tie: f64, fault: Fault) -> u32 {
    assert!(!nbhd.is_empty(), "empty neighbourhood: hypergraph invariant broken");
    let mut best = u32::MAX;
    // Neighbourhoods hold at most a few dozen entries; a fixed buffer keeps
    // the hot path allocation free.
    let mut minima = [0u32; 64];
    let mut count = 0usize;
    for &w in nbhd {
        let len = q[w as usize];
        if len < best {
            best = len;
            minima[0] = w;
            count = 1;
        } else if len == best && !minima[..count].contains(&w) {
            if count < minima.len() {
                minima[count] = w;
                count += 1;
            } else {
                return choose_shortest_slow(q, nbhd, tie, fault);
            }
        }
    }
    pick(&mut minima[..count], tie, fault)
}

fn choose_shortest_slow(q: &QueueVector, nbhd: &[u32], tie: f64, fault: Fault) -> u32 {
    let best = nbhd.iter().map(|&w| q[w as usize]).min().unwrap();
    let mut minima: Vec<u32> = Vec::new();
    for &w in nbhd {
        if q[w as usize] == best && !minima.contains(&w) {
            minima.push(w);
        }
    }
    pick(&mut minima, tie, fault)
}

fn pick(minima: &mut [u32], tie: f64, fault: Fault) -> u32 {
    if fault == Fault::LowestIndexTieBreak {
        return *minima.iter().min().unwrap();
    }
    let k = minima.len();
    let i = ((tie * k as f64) as usize).min(k - 1);
    minima[i]
}

/// Adds one task to the shortest queue of `nbhd` (uniform tie-break over
/// distinct minimal vertices). Returns the chosen vertex.
pub fn apply_arrival<R: Rng + ?Sized>(q: &mut QueueVector, nbhd: &[u32], rng: &mut R) -> u32 {
    let tie: f64 = rng.random();
    let v = choose_shortest(q, nbhd, tie, Fault::None);
    q.increment(v as usize);
    v
}

/// Serves one task at `v` if there is one; idle service is a no-op.
/// Returns whether a task left.
pub fn apply_service(q: &mut QueueVector, v: u32) -> bool {
    q.decrement(v as usize)
}
