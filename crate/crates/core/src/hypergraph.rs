//! The dynamic layered equal partition.
//!
//! Each of the `d` layers is a bijection between vertices and slots; slot `s`
//! belongs to block `s / 2r`, so a layer is an equal partition of `[n]` into
//! blocks of `2r` vertices. A stub swap exchanges the slots of two vertices in
//! one layer, which is O(1) on the pair of arrays and never needs adjacency
//! lists. The union of the layers is the `d`-regular `2r`-uniform hypergraph.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{OracleError, PartitionParseError};
use crate::params::ModelParams;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Layer {
    slot_of: Vec<u32>,
    vertex_at: Vec<u32>,
}

impl Layer {
    fn identity(n: u32) -> Self {
        let ids: Vec<u32> = (0..n).collect();
        Self {
            slot_of: ids.clone(),
            vertex_at: ids,
        }
    }

    fn from_vertex_order(vertex_at: Vec<u32>) -> Self {
        let mut slot_of = vec![0; vertex_at.len()];
        for (s, &v) in vertex_at.iter().enumerate() {
            slot_of[v as usize] = s as u32;
        }
        Self { slot_of, vertex_at }
    }

    #[inline]
    fn swap(&mut self, v: u32, u: u32) {
        let sv = self.slot_of[v as usize];
        let su = self.slot_of[u as usize];
        self.slot_of[v as usize] = su;
        self.slot_of[u as usize] = sv;
        self.vertex_at[su as usize] = v;
        self.vertex_at[sv as usize] = u;
    }
}

/// `d` independent equal partitions of `[n]` into blocks of size `2r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredPartition {
    n: u32,
    block: u32,
    layers: Vec<Layer>,
}

impl LayeredPartition {
    /// The fixed partition `{0..2r}, {2r..4r}, ...` in every layer.
    pub fn identity(params: &ModelParams) -> Self {
        Self {
            n: params.n(),
            block: params.block_size(),
            layers: (0..params.d()).map(|_| Layer::identity(params.n())).collect(),
        }
    }

    /// Independent uniform partitions per layer (uniform slot bijections).
    pub fn sample<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Self {
        let mut g = Self::identity(params);
        for layer in &mut g.layers {
            let mut order: Vec<u32> = (0..params.n()).collect();
            order.shuffle(rng);
            *layer = Layer::from_vertex_order(order);
        }
        g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.layers.len() as u32
    }

    pub fn block_size(&self) -> u32 {
        self.block
    }

    /// Whether this partition has the shape `params` describes.
    pub fn matches(&self, params: &ModelParams) -> bool {
        self.n == params.n() && self.block == params.block_size() && self.d() == params.d()
    }

    pub fn slot_of(&self, layer: usize, v: u32) -> u32 {
        self.layers[layer].slot_of[v as usize]
    }

    pub fn vertex_at(&self, layer: usize, slot: u32) -> u32 {
        self.layers[layer].vertex_at[slot as usize]
    }

    pub fn block_of(&self, layer: usize, v: u32) -> u32 {
        self.slot_of(layer, v) / self.block
    }

    /// Exchanges the slots of `v` and `u` in `layer`. Returns whether the
    /// induced hypergraph changed, i.e. `v` and `u` were in different blocks.
    ///
    /// Panics on out-of-range arguments.
    #[inline]
    pub fn swap_membership(&mut self, layer: usize, v: u32, u: u32) -> bool {
        assert!(v < self.n && u < self.n, "vertex out of range");
        let block = self.block;
        let l = &mut self.layers[layer];
        let changed = l.slot_of[v as usize] / block != l.slot_of[u as usize] / block;
        l.swap(v, u);
        changed
    }

    /// One stub election: a uniform (vertex, layer) swaps with a uniform
    /// target vertex, which may be itself. Returns whether the hypergraph
    /// changed.
    #[inline]
    pub fn random_swap<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let layer = if self.layers.len() == 1 {
            0
        } else {
            rng.random_range(0..self.layers.len())
        };
        let word = rng.next_u64();
        let v = bounded(word as u32, self.n, rng) as usize;
        let u = bounded((word >> 32) as u32, self.n, rng) as usize;
        let block = self.block;
        let l = &mut self.layers[layer];
        debug_assert!(v < l.slot_of.len() && u < l.slot_of.len());
        // SAFETY: `bounded` returns values below n, and slot_of/vertex_at are
        // bijections on 0..n of length n.
        let (sv, su) = unsafe {
            let sv = *l.slot_of.get_unchecked(v);
            let su = *l.slot_of.get_unchecked(u);
            *l.slot_of.get_unchecked_mut(v) = su;
            *l.slot_of.get_unchecked_mut(u) = sv;
            *l.vertex_at.get_unchecked_mut(su as usize) = v as u32;
            *l.vertex_at.get_unchecked_mut(sv as usize) = u as u32;
            (sv, su)
        };
        if block.is_power_of_two() {
            (sv ^ su) >= block
        } else {
            sv / block != su / block
        }
    }

    /// Runs the swap dynamic for `duration` at per-stub rate `kappa`.
    /// Returns `(swaps, hypergraph-changing swaps)`.
    pub fn evolve<R: Rng + ?Sized>(&mut self, kappa: f64, duration: f64, rng: &mut R) -> (u64, u64) {
        let count = sample_poisson(f64::from(self.n) * f64::from(self.d()) * kappa * duration, rng);
        let mut changed = 0;
        for _ in 0..count {
            changed += u64::from(self.random_swap(rng));
        }
        (count, changed)
    }

    /// `v` followed, layer by layer, by the other `2r - 1` vertices of its
    /// block in slot order. Always exactly `m` entries; a vertex may repeat
    /// across layers.
    pub fn closed_neighbourhood(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(1 + self.layers.len() * (self.block as usize - 1));
        self.closed_neighbourhood_into(v, &mut out);
        out
    }

    pub fn closed_neighbourhood_into(&self, v: u32, out: &mut Vec<u32>) {
        out.clear();
        out.push(v);
        for layer in &self.layers {
            let start = layer.slot_of[v as usize] / self.block * self.block;
            for &w in &layer.vertex_at[start as usize..(start + self.block) as usize] {
                if w != v {
                    out.push(w);
                }
            }
        }
    }

    /// Partner of `v` when layer 0 is cut into consecutive slot pairs. Pairs
    /// nest inside the `2r` blocks, so the matching is a subgraph of layer 0.
    pub fn pair_mate(&self, v: u32) -> u32 {
        let s = self.layers[0].slot_of[v as usize];
        self.layers[0].vertex_at[(s ^ 1) as usize]
    }

    /// Blocks of one layer, each listed in slot order.
    pub fn blocks(&self, layer: usize) -> Vec<Vec<u32>> {
        self.layers[layer]
            .vertex_at
            .chunks(self.block as usize)
            .map(<[u32]>::to_vec)
            .collect()
    }

    /// Canonical label per vertex: the smallest vertex in its block, per
    /// layer. Two states induce the same hypergraph iff the labels agree.
    pub fn canonical_key(&self) -> Vec<u32> {
        let mut key = Vec::with_capacity(self.n as usize * self.layers.len());
        for layer in &self.layers {
            let mins: Vec<u32> = layer
                .vertex_at
                .chunks(self.block as usize)
                .map(|b| *b.iter().min().unwrap())
                .collect();
            key.extend(layer.slot_of.iter().map(|&s| mins[(s / self.block) as usize]));
        }
        key
    }

    /// Checks the bijection invariants of every layer.
    pub fn verify(&self) -> Result<(), String> {
        if self.block == 0 || self.n % self.block != 0 {
            return Err(format!("block size {} does not divide n = {}", self.block, self.n));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.slot_of.len() != self.n as usize || layer.vertex_at.len() != self.n as usize {
                return Err(format!("layer {i} has wrong length"));
            }
            for v in 0..self.n {
                let s = layer.slot_of[v as usize];
                if s >= self.n || layer.vertex_at[s as usize] != v {
                    return Err(format!("layer {i}: vertex_at(slot_of({v})) != {v}"));
                }
            }
            for b in layer.vertex_at.chunks(self.block as usize) {
                let mut sorted = b.to_vec();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != self.block as usize {
                    return Err(format!("layer {i}: block {b:?} repeats a vertex"));
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump: a header line, then one line per layer with blocks
    /// separated by ` | ` and vertices in slot order.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, PartitionParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(PartitionParseError::Syntax {
            line: 1,
            message: "empty input".into(),
        })?;
        let fields = parse_header(header).ok_or_else(|| PartitionParseError::Syntax {
            line: hline,
            message: format!("expected `# layered-partition n=<n> r=<r> d=<d>`, got `{header}`"),
        })?;
        let (n, r, d) = fields;
        let block = 2 * r;
        let mut layers = Vec::new();
        for (lineno, line) in lines {
            let mut order = Vec::with_capacity(n as usize);
            for (bi, chunk) in line.split('|').enumerate() {
                let block_vs: Result<Vec<u32>, _> = chunk.split_whitespace().map(str::parse).collect();
                let block_vs = block_vs.map_err(|e| PartitionParseError::Syntax {
                    line: lineno,
                    message: format!("block {bi}: {e}"),
                })?;
                if block_vs.len() != block as usize {
                    return Err(PartitionParseError::Syntax {
                        line: lineno,
                        message: format!("block {bi} has {} vertices, expected {block}", block_vs.len()),
                    });
                }
                order.extend(block_vs);
            }
            let layer = layers.len();
            if order.len() != n as usize || order.iter().any(|&v| v >= n) {
                return Err(PartitionParseError::NotBijection {
                    layer,
                    message: format!("expected a permutation of 0..{n}"),
                });
            }
            let mut seen = vec![false; n as usize];
            for &v in &order {
                if std::mem::replace(&mut seen[v as usize], true) {
                    return Err(PartitionParseError::NotBijection {
                        layer,
                        message: format!("vertex {v} appears twice"),
                    });
                }
            }
            layers.push(Layer::from_vertex_order(order));
        }
        if layers.len() != d as usize {
            return Err(PartitionParseError::Syntax {
                line: hline,
                message: format!("header declares d={d} but {} layers follow", layers.len()),
            });
        }
        Ok(Self { n, block, layers })
    }
}

fn parse_header(header: &str) -> Option<(u32, u32, u32)> {
    let rest = header.strip_prefix('#')?.trim().strip_prefix("layered-partition")?;
    let mut n = None;
    let mut r = None;
    let mut d = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        let v: u32 = v.parse().ok()?;
        match k {
            "n" => n = Some(v),
            "r" => r = Some(v),
            "d" => d = Some(v),
            _ => return None,
        }
    }
    let (n, r, d) = (n?, r?, d?);
    (r > 0 && n % (2 * r) == 0).then_some((n, r, d))
}

impl fmt::Display for LayeredPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# layered-partition n={} r={} d={}", self.n, self.block / 2, self.d())?;
        for layer in 0..self.layers.len() {
            let blocks: Vec<String> = self
                .blocks(layer)
                .iter()
                .map(|b| b.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
                .collect();
            writeln!(f, "{}", blocks.join(" | "))?;
        }
        Ok(())
    }
}

/// Uniform integer in `0..n` from the 32-bit word `x`, redrawing from `rng`
/// only on the rare rejection (multiply-shift with exact rejection).
#[inline]
fn bounded<R: Rng + ?Sized>(mut x: u32, n: u32, rng: &mut R) -> u32 {
    let mut m = u64::from(x) * u64::from(n);
    if (m as u32) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u32) < threshold {
            x = rng.next_u32();
            m = u64::from(x) * u64::from(n);
        }
    }
    (m >> 32) as u32
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Number of equal partitions of `[n]` into blocks of size `block`, as f64.
pub fn partition_count(n: u32, block: u32) -> f64 {
    let b = n / block;
    let mut log = ln_factorial(n) - ln_factorial(b);
    log -= f64::from(b) * ln_factorial(block);
    log.exp().round()
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|i| f64::from(i).ln()).sum()
}

/// All equal partitions of `[n]` into blocks of `block` vertices, each as
/// the canonical per-vertex label (smallest vertex of the block).
pub fn enumerate_partitions(n: u32, block: u32) -> Vec<Vec<u32>> {
    fn rec(label: &mut Vec<Option<u32>>, block: u32, out: &mut Vec<Vec<u32>>) {
        let Some(first) = label.iter().position(Option::is_none) else {
            out.push(label.iter().map(|l| l.unwrap()).collect());
            return;
        };
        let free: Vec<usize> = (first + 1..label.len()).filter(|&i| label[i].is_none()).collect();
        let mut chosen = Vec::with_capacity(block as usize - 1);
        combos(&free, block as usize - 1, 0, &mut chosen, &mut |mates| {
            label[first] = Some(first as u32);
            for &m in mates {
                label[m] = Some(first as u32);
            }
            rec(label, block, out);
            label[first] = None;
            for &m in mates {
                label[m] = None;
            }
        });
    }
    fn combos(
        items: &[usize],
        k: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for i in start..items.len() {
            chosen.push(items[i]);
            combos(items, k, i + 1, chosen, f);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![None; n as usize], block, &mut out);
    out
}

/// Outcome of a chi-square goodness-of-fit test against a uniform law.
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub categories: usize,
    pub samples: u64,
    pub p_value: f64,
}

impl ChiSquareReport {
    pub fn uniform(counts: &[u64]) -> Self {
        let samples: u64 = counts.iter().sum();
        let k = counts.len();
        if k <= 1 {
            return Self {
                statistic: 0.0,
                categories: k,
                samples,
                p_value: 1.0,
            };
        }
        let expected = samples as f64 / k as f64;
        let statistic = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p_value = 1.0 - ChiSquared::new((k - 1) as f64).unwrap().cdf(statistic);
        Self {
            statistic,
            categories: k,
            samples,
            p_value,
        }
    }
}

/// Largest number of joint partition states `stationarity_check` enumerates.
pub const PARTITION_ENUMERATION_CAP: f64 = 1e5;

/// Runs the swap dynamic from the fixed identity partition for `burn_time`,
/// records the induced partition, and repeats with fresh randomness
/// `samples` times; returns the chi-square statistic against the uniform law
/// over all partitions.
pub fn stationarity_check<R: Rng + ?Sized>(
    params: &ModelParams,
    burn_time: f64,
    samples: u64,
    rng: &mut R,
) -> Result<ChiSquareReport, OracleError> {
    let per_layer = partition_count(params.n(), params.block_size());
    let joint = per_layer.powi(params.d() as i32);
    if joint > PARTITION_ENUMERATION_CAP {
        return Err(OracleError::CapExceeded {
            states: joint as u128,
            cap: PARTITION_ENUMERATION_CAP as u64,
            hint: "use n <= 8 with r = 1".into(),
        });
    }
    let labels = enumerate_partitions(params.n(), params.block_size());
    let index: HashMap<Vec<u32>, usize> = labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let k = index.len();
    let mut counts = vec![0u64; k.pow(params.d())];
    let base = LayeredPartition::identity(params);
    for _ in 0..samples {
        let mut g = base.clone();
        g.evolve(params.kappa(), burn_time, rng);
        let key = g.canonical_key();
        let mut cell = 0usize;
        for layer_key in key.chunks(params.n() as usize) {
            cell = cell * k + index[layer_key];
        }
        counts[cell] += 1;
    }
    Ok(ChiSquareReport::uniform(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    fn params(n: u32, r: u32, d: u32, kappa: f64) -> ModelParams {
        ModelParams::new(n, r, d, 0.1, kappa).unwrap()
    }

    #[test]
    fn trivial_partitions() {
        let mut rng = Pcg64Mcg::seed_from_u64(3);
        let g = LayeredPartition::sample(&params(2, 1, 1, 1.0), &mut rng);
        assert_eq!(g.blocks(0).len(), 1);
        let mut b = g.blocks(0)[0].clone();
        b.sort();
        assert_eq!(b, vec![0, 1]);
        let g = LayeredPartition::sample(&params(4, 2, 1, 1.0), &mut rng);
        let mut b = g.blocks(0)[0].clone();
        b.sort();
        assert_eq!(b, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sample_is_uniform_over_matchings() {
        // (n-1)!! = 3 perfect matchings of 4 vertices.
        let p = params(4, 1, 1, 1.0);
        let labels = enumerate_partitions(4, 2);
        assert_eq!(labels.len(), 3);
        let index: HashMap<Vec<u32>, usize> = labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut rng = Pcg64Mcg::seed_from_u64(17);
        let mut counts = [0u64; 3];
        for _ in 0..100_000 {
            let g = LayeredPartition::sample(&p, &mut rng);
            counts[index[&g.canonical_key()]] += 1;
        }
        let report = ChiSquareReport::uniform(&counts);
        assert!(report.p_value > 0.01, "{report:?}");
    }

    #[test]
    fn swap_examples() {
        // {0,1},{2,3}; swapping 1 and 2 gives {0,2},{1,3}.
        let p = params(4, 1, 1, 1.0);
        let mut g = LayeredPartition::identity(&p);
        assert!(g.swap_membership(0, 1, 2));
        assert_eq!(g.blocks(0), vec![vec![0, 2], vec![1, 3]]);
        let before = g.clone();
        assert!(!g.swap_membership(0, 1, 1));
        assert_eq!(g, before);
        // block mates: the induced hypergraph is unchanged
        assert!(!g.swap_membership(0, 0, 2));
        assert_eq!(g.canonical_key(), before.canonical_key());
    }

    #[test]
    fn neighbourhood_examples() {
        let p = params(4, 1, 1, 1.0);
        let g = LayeredPartition::identity(&p);
        assert_eq!(g.closed_neighbourhood(0), vec![0, 1]);
        let p = params(4, 2, 1, 1.0);
        let g = LayeredPartition::identity(&p);
        assert_eq!(g.closed_neighbourhood(2), vec![2, 0, 1, 3]);
    }

    #[test]
    fn no_op_fraction_matches_block_share() {
        // a uniform target lands in the elector's block with probability 2r/n
        let p = params(16, 2, 1, 1.0);
        let mut rng = Pcg64Mcg::seed_from_u64(8);
        let mut g = LayeredPartition::sample(&p, &mut rng);
        let trials = 200_000u64;
        let mut same = 0u64;
        for _ in 0..trials {
            same += u64::from(!g.random_swap(&mut rng));
        }
        let q = 4.0 / 16.0;
        let sigma = (trials as f64 * q * (1.0 - q)).sqrt();
        assert!((same as f64 - trials as f64 * q).abs() < 3.0 * sigma, "same = {same}");
    }

    #[test]
    fn change_rate_is_kappa_times_n_minus_block() {
        let p = params(12, 1, 2, 1.5);
        let mut rng = Pcg64Mcg::seed_from_u64(21);
        let mut g = LayeredPartition::sample(&p, &mut rng);
        let t = 5_000.0;
        let (_, changed) = g.evolve(p.kappa(), t, &mut rng);
        // per layer the hypergraph changes at rate kappa (n - 2r)
        let expected = 2.0 * p.kappa() * (12.0 - 2.0) * t;
        assert!((changed as f64 - expected).abs() < 3.0 * expected.sqrt(), "changed = {changed}");
    }

    #[test]
    fn layers_are_independent() {
        // indicator "0 and 1 share a block" in layer 0 vs layer 1
        let p = params(8, 1, 2, 1.0);
        let mut rng = Pcg64Mcg::seed_from_u64(2);
        let mut g = LayeredPartition::sample(&p, &mut rng);
        let samples = 50_000;
        let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
        for _ in 0..samples {
            g.evolve(p.kappa(), 2.0, &mut rng);
            let x = f64::from(u8::from(g.block_of(0, 0) == g.block_of(0, 1)));
            let y = f64::from(u8::from(g.block_of(1, 0) == g.block_of(1, 1)));
            a += x;
            b += y;
            ab += x * y;
        }
        let s = f64::from(samples);
        let cov = ab / s - (a / s) * (b / s);
        let q = 1.0 / 7.0;
        // successive samples are nearly independent after 2 time units
        let sigma = q * (1.0 - q) / s.sqrt();
        assert!(cov.abs() < 4.0 * sigma, "cov = {cov}");
    }

    #[test]
    fn stationarity_small_cases() {
        let mut rng = Pcg64Mcg::seed_from_u64(99);
        let r = stationarity_check(&params(2, 1, 1, 1.0), 1.0, 100, &mut rng).unwrap();
        assert_eq!(r.categories, 1);
        assert_eq!(r.p_value, 1.0);
        let r = stationarity_check(&params(4, 1, 1, 1.0), 20.0, 30_000, &mut rng).unwrap();
        assert_eq!(r.categories, 3);
        assert!(r.p_value > 0.01, "{r:?}");
        let r = stationarity_check(&params(6, 1, 1, 2.0), 20.0, 30_000, &mut rng).unwrap();
        assert_eq!(r.categories, 15);
        assert!(r.p_value > 0.01, "{r:?}");
    }

    #[test]
    fn stationarity_refuses_large() {
        let mut rng = Pcg64Mcg::seed_from_u64(1);
        let err = stationarity_check(&params(20, 1, 1, 1.0), 1.0, 10, &mut rng).unwrap_err();
        assert!(matches!(err, OracleError::CapExceeded { .. }));
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partition_count(4, 2), 3.0);
        assert_eq!(partition_count(6, 2), 15.0);
        assert_eq!(partition_count(8, 2), 105.0);
        assert_eq!(partition_count(8, 4), 35.0);
        assert_eq!(enumerate_partitions(8, 2).len(), 105);
        assert_eq!(enumerate_partitions(8, 4).len(), 35);
    }

    #[test]
    fn text_round_trip() {
        let p = params(12, 1, 2, 1.0);
        let mut rng = Pcg64Mcg::seed_from_u64(4);
        let g = LayeredPartition::sample(&p, &mut rng);
        let text = g.to_text();
        assert_eq!(LayeredPartition::from_text(&text).unwrap(), g);
        let golden = "# layered-partition n=4 r=1 d=1\n0 2 | 1 3\n";
        let h = LayeredPartition::from_text(golden).unwrap();
        assert_eq!(h.closed_neighbourhood(1), vec![1, 3]);
        assert_eq!(h.to_text(), golden);
        assert!(LayeredPartition::from_text("# layered-partition n=4 r=1 d=1\n0 2 | 1 1\n").is_err());
        assert!(LayeredPartition::from_text("# layered-partition n=4 r=1 d=2\n0 2 | 1 3\n").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn swaps_preserve_bijection(seed in any::<u64>(), r in 1u32..3, d in 1u32..4, blocks in 1u32..6) {
            let p = params(2 * r * blocks, r, d, 1.0);
            let mut rng = Pcg64Mcg::seed_from_u64(seed);
            let mut g = LayeredPartition::sample(&p, &mut rng);
            for _ in 0..20_000 {
                g.random_swap(&mut rng);
            }
            prop_assert!(g.verify().is_ok());
            for v in 0..p.n() {
                prop_assert_eq!(g.closed_neighbourhood(v).len(), p.m() as usize);
            }
        }
    }

    #[test]
    fn million_swaps_keep_invariants() {
        let p = params(64, 2, 3, 1.0);
        let mut rng = Pcg64Mcg::seed_from_u64(1234);
        let mut g = LayeredPartition::sample(&p, &mut rng);
        for _ in 0..1_000_000 {
            g.random_swap(&mut rng);
        }
        g.verify().unwrap();
    }
}
