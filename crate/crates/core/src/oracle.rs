//! Exact stationary laws of small truncated chains and closed-form bounds.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;
use std::io::{BufRead, Write};

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::hypergraph::{enumerate_partitions, partition_count};
use crate::params::ModelParams;

/// Default limit on enumerated states.
pub const DEFAULT_STATE_CAP: u64 = 2_000_000;
/// Residual a stationary solve must reach.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
/// Chains up to this size are solved densely by state reduction.
const DENSE_LIMIT: usize = 2_000;

/// A finite CTMC: explicit state list and sparse off-diagonal rates.
#[derive(Clone, Debug)]
pub struct CtmcSpec<S> {
    states: Vec<S>,
    index: HashMap<S, usize>,
    out: Vec<Vec<(usize, f64)>>,
}

impl<S: Clone + Eq + Hash> CtmcSpec<S> {
    pub fn new(states: Vec<S>) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let out = vec![Vec::new(); states.len()];
        Self { states, index, out }
    }

    /// Breadth-first enumeration of the states reachable from `initial`.
    /// `step` pushes `(target, rate)` pairs for a state; zero rates and
    /// self-loops are dropped, parallel transitions merged.
    pub fn explore<F>(initial: S, cap: u64, mut step: F) -> Result<Self, OracleError>
    where
        F: FnMut(&S, &mut Vec<(S, f64)>),
    {
        let mut spec = Self::new(vec![initial]);
        let mut buf = Vec::new();
        let mut next = 0;
        while next < spec.states.len() {
            buf.clear();
            let s = spec.states[next].clone();
            step(&s, &mut buf);
            for (t, rate) in buf.drain(..) {
                let j = match spec.index.get(&t) {
                    Some(&j) => j,
                    None => {
                        if spec.states.len() as u64 >= cap {
                            return Err(OracleError::CapExceeded {
                                states: spec.states.len() as u128 + 1,
                                cap,
                                hint: "reduce the truncation level".into(),
                            });
                        }
                        spec.index.insert(t.clone(), spec.states.len());
                        spec.states.push(t);
                        spec.out.push(Vec::new());
                        spec.states.len() - 1
                    }
                };
                spec.add_rate(next, j, rate);
            }
            next += 1;
        }
        Ok(spec)
    }

    /// Adds `rate` to the transition `from -> to`. Self-loops and zero rates
    /// are ignored. Panics on negative or non-finite rates.
    pub fn add_rate(&mut self, from: usize, to: usize, rate: f64) {
        assert!(rate >= 0.0 && rate.is_finite(), "invalid rate {rate}");
        if from == to || rate == 0.0 {
            return;
        }
        match self.out[from].iter_mut().find(|(j, _)| *j == to) {
            Some((_, r)) => *r += rate,
            None => self.out[from].push((to, rate)),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn index_of(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.out[from].iter().find(|(j, _)| *j == to).map_or(0.0, |(_, r)| *r)
    }

    pub fn transitions(&self, from: usize) -> &[(usize, f64)] {
        &self.out[from]
    }

    /// Which states can be reached from `start`.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &(j, _) in &self.out[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// `‖πQ‖₁` for a candidate distribution over all states.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let mut flow = vec![0.0; self.len()];
        for (i, row) in self.out.iter().enumerate() {
            for &(j, r) in row {
                flow[j] += pi[i] * r;
                flow[i] -= pi[i] * r;
            }
        }
        flow.iter().map(|f| f.abs()).sum()
    }
}

/// Stationary law over the states of a [`CtmcSpec`].
#[derive(Clone, Debug)]
pub struct Stationary<S> {
    pub states: Vec<S>,
    pub pi: Vec<f64>,
    pub residual: f64,
}

impl<S> Stationary<S> {
    /// Pushes the law forward through `f`, which must map into `0..=k_max`.
    pub fn marginal(&self, k_max: u32, f: impl Fn(&S) -> u32) -> Vec<f64> {
        let mut mass = vec![0.0; k_max as usize + 1];
        for (s, p) in self.states.iter().zip(&self.pi) {
            mass[f(s) as usize] += p;
        }
        mass
    }

    pub fn prob(&self, pred: impl Fn(&S) -> bool) -> f64 {
        self.states.iter().zip(&self.pi).filter(|(s, _)| pred(s)).map(|(_, p)| p).sum()
    }
}

/// Solves `πQ = 0`, `Σπ = 1`. Small chains use the subtraction-free state
/// reduction of Grassmann, Taksar and Heyman, larger ones Gauss-Seidel
/// sweeps. Transient states get zero mass; more than one closed class is an
/// error.
pub fn solve_stationary<S: Clone + Eq + Hash>(spec: &CtmcSpec<S>) -> Result<Stationary<S>, OracleError> {
    let n = spec.len();
    if n == 0 {
        return Err(OracleError::Reducible(0));
    }
    let closed = closed_class(spec)?;
    let local: Vec<usize> = (0..n).filter(|&i| closed[i]).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in local.iter().enumerate() {
        pos[i] = k;
    }
    let sub = |i: usize| {
        spec.out[i]
            .iter()
            .filter(|(j, _)| pos[*j] != usize::MAX)
            .map(|&(j, r)| (pos[j], r))
    };
    let pi_local = if local.len() <= DENSE_LIMIT {
        gth(local.len(), |k| sub(local[k]).collect())
    } else {
        gauss_seidel(local.len(), |k| sub(local[k]).collect())?
    };
    let mut pi = vec![0.0; n];
    for (k, &i) in local.iter().enumerate() {
        pi[i] = pi_local[k];
    }
    let residual = spec.residual(&pi);
    if residual >= SOLVER_TOLERANCE {
        return Err(OracleError::NoConvergence {
            residual,
            iterations: 0,
        });
    }
    Ok(Stationary {
        states: spec.states.clone(),
        pi,
        residual,
    })
}

/// Marks the states of the unique closed communicating class.
fn closed_class<S: Clone + Eq + Hash>(spec: &CtmcSpec<S>) -> Result<Vec<bool>, OracleError> {
    let mut graph = DiGraph::<(), ()>::with_capacity(spec.len(), 0);
    let nodes: Vec<_> = (0..spec.len()).map(|_| graph.add_node(())).collect();
    for (i, row) in spec.out.iter().enumerate() {
        for &(j, _) in row {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    let sccs = kosaraju_scc(&graph);
    let mut comp = vec![0usize; spec.len()];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut is_closed = vec![true; sccs.len()];
    for (i, row) in spec.out.iter().enumerate() {
        for &(j, _) in row {
            if comp[i] != comp[j] {
                is_closed[comp[i]] = false;
            }
        }
    }
    let closed: Vec<usize> = (0..sccs.len()).filter(|&c| is_closed[c]).collect();
    if closed.len() != 1 {
        return Err(OracleError::Reducible(closed.len()));
    }
    Ok(comp.iter().map(|&c| c == closed[0]).collect())
}

fn gth(n: usize, row: impl Fn(usize) -> Vec<(usize, f64)>) -> Vec<f64> {
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for (j, r) in row(i) {
            a[i * n + j] += r;
        }
    }
    for k in (1..n).rev() {
        let s: f64 = a[k * n..k * n + k].iter().sum();
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let f = a[i * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += f * a[k * n + j];
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for j in 1..n {
        pi[j] = (0..j).map(|i| pi[i] * a[i * n + j]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    pi
}

fn gauss_seidel(n: usize, row: impl Fn(usize) -> Vec<(usize, f64)>) -> Result<Vec<f64>, OracleError> {
    const MAX_SWEEPS: usize = 200_000;
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut exit = vec![0.0; n];
    for i in 0..n {
        for (j, r) in row(i) {
            incoming[j].push((i, r));
            exit[i] += r;
        }
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        for j in 0..n {
            let inflow: f64 = incoming[j].iter().map(|&(i, r)| pi[i] * r).sum();
            pi[j] = inflow / exit[j];
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 16 == 0 {
            residual = (0..n)
                .map(|j| (incoming[j].iter().map(|&(i, r)| pi[i] * r).sum::<f64>() - pi[j] * exit[j]).abs())
                .sum();
            if residual < SOLVER_TOLERANCE * 1e-2 {
                return Ok(pi);
            }
        }
    }
    Err(OracleError::NoConvergence {
        residual,
        iterations: MAX_SWEEPS,
    })
}

/// A pmf over queue lengths `0..=K` from an exact solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDist {
    pub mass: Vec<f64>,
    pub truncation_error_bound: f64,
    pub residual: f64,
}

impl StationaryDist {
    pub fn k_max(&self) -> u32 {
        self.mass.len() as u32 - 1
    }

    pub fn tail(&self, x: u32) -> f64 {
        self.mass.iter().skip(x as usize).sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# K={} residual={:e} truncation_bound={:e}",
            self.k_max(),
            self.residual,
            self.truncation_error_bound
        )?;
        writeln!(out, "length,mass")?;
        for (x, p) in self.mass.iter().enumerate() {
            writeln!(out, "{x},{p:e}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut residual = f64::NAN;
        let mut bound = f64::NAN;
        let mut mass = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim();
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    match field.split_once('=') {
                        Some(("residual", v)) => residual = v.parse().map_err(|_| format!("line {}: bad residual", i + 1))?,
                        Some(("truncation_bound", v)) => {
                            bound = v.parse().map_err(|_| format!("line {}: bad truncation bound", i + 1))?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line == "length,mass" {
                continue;
            }
            let (x, p) = line.split_once(',').ok_or_else(|| format!("line {}: expected `length,mass`", i + 1))?;
            let x: usize = x.parse().map_err(|_| format!("line {}: bad length", i + 1))?;
            if x != mass.len() {
                return Err(format!("line {}: lengths must be consecutive from 0", i + 1));
            }
            mass.push(p.parse().map_err(|_| format!("line {}: bad mass", i + 1))?);
        }
        if mass.is_empty() {
            return Err("no rows".into());
        }
        Ok(Self {
            mass,
            truncation_error_bound: bound,
            residual,
        })
    }
}

/// Smallest `K` whose geometric-domination truncation bound
/// `(mλ)^{K+1} / (1 - mλ)` is below `tolerance`.
pub fn choose_truncation(lambda: f64, m: u32, tolerance: f64) -> Result<u32, OracleError> {
    let a = f64::from(m) * lambda;
    if a >= 1.0 {
        return Err(OracleError::InvalidBound(format!("m·λ = {a} ≥ 1")));
    }
    let mut k = 0;
    while a.powi(k as i32 + 1) / (1.0 - a) >= tolerance {
        k += 1;
    }
    Ok(k)
}

/// Geometric-domination bound `(mλ)^{K+1} / (1 - mλ)` on the mass a per-vertex
/// marginal loses above `K`.
pub fn truncation_bound(lambda: f64, m: u32, k_max: u32) -> f64 {
    let a = f64::from(m) * lambda;
    if a >= 1.0 {
        f64::INFINITY
    } else {
        a.powi(k_max as i32 + 1) / (1.0 - a)
    }
}

fn check_cap(states: f64, cap: u64, hint: &str) -> Result<(), OracleError> {
    if states > cap as f64 {
        return Err(OracleError::CapExceeded {
            states: states as u128,
            cap,
            hint: hint.into(),
        });
    }
    Ok(())
}

/// M/M/1 queue truncated at `k_max` (arrivals beyond it are lost).
pub fn mm1_truncated(arrival: f64, service: f64, k_max: u32) -> CtmcSpec<u32> {
    let mut spec = CtmcSpec::new((0..=k_max).collect());
    for x in 0..=k_max as usize {
        if x < k_max as usize {
            spec.add_rate(x, x + 1, arrival);
        }
        if x > 0 {
            spec.add_rate(x, x - 1, service);
        }
    }
    spec
}

pub fn mm1_truncated_dist(arrival: f64, k_max: u32) -> Result<StationaryDist, OracleError> {
    let sol = solve_stationary(&mm1_truncated(arrival, 1.0, k_max))?;
    Ok(StationaryDist {
        mass: sol.pi,
        truncation_error_bound: truncation_bound(arrival, 1, k_max),
        residual: sol.residual,
    })
}

/// State of a full small system: queue lengths and, per layer, the index of
/// the current partition in [`enumerate_partitions`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub queues: Vec<u8>,
    pub partitions: Vec<u16>,
}

/// Joins `site` to the shortest queue of `nbhd` with rate `rate`, spread
/// uniformly over distinct minima; arrivals to a queue at `k_max` are lost.
fn push_arrival<S>(queues: &[u8], nbhd: &[usize], rate: f64, k_max: u8, mut emit: impl FnMut(usize, f64) -> Option<S>, out: &mut Vec<(S, f64)>) {
    let best = nbhd.iter().map(|&w| queues[w]).min().expect("nonempty neighbourhood");
    let mut minima: Vec<usize> = nbhd.iter().copied().filter(|&w| queues[w] == best).collect();
    minima.sort_unstable();
    minima.dedup();
    let share = rate / minima.len() as f64;
    if best >= k_max {
        return;
    }
    for w in minima {
        if let Some(s) = emit(w, share) {
            out.push((s, share));
        }
    }
}

/// Full chain of (queues truncated at `k_max`) × (partition per layer) for a
/// small instance, started empty on partition 0 in every layer.
pub fn supermarket_exact(params: &ModelParams, k_max: u32, cap: u64) -> Result<Stationary<SystemState>, OracleError> {
    let n = params.n();
    let block = params.block_size();
    let count = partition_count(n, block);
    let states = f64::from(k_max + 1).powi(n as i32) * count.powi(params.d() as i32);
    check_cap(states, cap, "the full system is only enumerable for a handful of vertices; lower n or K")?;
    if k_max > u32::from(u8::MAX) {
        return Err(OracleError::InvalidBound("truncation above 255".into()));
    }
    let parts = enumerate_partitions(n, block);
    let part_index: HashMap<Vec<u32>, u16> = parts.iter().enumerate().map(|(i, p)| (p.clone(), i as u16)).collect();
    // moves[p] lists (target partition, rate) of the swap dynamic in one layer
    let kappa = params.kappa();
    let moves: Vec<Vec<(u16, f64)>> = parts
        .iter()
        .map(|labels| {
            let mut acc: HashMap<u16, f64> = HashMap::new();
            for v in 0..n as usize {
                for u in 0..n as usize {
                    if labels[v] == labels[u] {
                        continue;
                    }
                    let next = swap_labels(labels, v, u);
                    *acc.entry(part_index[&next]).or_insert(0.0) += kappa / f64::from(n);
                }
            }
            let mut v: Vec<(u16, f64)> = acc.into_iter().collect();
            v.sort_by_key(|e| e.0);
            v
        })
        .collect();
    let lambda = params.lambda();
    let k = k_max as u8;
    let initial = SystemState {
        queues: vec![0; n as usize],
        partitions: vec![0; params.d() as usize],
    };
    let spec = CtmcSpec::explore(initial, cap, |s, out| {
        for v in 0..n as usize {
            if s.queues[v] > 0 {
                let mut t = s.clone();
                t.queues[v] -= 1;
                out.push((t, 1.0));
            }
            let mut nbhd = vec![v];
            for &p in &s.partitions {
                let labels = &parts[p as usize];
                nbhd.extend((0..n as usize).filter(|&w| w != v && labels[w] == labels[v]));
            }
            push_arrival(
                &s.queues,
                &nbhd,
                lambda,
                k,
                |w, _| {
                    let mut t = s.clone();
                    t.queues[w] += 1;
                    Some(t)
                },
                out,
            );
        }
        for (layer, &p) in s.partitions.iter().enumerate() {
            for &(next, rate) in &moves[p as usize] {
                let mut t = s.clone();
                t.partitions[layer] = next;
                out.push((t, rate));
            }
        }
    })?;
    solve_stationary(&spec)
}

fn swap_labels(labels: &[u32], v: usize, u: usize) -> Vec<u32> {
    let (lv, lu) = (labels[v], labels[u]);
    let mut group_v: Vec<usize> = (0..labels.len()).filter(|&w| labels[w] == lv && w != v).collect();
    let mut group_u: Vec<usize> = (0..labels.len()).filter(|&w| labels[w] == lu && w != u).collect();
    group_v.push(u);
    group_u.push(v);
    let mut next = labels.to_vec();
    for g in [group_v, group_u] {
        let min = *g.iter().min().unwrap() as u32;
        for w in g {
            next[w] = min;
        }
    }
    next
}

/// Single-vertex marginal of [`supermarket_exact`].
pub fn supermarket_marginal(params: &ModelParams, k_max: u32, cap: u64) -> Result<StationaryDist, OracleError> {
    let sol = supermarket_exact(params, k_max, cap)?;
    Ok(StationaryDist {
        mass: sol.marginal(k_max, |s| u32::from(s.queues[0])),
        truncation_error_bound: truncation_bound(params.lambda(), params.m(), k_max),
        residual: sol.residual,
    })
}

/// Two queues on one static edge: every arrival (total rate `2λ`) joins the
/// shorter queue.
pub fn jsq_pair(lambda: f64, k_max: u32) -> Result<Stationary<SystemState>, OracleError> {
    let params = ModelParams::new(2, 1, 1, lambda, 0.0)?;
    supermarket_exact(&params, k_max, DEFAULT_STATE_CAP)
}

/// The zero-on-update chain on the hyperstar, marginalized on the centre.
/// Coordinate 0 is the centre; layer `e` owns coordinates
/// `1 + e(2r-1) .. 1 + (e+1)(2r-1)`.
pub fn zero_on_update_exact(params: &ModelParams, k_max: u32, cap: u64) -> Result<StationaryDist, OracleError> {
    let m = params.m() as usize;
    check_cap(
        f64::from(k_max + 1).powi(m as i32),
        cap,
        "(K+1)^m exceeds the cap; lower K or use a smaller hyperstar",
    )?;
    if k_max > u32::from(u8::MAX) {
        return Err(OracleError::InvalidBound("truncation above 255".into()));
    }
    let leaves = params.block_size() as usize - 1;
    let edge = |e: usize| 1 + e * leaves..1 + (e + 1) * leaves;
    let lambda = params.lambda();
    let kappa = params.kappa();
    let k = k_max as u8;
    let all: Vec<usize> = (0..m).collect();
    let spec = CtmcSpec::explore(vec![0u8; m], cap, |s, out| {
        for i in 0..m {
            if s[i] > 0 {
                let mut t = s.clone();
                t[i] -= 1;
                out.push((t, 1.0));
            }
        }
        let join = |w: usize, _| {
            let mut t = s.clone();
            t[w] += 1;
            Some(t)
        };
        push_arrival(s, &all, lambda, k, join, out);
        for e in 0..params.d() as usize {
            let mut nbhd = vec![0];
            nbhd.extend(edge(e));
            for _ in edge(e) {
                push_arrival(s, &nbhd, lambda, k, join, out);
            }
            for i in edge(e) {
                if s[i] > 0 {
                    let mut t = s.clone();
                    t[i] = 0;
                    out.push((t, kappa));
                }
            }
            if edge(e).any(|i| s[i] > 0) {
                let mut t = s.clone();
                for i in edge(e) {
                    t[i] = 0;
                }
                out.push((t, kappa));
            }
        }
    })?;
    let sol = solve_stationary(&spec)?;
    Ok(StationaryDist {
        mass: sol.marginal(k_max, |s| u32::from(s[0])),
        truncation_error_bound: truncation_bound(lambda, params.m(), k_max),
        residual: sol.residual,
    })
}

/// Lower bound on the centre's stationary mass at `x` in the zero-on-update
/// chain: `λ(1-λm)/(m(λm+1)^2) · (λm/(λm+m+2rdκ))^{xm}`.
pub fn zero_queue_lower_bound(params: &ModelParams, x: u32) -> f64 {
    let l = params.lambda();
    let m = f64::from(params.m());
    let rd = f64::from(params.r() * params.d());
    let lead = l * (1.0 - l * m) / (m * (l * m + 1.0).powi(2));
    lead * (l * m / (l * m + m + 2.0 * rd * params.kappa())).powf(f64::from(x) * m)
}

/// Tail `(mλ)^x` of the dominating biased random walk.
pub fn bound_mm1_tail(lambda: f64, m: u32, x: u32) -> Result<f64, OracleError> {
    let a = f64::from(m) * lambda;
    if a >= 1.0 {
        return Err(OracleError::InvalidBound(format!("m·λ = {a} ≥ 1: the dominating walk is not positive recurrent")));
    }
    Ok(a.powi(x as i32))
}

/// `λ^{2^k - 1}`, the tail of the single-queue law as κ → ∞.
pub fn eta_inf_tail(lambda: f64, k: u32) -> f64 {
    lambda.powf(2f64.powi(k as i32) - 1.0)
}

/// `2(2λ)^{2^k-1}` for `k ≤ R`, `(3λ/κ)^{k/2}` beyond.
pub fn eta_kappa_tail_bound(lambda: f64, kappa: f64, k: u32, changepoint: u32) -> f64 {
    if k <= changepoint {
        2.0 * (2.0 * lambda).powf(2f64.powi(k as i32) - 1.0)
    } else {
        (3.0 * lambda / kappa).powf(f64::from(k) / 2.0)
    }
}

/// Changepoints scanned for [`eta_kappa_tail_bound`]: `0..=⌈log₂log₂κ⌉+3`.
pub fn changepoint_range(kappa: f64) -> std::ops::RangeInclusive<u32> {
    let ll = if kappa > 2.0 { kappa.log2().log2().ceil().max(0.0) } else { 0.0 };
    0..=ll as u32 + 3
}

/// The changepoint whose bound is violated at the fewest `k` by the observed
/// tails (`tails[k]` estimates the mass of `[k, ∞)`); ties go to the smaller
/// changepoint. Returns `(R, violations)`.
pub fn best_changepoint(lambda: f64, kappa: f64, tails: &[f64]) -> (u32, usize) {
    changepoint_range(kappa)
        .map(|r| {
            let bad = tails
                .iter()
                .enumerate()
                .filter(|&(k, &t)| t > eta_kappa_tail_bound(lambda, kappa, k as u32, r))
                .count();
            (r, bad)
        })
        .min_by_key(|&(r, bad)| (bad, r))
        .expect("nonempty range")
}

/// `(4m+1)(18m²λ)^{k-1}`, bounding the chance that the dependence set has at
/// least `k` vertices.
pub fn dependence_tail_bound(lambda: f64, m: u32, k: u32) -> Result<f64, OracleError> {
    if k < 2 {
        return Err(OracleError::InvalidBound(format!("dependence tail needs k ≥ 2, got {k}")));
    }
    let m = f64::from(m);
    Ok((4.0 * m + 1.0) * (18.0 * m * m * lambda).powi(k as i32 - 1))
}

/// Rows `bound,k,value` for every closed-form bound up to `k_max`.
pub fn bounds_table(lambda: f64, m: u32, kappa: Option<f64>, k_max: u32) -> String {
    let mut s = String::from("bound,k,value\n");
    for k in 0..=k_max {
        if let Ok(v) = bound_mm1_tail(lambda, m, k) {
            let _ = writeln!(s, "mm1_tail,{k},{v}");
        }
        let _ = writeln!(s, "eta_inf_tail,{k},{}", eta_inf_tail(lambda, k));
        if let Some(kappa) = kappa {
            let r = *changepoint_range(kappa).end();
            let _ = writeln!(s, "eta_kappa_tail_R{r},{k},{}", eta_kappa_tail_bound(lambda, kappa, k, r));
        }
        if let Ok(v) = dependence_tail_bound(lambda, m, k) {
            let _ = writeln!(s, "dependence_tail,{k},{v}");
        }
    }
    s
}
