//! Uniformized event loop for the supermarket model on the dynamic
//! hypergraph.
//!
//! Queue events (services at rate `n`, arrivals at rate `n * lambda`) and
//! stub swaps (rate `n * d * kappa`) are independent Poisson streams. The loop
//! draws the next queue event and, before it is applied, brings the graph
//! forward with the Poisson number of swaps that fell in the gap. Idle
//! services and self-swaps are kept as no-op events, so the total event rate
//! is constant and the law is that of the exact chain.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::hypergraph::{sample_poisson, LayeredPartition};
use crate::params::ModelParams;
use crate::queue::{choose_shortest, Fault, QueueVector};
use crate::seed::{self, SimRng};

const STREAM_INIT: u64 = 0;
const STREAM_EVENTS: u64 = 1;
const STREAM_GRAPH: u64 = 2;
const STREAM_SWAP_TIMES: u64 = 3;

#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialQueues {
    #[default]
    Empty,
    Given(QueueVector),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialGraph {
    #[default]
    Uniform,
    Given(LayeredPartition),
}

/// Snapshot times `start, start + interval, ...` up to the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSchedule {
    pub start: f64,
    pub interval: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub params: ModelParams,
    pub horizon: f64,
    pub seed: u64,
    pub initial_queues: InitialQueues,
    pub initial_graph: InitialGraph,
    pub snapshots: Option<SnapshotSchedule>,
    pub fault: Fault,
}

impl EngineConfig {
    /// Empty queues on a uniformly sampled graph.
    pub fn new(params: ModelParams, horizon: f64, seed: u64) -> Self {
        Self {
            params,
            horizon,
            seed,
            initial_queues: InitialQueues::Empty,
            initial_graph: InitialGraph::Uniform,
            snapshots: None,
            fault: Fault::None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_queues(mut self, q: QueueVector) -> Self {
        self.initial_queues = InitialQueues::Given(q);
        self
    }

    pub fn with_graph(mut self, g: LayeredPartition) -> Self {
        self.initial_graph = InitialGraph::Given(g);
        self
    }

    pub fn with_snapshots(mut self, start: f64, interval: f64) -> Self {
        self.snapshots = Some(SnapshotSchedule { start, interval });
        self
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::Horizon(self.horizon));
        }
        let n = self.params.n() as usize;
        if let InitialQueues::Given(q) = &self.initial_queues {
            if q.len() != n {
                return Err(SimError::InitialQueues {
                    got: q.len(),
                    expected: n,
                });
            }
        }
        if let InitialGraph::Given(g) = &self.initial_graph {
            if !g.matches(&self.params) {
                return Err(SimError::InitialGraph(format!(
                    "got n={} block={} d={}, expected n={} block={} d={}",
                    g.n(),
                    g.block_size(),
                    g.d(),
                    self.params.n(),
                    self.params.block_size(),
                    self.params.d()
                )));
            }
            g.verify().map_err(SimError::InitialGraph)?;
        }
        if let Some(s) = &self.snapshots {
            if !(s.interval.is_finite() && s.interval > 0.0 && s.start >= 0.0) {
                return Err(SimError::Refused(format!("invalid snapshot schedule {s:?}")));
            }
        }
        let p = &self.params;
        let total_rate = f64::from(p.n()) * (1.0 + p.lambda() + f64::from(p.d()) * p.kappa());
        let expected_events = total_rate * self.horizon;
        if !expected_events.is_finite() || expected_events > 1e15 {
            return Err(SimError::Refused(format!(
                "expected {expected_events:e} events exceeds the rate guard"
            )));
        }
        Ok(())
    }

    /// Initial queues and graph, the latter drawn from the init stream when
    /// uniform.
    pub fn initial_state(&self) -> (QueueVector, LayeredPartition) {
        let q = match &self.initial_queues {
            InitialQueues::Empty => QueueVector::empty(self.params.n() as usize),
            InitialQueues::Given(q) => q.clone(),
        };
        let g = match &self.initial_graph {
            InitialGraph::Uniform => {
                let mut rng = seed::stream(self.seed, STREAM_INIT);
                LayeredPartition::sample(&self.params, &mut rng)
            }
            InitialGraph::Given(g) => g.clone(),
        };
        (q, g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// Service clock at `vertex`; `served` is false for an idle server.
    Service { vertex: u32, served: bool },
    /// Task arriving at `site` joined the queue at `joined`.
    Arrival { site: u32, joined: u32 },
    /// Stub election; `changed` is false when the hypergraph is unchanged.
    Swap { changed: bool },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
}

/// Synchronous per-replica observer. Returning `Err` aborts the run.
pub trait Observer {
    fn name(&self) -> &str;

    /// Swap events are only delivered to observers that ask for them.
    fn wants_swaps(&self) -> bool {
        false
    }

    fn on_start(&mut self, _q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        Ok(())
    }

    /// Called after each event with the updated queues.
    fn on_event(&mut self, _event: &EventRecord, _q: &QueueVector) -> Result<(), String> {
        Ok(())
    }

    fn on_snapshot(&mut self, _time: f64, _q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        Ok(())
    }

    fn on_finish(&mut self, _time: f64, _q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub n: u32,
    pub seed: u64,
    pub horizon: f64,
    pub events_total: u64,
    pub arrivals: u64,
    /// All service clock rings, idle ones included.
    pub services: u64,
    pub idle_services: u64,
    pub swaps: u64,
    pub graph_changes: u64,
    pub busy_time_per_vertex: Vec<f64>,
    pub max_queue_seen: u32,
    pub final_queues: QueueVector,
    /// Final partition in the plain-text block format.
    pub final_graph: String,
}

impl TraceSummary {
    /// Time-average fraction of time each vertex was nonempty.
    pub fn busy_fractions(&self) -> Vec<f64> {
        self.busy_time_per_vertex.iter().map(|b| b / self.horizon).collect()
    }
}

/// A queue event drawn by the shared driver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum QueueEvent {
    Service(u32),
    Arrival { site: u32, tie: f64 },
}

/// Random marks shared by every copy driven from the same seed: event times,
/// event kinds and sites, tie-break uniforms, and the graph's swap stream.
pub(crate) struct Driver {
    n: u32,
    queue_rate: f64,
    service_share: f64,
    swap_rate: f64,
    events: SimRng,
    graph_rng: SimRng,
    pub(crate) time: f64,
    graph_time: f64,
}

impl Driver {
    pub(crate) fn new(params: &ModelParams, master: u64) -> Self {
        let n = f64::from(params.n());
        Self {
            n: params.n(),
            queue_rate: n * (1.0 + params.lambda()),
            service_share: 1.0 / (1.0 + params.lambda()),
            swap_rate: n * f64::from(params.d()) * params.kappa(),
            events: seed::stream(master, STREAM_EVENTS),
            graph_rng: seed::stream(master, STREAM_GRAPH),
            time: 0.0,
            graph_time: 0.0,
        }
    }

    /// Time of the next queue event; does not advance the clock.
    #[inline]
    pub(crate) fn next_time(&mut self) -> f64 {
        let e: f64 = Exp1.sample(&mut self.events);
        self.time + e / self.queue_rate
    }

    /// Advances the clock to `t` and draws the event happening there.
    #[inline]
    pub(crate) fn event_at(&mut self, t: f64) -> QueueEvent {
        self.time = t;
        let kind: f64 = self.events.random();
        let site = self.events.random_range(0..self.n);
        if kind < self.service_share {
            QueueEvent::Service(site)
        } else {
            QueueEvent::Arrival {
                site,
                tie: self.events.random(),
            }
        }
    }

    /// Applies the swaps falling in `(graph_time, to]`. Returns
    /// `(swaps, hypergraph-changing swaps)`.
    #[inline]
    pub(crate) fn advance_graph(&mut self, g: &mut LayeredPartition, to: f64) -> (u64, u64) {
        if self.swap_rate == 0.0 || to <= self.graph_time {
            self.graph_time = self.graph_time.max(to);
            return (0, 0);
        }
        let count = sample_poisson(self.swap_rate * (to - self.graph_time), &mut self.graph_rng);
        self.graph_time = to;
        let mut changed = 0u64;
        for _ in 0..count {
            changed += u64::from(g.random_swap(&mut self.graph_rng));
        }
        (count, changed)
    }

    /// Like `advance_graph`, reporting every swap with its time. Times come
    /// from `times_rng` so the graph trajectory itself is unaffected.
    fn advance_graph_observed(
        &mut self,
        g: &mut LayeredPartition,
        to: f64,
        times_rng: &mut SimRng,
        mut on_swap: impl FnMut(f64, bool) -> Result<(), SimError>,
    ) -> Result<(u64, u64), SimError> {
        if self.swap_rate == 0.0 || to <= self.graph_time {
            self.graph_time = self.graph_time.max(to);
            return Ok((0, 0));
        }
        let from = self.graph_time;
        let count = sample_poisson(self.swap_rate * (to - from), &mut self.graph_rng);
        self.graph_time = to;
        // sorted uniforms on (from, to] via normalized exponential spacings
        let spacings: Vec<f64> = (0..=count).map(|_| Exp1.sample(times_rng)).collect();
        let total: f64 = spacings.iter().sum();
        let mut acc = 0.0;
        let mut changed = 0u64;
        for s in spacings.iter().take(count as usize) {
            acc += s;
            let c = g.random_swap(&mut self.graph_rng);
            changed += u64::from(c);
            on_swap(from + (to - from) * acc / total, c)?;
        }
        Ok((count, changed))
    }
}

/// Runs one replica with no observers.
pub fn simulate(cfg: &EngineConfig) -> Result<TraceSummary, SimError> {
    simulate_with(cfg, &mut [])
}

pub fn simulate_with(cfg: &EngineConfig, observers: &mut [&mut dyn Observer]) -> Result<TraceSummary, SimError> {
    cfg.validate()?;
    let params = &cfg.params;
    let n = params.n() as usize;
    let (mut q, mut g) = cfg.initial_state();
    let mut driver = Driver::new(params, cfg.seed);
    let mut times_rng = seed::stream(cfg.seed, STREAM_SWAP_TIMES);
    let swap_observed = observers.iter().any(|o| o.wants_swaps());

    let fail = |o: &dyn Observer, time: f64, message: String| SimError::Observer {
        name: o.name().to_string(),
        time,
        message,
    };
    for o in observers.iter_mut() {
        o.on_start(&q, &g).map_err(|m| fail(&**o, 0.0, m))?;
    }

    let mut summary = TraceSummary {
        n: params.n(),
        seed: cfg.seed,
        horizon: cfg.horizon,
        events_total: 0,
        arrivals: 0,
        services: 0,
        idle_services: 0,
        swaps: 0,
        graph_changes: 0,
        busy_time_per_vertex: vec![0.0; n],
        max_queue_seen: q.max(),
        final_queues: QueueVector::empty(0),
        final_graph: String::new(),
    };
    let mut busy_since: Vec<f64> = (0..n).map(|v| if q[v] > 0 { 0.0 } else { f64::NAN }).collect();
    let mut nbhd: Vec<u32> = Vec::with_capacity(params.m() as usize);
    let mut next_snapshot = cfg.snapshots.map(|s| s.start);
    let horizon = cfg.horizon;

    let mut advance = |driver: &mut Driver,
                       g: &mut LayeredPartition,
                       q: &QueueVector,
                       to: f64,
                       summary: &mut TraceSummary,
                       observers: &mut [&mut dyn Observer]|
     -> Result<(), SimError> {
        let (count, changed) = if swap_observed {
            driver.advance_graph_observed(g, to, &mut times_rng, |time, changed| {
                let ev = EventRecord {
                    time,
                    kind: EventKind::Swap { changed },
                };
                for o in observers.iter_mut().filter(|o| o.wants_swaps()) {
                    o.on_event(&ev, q).map_err(|m| fail(&**o, time, m))?;
                }
                Ok(())
            })?
        } else {
            driver.advance_graph(g, to)
        };
        summary.swaps += count;
        summary.graph_changes += changed;
        Ok(())
    };

    loop {
        let t_next = driver.next_time();
        while let Some(s) = next_snapshot {
            if s > t_next || s > horizon {
                break;
            }
            advance(&mut driver, &mut g, &q, s, &mut summary, observers)?;
            for o in observers.iter_mut() {
                o.on_snapshot(s, &q, &g).map_err(|m| fail(&**o, s, m))?;
            }
            next_snapshot = cfg.snapshots.map(|sch| s + sch.interval);
        }
        if t_next > horizon {
            advance(&mut driver, &mut g, &q, horizon, &mut summary, observers)?;
            break;
        }
        advance(&mut driver, &mut g, &q, t_next, &mut summary, observers)?;
        let kind = match driver.event_at(t_next) {
            QueueEvent::Service(v) => {
                let served = q.decrement(v as usize);
                summary.services += 1;
                if served {
                    if q[v as usize] == 0 {
                        summary.busy_time_per_vertex[v as usize] += t_next - busy_since[v as usize];
                    }
                } else {
                    summary.idle_services += 1;
                }
                EventKind::Service { vertex: v, served }
            }
            QueueEvent::Arrival { site, tie } => {
                g.closed_neighbourhood_into(site, &mut nbhd);
                let candidates = if cfg.fault == Fault::OmitSelfFromNeighbourhood {
                    &nbhd[1..]
                } else {
                    &nbhd[..]
                };
                let joined = choose_shortest(&q, candidates, tie, cfg.fault);
                q.increment(joined as usize);
                let len = q[joined as usize];
                if len == 1 {
                    busy_since[joined as usize] = t_next;
                }
                summary.max_queue_seen = summary.max_queue_seen.max(len);
                summary.arrivals += 1;
                EventKind::Arrival { site, joined }
            }
        };
        if !observers.is_empty() {
            let ev = EventRecord { time: t_next, kind };
            for o in observers.iter_mut() {
                o.on_event(&ev, &q).map_err(|m| fail(&**o, t_next, m))?;
            }
        }
    }

    for v in 0..n {
        if q[v] > 0 {
            summary.busy_time_per_vertex[v] += horizon - busy_since[v];
        }
    }
    for o in observers.iter_mut() {
        o.on_finish(horizon, &q, &g).map_err(|m| fail(&**o, horizon, m))?;
    }
    summary.events_total = summary.arrivals + summary.services + summary.swaps;
    summary.final_queues = q;
    summary.final_graph = g.to_text();
    Ok(summary)
}

/// Configuration of replica `index`: replica 0 is `cfg` itself, the others
/// get counter-derived seeds.
pub fn replica_config(cfg: &EngineConfig, index: usize) -> EngineConfig {
    let seed = if index == 0 {
        cfg.seed
    } else {
        seed::replica_seed(cfg.seed, index as u64)
    };
    cfg.clone().with_seed(seed)
}

/// Runs `count` independent replicas (in parallel), returning results in
/// replica order.
pub fn run_replicas(cfg: &EngineConfig, count: usize) -> Result<Vec<TraceSummary>, SimError> {
    run_replicas_map(cfg, count, |_, c| simulate(&c))
}

/// Runs `f` on each replica configuration; order-stable, and failures carry
/// the replica index.
pub fn run_replicas_map<T, F>(cfg: &EngineConfig, count: usize, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(usize, EngineConfig) -> Result<T, SimError> + Sync,
{
    if count == 0 {
        return Err(SimError::Refused("replica count must be at least 1".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            f(i, replica_config(cfg, i)).map_err(|e| SimError::Replica {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Writes one line per snapshot: the time followed by the queue-length
/// histogram as sparse `length:count` pairs.
pub struct SnapshotWriter<W: Write> {
    out: W,
}

impl<W: Write> SnapshotWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Formats one snapshot line (without newline).
pub fn format_snapshot(time: f64, q: &QueueVector) -> String {
    let mut line = format!("{time}");
    for (len, &count) in q.histogram().iter().enumerate() {
        if count > 0 {
            line.push_str(&format!(" {len}:{count}"));
        }
    }
    line
}

/// Parses a snapshot line back into `(time, histogram)`.
pub fn parse_snapshot(line: &str) -> Option<(f64, Vec<u64>)> {
    let mut it = line.split_whitespace();
    let time: f64 = it.next()?.parse().ok()?;
    let mut hist = Vec::new();
    for pair in it {
        let (l, c) = pair.split_once(':')?;
        let l: usize = l.parse().ok()?;
        let c: u64 = c.parse().ok()?;
        if hist.len() <= l {
            hist.resize(l + 1, 0);
        }
        hist[l] += c;
    }
    Some((time, hist))
}

impl<W: Write> Observer for SnapshotWriter<W> {
    fn name(&self) -> &str {
        "snapshot-writer"
    }

    fn on_snapshot(&mut self, time: f64, q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        writeln!(self.out, "{}", format_snapshot(time, q)).map_err(|e| e.to_string())
    }

    fn on_finish(&mut self, _time: f64, _q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        self.out.flush().map_err(|e| e.to_string())
    }
}
