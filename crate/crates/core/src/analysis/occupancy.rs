//! Time-average and snapshot estimates of queue-length laws.

use serde::Serialize;

use super::{mean_se, tv_distance, DistEstimate, EstimateMode, Pmf};
use crate::engine::{simulate, simulate_with, EngineConfig, EventKind, EventRecord, Observer, TraceSummary};
use crate::error::SimError;
use crate::hypergraph::LayeredPartition;
use crate::queue::QueueVector;

/// Snapshot estimates with fewer samples are refused.
pub const MIN_SNAPSHOTS: u64 = 30;

/// Integrates the time spent at each queue length over `[start, end]`,
/// either for one vertex or pooled over all vertices, in equal batches so
/// that batch means give standard errors.
pub struct Occupancy {
    tracked: Option<u32>,
    start: f64,
    batch_len: f64,
    batches: usize,
    next_end: f64,
    hist: Vec<u64>,
    since: Vec<f64>,
    area: Vec<f64>,
    units: f64,
    done: Vec<Vec<f64>>,
}

impl Occupancy {
    pub fn pooled(start: f64, end: f64, batches: usize) -> Self {
        Self::build(None, start, end, batches)
    }

    pub fn vertex(v: u32, start: f64, end: f64, batches: usize) -> Self {
        Self::build(Some(v), start, end, batches)
    }

    fn build(tracked: Option<u32>, start: f64, end: f64, batches: usize) -> Self {
        assert!(end > start && batches >= 1, "empty averaging window");
        let batch_len = (end - start) / batches as f64;
        Self {
            tracked,
            start,
            batch_len,
            batches,
            next_end: start + batch_len,
            hist: Vec::new(),
            since: Vec::new(),
            area: Vec::new(),
            units: 0.0,
            done: Vec::new(),
        }
    }

    fn accrue(&mut self, x: usize, t: f64) {
        let from = self.since[x].max(self.start);
        if t > from {
            self.area[x] += self.hist[x] as f64 * (t - from);
        }
        self.since[x] = t;
    }

    fn flush_until(&mut self, t: f64) {
        while self.done.len() < self.batches && self.next_end <= t {
            let end = self.next_end;
            for x in 0..self.hist.len() {
                self.accrue(x, end);
            }
            let norm = self.units * self.batch_len;
            self.done.push(self.area.iter().map(|a| a / norm).collect());
            self.area.iter_mut().for_each(|a| *a = 0.0);
            self.next_end = self.start + (self.done.len() + 1) as f64 * self.batch_len;
        }
    }

    fn ensure(&mut self, x: usize, t: f64) {
        if self.hist.len() <= x {
            self.hist.resize(x + 1, 0);
            self.area.resize(x + 1, 0.0);
            self.since.resize(x + 1, t);
        }
    }

    fn moved(&mut self, t: f64, from: u32, to: u32) {
        let (from, to) = (from as usize, to as usize);
        self.ensure(to, t);
        self.accrue(from, t);
        self.accrue(to, t);
        self.hist[from] -= 1;
        self.hist[to] += 1;
    }

    pub fn estimate(self) -> OccupancyEstimate {
        assert_eq!(self.done.len(), self.batches, "run ended before the averaging window closed");
        OccupancyEstimate {
            batches: self.done,
            duration: self.batch_len * self.batches as f64,
        }
    }
}

impl Observer for Occupancy {
    fn name(&self) -> &str {
        "occupancy"
    }

    fn on_start(&mut self, q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        let lengths: Vec<u32> = match self.tracked {
            Some(v) => vec![*q.lengths().get(v as usize).ok_or("tracked vertex out of range")?],
            None => q.lengths().to_vec(),
        };
        self.units = lengths.len() as f64;
        for x in lengths {
            self.ensure(x as usize, 0.0);
            self.hist[x as usize] += 1;
        }
        Ok(())
    }

    fn on_event(&mut self, event: &EventRecord, q: &QueueVector) -> Result<(), String> {
        let (v, up) = match event.kind {
            EventKind::Service { vertex, served: true } => (vertex, false),
            EventKind::Arrival { joined, .. } => (joined, true),
            _ => return Ok(()),
        };
        if self.tracked.is_some_and(|w| w != v) {
            return Ok(());
        }
        self.flush_until(event.time);
        let now = q[v as usize];
        if up {
            self.moved(event.time, now - 1, now);
        } else {
            self.moved(event.time, now + 1, now);
        }
        Ok(())
    }

    fn on_finish(&mut self, time: f64, _q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        self.flush_until(time * (1.0 + 1e-12) + 1e-12);
        Ok(())
    }
}

/// Batch-mean occupancy: `batches[b][x]` is the fraction of tracked
/// vertex-time at length `x` during batch `b`.
#[derive(Clone, Debug, Serialize)]
pub struct OccupancyEstimate {
    pub batches: Vec<Vec<f64>>,
    pub duration: f64,
}

impl OccupancyEstimate {
    pub fn mean_pmf(&self) -> Vec<f64> {
        let len = self.batches.iter().map(Vec::len).max().unwrap_or(0);
        let mut m = vec![0.0; len];
        for b in &self.batches {
            for (x, p) in b.iter().enumerate() {
                m[x] += p / self.batches.len() as f64;
            }
        }
        m
    }

    /// Mean and standard error of the time fraction at lengths `≥ x`.
    pub fn tail(&self, x: u32) -> (f64, f64) {
        let per: Vec<f64> = self.batches.iter().map(|b| b.iter().skip(x as usize).sum()).collect();
        mean_se(&per)
    }

    pub fn busy(&self) -> (f64, f64) {
        self.tail(1)
    }

    pub fn to_dist(&self) -> DistEstimate {
        let mut d = DistEstimate::new(EstimateMode::TimeAverage);
        for (x, p) in self.mean_pmf().into_iter().enumerate() {
            if p > 0.0 {
                d.add_weight(x as u32, p * self.duration, 0);
            }
        }
        d.add_weight(0, 0.0, self.batches.len() as u64);
        d
    }

    pub fn check_busy(&self, lambda: f64) -> BusyCheck {
        let (estimate, stderr) = self.busy();
        let pass = (estimate - lambda).abs() <= 3.0 * stderr;
        BusyCheck {
            estimate,
            stderr,
            target: lambda,
            pass,
        }
    }
}

impl Pmf for OccupancyEstimate {
    fn pmf(&self) -> Vec<f64> {
        self.mean_pmf()
    }
}

/// Busy fraction against `λ` at three standard errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BusyCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub pass: bool,
}

struct SnapshotMarginal {
    vertex: usize,
    est: DistEstimate,
}

impl Observer for SnapshotMarginal {
    fn name(&self) -> &str {
        "snapshot-marginal"
    }

    fn on_snapshot(&mut self, _time: f64, q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        self.est.add(q[self.vertex]);
        Ok(())
    }
}

/// Law of vertex 0's queue sampled every `interval` after `burn_in`.
pub fn estimate_marginal(cfg: &EngineConfig, burn_in: f64, interval: f64) -> Result<DistEstimate, SimError> {
    if !(burn_in >= 0.0 && interval > 0.0) {
        return Err(SimError::Refused("burn-in must be nonnegative and the interval positive".into()));
    }
    let cfg = cfg.clone().with_snapshots(burn_in, interval);
    let mut obs = SnapshotMarginal {
        vertex: 0,
        est: DistEstimate::new(EstimateMode::Snapshot),
    };
    simulate_with(&cfg, &mut [&mut obs])?;
    if obs.est.samples() < MIN_SNAPSHOTS {
        return Err(SimError::Refused(format!(
            "only {} snapshots after burn-in; need at least {MIN_SNAPSHOTS}",
            obs.est.samples()
        )));
    }
    Ok(obs.est)
}

/// Time-average laws after `burn_in`: pooled over all vertices and for
/// vertex 0 alone.
pub fn time_average_marginal(
    cfg: &EngineConfig,
    burn_in: f64,
    batches: usize,
) -> Result<(OccupancyEstimate, OccupancyEstimate, TraceSummary), SimError> {
    if burn_in >= cfg.horizon {
        return Err(SimError::Refused("burn-in leaves no averaging window".into()));
    }
    let mut pooled = Occupancy::pooled(burn_in, cfg.horizon, batches);
    let mut single = Occupancy::vertex(0, burn_in, cfg.horizon, batches);
    let summary = simulate_with(cfg, &mut [&mut pooled, &mut single])?;
    Ok((pooled.estimate(), single.estimate(), summary))
}

/// Largest queue seen anywhere over the whole horizon.
pub fn max_over_horizon(cfg: &EngineConfig) -> Result<u32, SimError> {
    Ok(simulate(cfg)?.max_queue_seen)
}

struct Snapshots {
    hists: Vec<Vec<u64>>,
}

impl Observer for Snapshots {
    fn name(&self) -> &str {
        "empirical-measure"
    }

    fn on_snapshot(&mut self, _time: f64, q: &QueueVector, _g: &LayeredPartition) -> Result<(), String> {
        self.hists.push(q.histogram());
        Ok(())
    }
}

/// TV between the all-vertex empirical law at each snapshot after `burn_in`
/// and `reference`.
pub fn empirical_concentration<P: Pmf + ?Sized>(
    cfg: &EngineConfig,
    reference: &P,
    burn_in: f64,
    interval: f64,
) -> Result<Vec<f64>, SimError> {
    let cfg = cfg.clone().with_snapshots(burn_in, interval);
    let mut snaps = Snapshots { hists: Vec::new() };
    simulate_with(&cfg, &mut [&mut snaps])?;
    let reference = reference.pmf();
    Ok(snaps
        .hists
        .iter()
        .map(|h| tv_distance(&h.iter().map(|&c| c as f64).collect::<Vec<_>>(), &reference))
        .collect())
}

/// Snapshot TVs against the run's own pooled time average after burn-in.
#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationRun {
    pub tvs: Vec<f64>,
    pub reference: Vec<f64>,
    pub busy: BusyCheck,
}

pub fn self_concentration(cfg: &EngineConfig, burn_in: f64, interval: f64) -> Result<ConcentrationRun, SimError> {
    let cfg = cfg.clone().with_snapshots(burn_in, interval);
    let mut snaps = Snapshots { hists: Vec::new() };
    let mut occ = Occupancy::pooled(burn_in, cfg.horizon, 20);
    simulate_with(&cfg, &mut [&mut snaps, &mut occ])?;
    let occ = occ.estimate();
    let reference = occ.mean_pmf();
    let tvs = snaps
        .hists
        .iter()
        .map(|h| tv_distance(&h.iter().map(|&c| c as f64).collect::<Vec<_>>(), &reference))
        .collect();
    Ok(ConcentrationRun {
        tvs,
        reference,
        busy: occ.check_busy(cfg.params.lambda()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    #[test]
    fn occupancy_matches_engine_busy_time() {
        let p = ModelParams::new(8, 1, 1, 0.2, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 200.0, 3);
        let mut occ = Occupancy::vertex(3, 0.0, 200.0, 4);
        let summary = simulate_with(&cfg, &mut [&mut occ]).unwrap();
        let est = occ.estimate();
        let busy = est.busy().0;
        assert!((busy - summary.busy_fractions()[3]).abs() < 1e-9);
        for b in &est.batches {
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pair_marginal_from_snapshots() {
        let p = ModelParams::new(2, 1, 1, 0.1, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 2e5, 5);
        let est = estimate_marginal(&cfg, 10.0, 2.0).unwrap();
        assert!((est.prob(0) - 0.9).abs() < 0.005, "{}", est.prob(0));
        // P(Q ≥ 3) against (mλ)^3 plus three standard errors
        let t = est.tail(3);
        let se = (t * (1.0 - t) / est.samples() as f64).sqrt();
        assert!(t <= 0.008 + 3.0 * se);
    }

    #[test]
    fn too_few_snapshots_refused() {
        let p = ModelParams::new(2, 1, 1, 0.1, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 10.0, 5);
        assert!(matches!(estimate_marginal(&cfg, 5.0, 1.0), Err(SimError::Refused(_))));
    }

    #[test]
    fn busy_fraction_within_three_se() {
        let p = ModelParams::new(64, 1, 1, 0.1, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 2000.0, 11);
        let (pooled, single, _) = time_average_marginal(&cfg, 50.0, 20).unwrap();
        assert!(pooled.check_busy(0.1).pass);
        assert!(single.check_busy(0.1).pass);
    }

    #[test]
    fn almost_no_arrivals() {
        let p = ModelParams::new(16, 1, 1, 1e-6, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 10.0, 1);
        assert!(max_over_horizon(&cfg).unwrap() <= 1);
    }

    #[test]
    fn self_reference_tv_small() {
        let p = ModelParams::new(512, 1, 1, 0.1, 1.0).unwrap();
        let cfg = EngineConfig::new(p, 400.0, 2);
        let run = self_concentration(&cfg, 100.0, 5.0).unwrap();
        assert!(!run.tvs.is_empty());
        assert!(run.tvs.iter().all(|t| (0.0..0.1).contains(t)));
    }
}
