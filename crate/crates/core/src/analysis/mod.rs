//! Estimators built on the engine and the statistics they report.

mod chaos;
mod coupling;
mod explore;
mod occupancy;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::oracle::StationaryDist;
use crate::params::ModelParams;

pub use chaos::{chaos_test, ChaosEstimate, L_CAP};
pub use coupling::{coalescence_time, domination_coupled_run, loaded_half, CoalescenceResult, DominationReport, ServiceCoupling};
pub use explore::{explore_dependence, ExplorationOutcome};
pub use occupancy::{
    empirical_concentration, estimate_marginal, max_over_horizon, self_concentration, time_average_marginal,
    BusyCheck, ConcentrationRun, Occupancy, OccupancyEstimate, MIN_SNAPSHOTS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    Snapshot,
    TimeAverage,
}

/// Weighted histogram over queue lengths. Snapshot estimates carry unit
/// weights; time averages carry time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistEstimate {
    weights: Vec<f64>,
    total: f64,
    samples: u64,
    mode: EstimateMode,
}

impl DistEstimate {
    pub fn new(mode: EstimateMode) -> Self {
        Self {
            weights: Vec::new(),
            total: 0.0,
            samples: 0,
            mode,
        }
    }

    pub fn from_counts(counts: &[u64], mode: EstimateMode) -> Self {
        let mut d = Self::new(mode);
        for (x, &c) in counts.iter().enumerate() {
            if c > 0 {
                d.add_weight(x as u32, c as f64, c);
            }
        }
        d
    }

    pub fn add(&mut self, length: u32) {
        self.add_weight(length, 1.0, 1);
    }

    pub fn add_weight(&mut self, length: u32, weight: f64, samples: u64) {
        let x = length as usize;
        if self.weights.len() <= x {
            self.weights.resize(x + 1, 0.0);
        }
        self.weights[x] += weight;
        self.total += weight;
        self.samples += samples;
    }

    /// Pools two estimates of the same mode; associative and commutative.
    pub fn merge(&mut self, other: &DistEstimate) {
        assert_eq!(self.mode, other.mode, "cannot pool estimates of different modes");
        if self.weights.len() < other.weights.len() {
            self.weights.resize(other.weights.len(), 0.0);
        }
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            *w += o;
        }
        self.total += other.total;
        self.samples += other.samples;
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn mode(&self) -> EstimateMode {
        self.mode
    }

    pub fn prob(&self, x: u32) -> f64 {
        self.weights.get(x as usize).map_or(0.0, |w| w / self.total)
    }

    /// Estimated mass of `[x, ∞)`.
    pub fn tail(&self, x: u32) -> f64 {
        self.weights.iter().skip(x as usize).sum::<f64>() / self.total
    }
}

/// Anything that can be read as a probability mass function on lengths.
pub trait Pmf {
    fn pmf(&self) -> Vec<f64>;
}

impl Pmf for DistEstimate {
    fn pmf(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}

impl Pmf for StationaryDist {
    fn pmf(&self) -> Vec<f64> {
        self.mass.clone()
    }
}

impl Pmf for [f64] {
    fn pmf(&self) -> Vec<f64> {
        self.to_vec()
    }
}

impl Pmf for Vec<f64> {
    fn pmf(&self) -> Vec<f64> {
        self.clone()
    }
}

/// Half the L¹ distance between the normalized pmfs over the union of
/// their supports.
pub fn tv_distance<P: Pmf + ?Sized, Q: Pmf + ?Sized>(p: &P, q: &Q) -> f64 {
    let (p, q) = (normalized(p.pmf()), normalized(q.pmf()));
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let l1: f64 = (0..len).map(|i| (at(&p, i) - at(&q, i)).abs()).sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    assert!(total > 0.0 && total.is_finite(), "pmf has no mass");
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Default burn-in `10(1 + 1/κ) ln n`, with κ floored at 0.1 so a static
/// graph still gets a finite burn-in.
pub fn default_burn_in(params: &ModelParams) -> f64 {
    let kappa = params.kappa().max(0.1);
    10.0 * (1.0 + 1.0 / kappa) * f64::from(params.n()).ln().max(1.0)
}

/// One line of estimator output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: u32,
    pub r: u32,
    pub d: u32,
    pub lambda: f64,
    pub kappa: f64,
    pub horizon: f64,
    pub replica: u32,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub wall_clock_ms: u64,
}

impl ResultRow {
    pub fn new(experiment: &str, params: &ModelParams, horizon: f64, replica: u32, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            n: params.n(),
            r: params.r(),
            d: params.d(),
            lambda: params.lambda(),
            kappa: params.kappa(),
            horizon,
            replica,
            seed,
            statistic: String::new(),
            value: f64::NAN,
            stderr: f64::NAN,
            samples: 0,
            wall_clock_ms: 0,
        }
    }

    pub fn stat(mut self, name: &str, value: f64, stderr: f64, samples: u64) -> Self {
        self.statistic = name.into();
        self.value = value;
        self.stderr = stderr;
        self.samples = samples;
        self
    }
}

/// Writes rows with a header line.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
