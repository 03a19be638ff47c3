//! Grid sweeps: every (n, kappa rule, lambda) point, replicas in parallel,
//! rows written point by point through one writer, and a manifest that
//! records the resolved grid and how far the run got.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use dynamarket::analysis::{
    chaos_test, coalescence_time, default_burn_in, estimate_marginal, loaded_half, write_rows, ResultRow,
};
use dynamarket::engine::{replica_config, run_replicas_map};
use dynamarket::seed::derive_seed;
use dynamarket::{simulate, EngineConfig, ModelParams, QueueVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::model_from;
use crate::config::{Config, ConfigError};
use crate::rules::{HorizonRule, KappaRule};
use crate::{CliError, Global};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Max,
    Marginal,
    Coalescence,
    Chaos,
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Self::Max),
            "marginal" => Ok(Self::Marginal),
            "coalescence" => Ok(Self::Coalescence),
            "chaos" => Ok(Self::Chaos),
            other => Err(format!("unknown statistic `{other}`; use max, marginal, coalescence or chaos")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSpec {
    pub n: Vec<u32>,
    pub kappa: Vec<KappaRule>,
    pub lambda: Vec<f64>,
    pub r: u32,
    pub d: u32,
    pub horizon: HorizonRule,
    pub replicas: usize,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
    /// `None` means the default rule per point.
    pub burn_in: Option<f64>,
    pub sample_interval: f64,
    pub chaos_replicas: usize,
    pub chaos_x: u32,
    pub coalescence_cap: f64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct Point {
    pub index: usize,
    pub n: u32,
    pub kappa_rule: KappaRule,
    pub kappa: f64,
    pub lambda: f64,
    pub horizon: f64,
    pub seed: u64,
    #[serde(skip)]
    pub params: ModelParams,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: String,
    spec: &'a SweepSpec,
    grid_size: usize,
    points: &'a [Point],
    status: &'static str,
    completed_points: usize,
    rows: usize,
    error: Option<String>,
}

const KEYS: &[&str] = &[
    "n",
    "kappa",
    "lambda",
    "r",
    "d",
    "horizon",
    "replicas",
    "seed",
    "statistics",
    "burn_in",
    "sample_interval",
    "chaos_replicas",
    "chaos_x",
    "coalescence_cap",
    "out",
];

impl SweepSpec {
    pub fn from_config(config: &Config, global: &Global) -> Result<(Self, Vec<Point>), ConfigError> {
        config.only_sections(&["sweep"])?;
        let s = config.require("sweep")?;
        s.only_keys(KEYS)?;
        let list_required = |key: &str| config.error(s.line_of(key), format!("[sweep] needs a nonempty `{key}` list"));
        let spec = Self {
            n: s.list("n")?.ok_or_else(|| list_required("n"))?,
            kappa: s.list("kappa")?.ok_or_else(|| list_required("kappa"))?,
            lambda: s.list("lambda")?.ok_or_else(|| list_required("lambda"))?,
            r: s.get("r")?.unwrap_or(1),
            d: s.get("d")?.unwrap_or(1),
            horizon: s.get("horizon")?.unwrap_or(HorizonRule::PerVertex(1.0)),
            replicas: s.get("replicas")?.unwrap_or(1),
            seed: match global.seed {
                Some(seed) => seed,
                None => s.get("seed")?.unwrap_or(1),
            },
            statistics: s.list("statistics")?.unwrap_or_else(|| vec![Statistic::Max]),
            burn_in: global.burn_in.or(s.get("burn_in")?),
            sample_interval: s.get("sample_interval")?.unwrap_or(1.0),
            chaos_replicas: s.get("chaos_replicas")?.unwrap_or(100),
            chaos_x: s.get("chaos_x")?.unwrap_or(2),
            coalescence_cap: s.get("coalescence_cap")?.unwrap_or(1e4),
            out: match &global.out {
                Some(p) => p.clone(),
                None => s.get("out")?.ok_or_else(|| s.error_at("out", "[sweep] needs `out` or --out".into()))?,
            },
        };
        if spec.replicas == 0 {
            return Err(s.error_at("replicas", "replicas must be at least 1".into()));
        }
        if let Some(b) = spec.burn_in {
            if !(b >= 0.0) {
                return Err(s.error_at("burn_in", "burn_in must be nonnegative".into()));
            }
        }
        let mut points = Vec::new();
        for &n in &spec.n {
            for &rule in &spec.kappa {
                for &lambda in &spec.lambda {
                    let kappa = rule.resolve(n);
                    let params = model_from(&s, n, spec.r, spec.d, lambda, kappa)?;
                    let index = points.len();
                    points.push(Point {
                        index,
                        n,
                        kappa_rule: rule,
                        kappa,
                        lambda,
                        horizon: spec.horizon.resolve(n),
                        seed: derive_seed(spec.seed, index as u64),
                        params,
                    });
                }
            }
        }
        Ok((spec, points))
    }

    fn burn_in_for(&self, p: &ModelParams) -> f64 {
        self.burn_in.unwrap_or_else(|| default_burn_in(p))
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_millis() as u64)
}

/// All rows of one grid point.
fn run_point(spec: &SweepSpec, point: &Point) -> Result<Vec<ResultRow>, String> {
    let cfg = EngineConfig::new(point.params.clone(), point.horizon, point.seed);
    let burn_in = spec.burn_in_for(&point.params);
    let row = |replica: usize, seed: u64| ResultRow::new("sweep", &point.params, point.horizon, replica as u32, seed);
    let mut rows = Vec::new();
    for stat in &spec.statistics {
        match stat {
            Statistic::Max => {
                let out = run_replicas_map(&cfg, spec.replicas, |i, c| {
                    let (s, ms) = timed(|| simulate(&c));
                    let s = s?;
                    let mut r = row(i, c.seed).stat("max_queue", f64::from(s.max_queue_seen), 0.0, 1);
                    r.wall_clock_ms = ms;
                    Ok(r)
                })
                .map_err(|e| e.to_string())?;
                rows.extend(out);
            }
            Statistic::Marginal => {
                let out = run_replicas_map(&cfg, spec.replicas, |i, c| {
                    let (est, ms) = timed(|| estimate_marginal(&c, burn_in, spec.sample_interval));
                    let est = est?;
                    let k = est.samples() as f64;
                    Ok((0..est.weights().len() as u32)
                        .map(|x| {
                            let p = est.prob(x);
                            let mut r = row(i, c.seed).stat(&format!("marginal_p{x}"), p, (p * (1.0 - p) / k).sqrt(), est.samples());
                            r.wall_clock_ms = ms;
                            r
                        })
                        .collect::<Vec<_>>())
                })
                .map_err(|e| e.to_string())?;
                rows.extend(out.into_iter().flatten());
            }
            Statistic::Coalescence => {
                let n = point.n;
                let (a, b) = (loaded_half(n), QueueVector::empty(n as usize));
                let out = (0..spec.replicas)
                    .into_par_iter()
                    .map(|i| {
                        let seed = replica_config(&cfg, i).seed;
                        let (res, ms) = timed(|| coalescence_time(&point.params, &a, &b, seed, spec.coalescence_cap));
                        let res = res.map_err(|e| e.to_string())?;
                        let mut t = row(i, seed).stat("coalescence_time", res.time, 0.0, 1);
                        t.wall_clock_ms = ms;
                        let capped = row(i, seed).stat("coalescence_capped", f64::from(u8::from(res.capped)), 0.0, 1);
                        Ok(vec![t, capped])
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                rows.extend(out.into_iter().flatten());
            }
            Statistic::Chaos => {
                let (est, ms) = timed(|| chaos_test(&cfg.clone().with_horizon(burn_in), spec.chaos_x, spec.chaos_replicas, burn_in));
                let est = est.map_err(|e| e.to_string())?;
                let mut r = ResultRow::new("sweep", &point.params, burn_in, 0, point.seed).stat(
                    &format!("chaos_tv_x{}", spec.chaos_x),
                    est.tv,
                    f64::NAN,
                    spec.chaos_replicas as u64,
                );
                r.wall_clock_ms = ms;
                rows.push(r);
            }
        }
    }
    Ok(rows)
}

pub fn run(config_path: &Path, global: &Global) -> Result<(), CliError> {
    let config = Config::load(config_path)?;
    let (spec, points) = SweepSpec::from_config(&config, global)?;
    eprintln!(
        "sweep: {} points x {} replicas, statistics {:?}",
        points.len(),
        spec.replicas,
        spec.statistics
    );
    if let Some(dir) = spec.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    let file = File::create(&spec.out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", spec.out.display())))?;
    let mut out = BufWriter::new(file);
    let mut header = true;
    let mut completed = 0;
    let mut written = 0;
    let mut failure = None;
    for point in &points {
        match run_point(&spec, point) {
            Ok(rows) => {
                let mut buf = Vec::new();
                write_rows(&mut buf, &rows).map_err(|e| CliError::Runtime(e.to_string()))?;
                let text = String::from_utf8(buf).expect("csv output is utf-8");
                let body = if header { text.as_str() } else { text.split_once('\n').map_or("", |(_, b)| b) };
                out.write_all(body.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Runtime(format!("write failed: {e}")))?;
                header &= rows.is_empty();
                completed += 1;
                written += rows.len();
            }
            Err(e) => {
                failure = Some(format!("point {} (n={} kappa={}): {e}", point.index, point.n, point.kappa));
                break;
            }
        }
    }
    let manifest = Manifest {
        config: config_path.display().to_string(),
        spec: &spec,
        grid_size: points.len(),
        points: &points,
        status: if failure.is_some() { "failed" } else { "complete" },
        completed_points: completed,
        rows: written,
        error: failure.clone(),
    };
    let path = manifest_path(&spec.out);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    match failure {
        Some(e) => Err(CliError::Runtime(format!("{e}; {completed} points kept in {}", spec.out.display()))),
        None => Ok(()),
    }
}
