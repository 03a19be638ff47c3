//! The `simulate`, `oracle` and `verify` subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dynamarket::acceptance::{run_suite, CRITERIA, DEFAULT_SEED};
use dynamarket::engine::SnapshotWriter;
use dynamarket::oracle::{
    bounds_table, jsq_pair, supermarket_marginal, truncation_bound, zero_on_update_exact, zero_queue_lower_bound,
};
use dynamarket::{simulate_with, EngineConfig, ModelParams, OracleError, ParamError, StationaryDist};

use crate::config::{Config, ConfigError, View};
use crate::rules::HorizonRule;
use crate::{CliError, Global, OracleCommand, System};

/// The config key a parameter error is about.
pub fn param_key(e: &ParamError) -> &'static str {
    match e {
        ParamError::EmptyVertexSet => "n",
        ParamError::ZeroHalfOrder | ParamError::Divisibility { .. } => "r",
        ParamError::ZeroRegularity => "d",
        ParamError::ArrivalRate(_) => "lambda",
        ParamError::SwapRate(_) => "kappa",
    }
}

pub fn model_from(view: &View<'_>, n: u32, r: u32, d: u32, lambda: f64, kappa: f64) -> Result<ModelParams, ConfigError> {
    ModelParams::new(n, r, d, lambda, kappa).map_err(|e| view.error_at(param_key(&e), e.to_string()))
}

/// Standard output, or a buffered file.
pub fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(e: io::Error) -> CliError {
    CliError::Runtime(format!("write failed: {e}"))
}

pub fn simulate(path: &Path, global: &Global) -> Result<(), CliError> {
    let config = Config::load(path)?;
    config.only_sections(&["model", "simulate"])?;
    let model = config.require("model")?;
    model.only_keys(&["n", "r", "d", "lambda", "kappa"])?;
    let run = config.require("simulate")?;
    run.only_keys(&["horizon", "seed", "snapshot_start", "snapshot_interval", "snapshots"])?;

    let n: u32 = model.required("n")?;
    let params = model_from(
        &model,
        n,
        model.required("r")?,
        model.get("d")?.unwrap_or(1),
        model.required("lambda")?,
        model.required("kappa")?,
    )?;
    let horizon = run.required::<HorizonRule>("horizon")?.resolve(n);
    let seed = match global.seed {
        Some(s) => s,
        None => run.required("seed")?,
    };
    let mut cfg = EngineConfig::new(params, horizon, seed);
    let interval: Option<f64> = run.get("snapshot_interval")?;
    let snapshots: Option<PathBuf> = run.get("snapshots")?;
    if let Some(interval) = interval {
        if !(interval > 0.0) {
            return Err(run.error_at("snapshot_interval", "snapshot_interval must be positive".into()).into());
        }
        cfg = cfg.with_snapshots(run.get("snapshot_start")?.unwrap_or(0.0), interval);
    } else if snapshots.is_some() {
        return Err(run.error_at("snapshots", "`snapshots` needs `snapshot_interval`".into()).into());
    }
    cfg.validate().map_err(|e| run.error_at("horizon", e.to_string()))?;

    let start = Instant::now();
    let summary = match &snapshots {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?;
            let mut writer = SnapshotWriter::new(BufWriter::new(file));
            simulate_with(&cfg, &mut [&mut writer])
        }
        None => simulate_with(&cfg, &mut []),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut json = serde_json::to_value(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    json["wall_clock_ms"] = serde_json::json!(start.elapsed().as_millis() as u64);
    let mut out = open_out(global.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &json).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_err)
}

fn oracle_err(e: OracleError) -> CliError {
    match e {
        OracleError::CapExceeded { .. } | OracleError::Params(_) | OracleError::InvalidBound(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn usage<E: ToString>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn oracle(which: &OracleCommand, global: &Global) -> Result<(), CliError> {
    let mut out = open_out(global.out.as_deref())?;
    let cap = global.cap_states;
    match *which {
        OracleCommand::Exact {
            system,
            lambda,
            k,
            n,
            r,
            d,
            kappa,
        } => {
            let dist = match system {
                System::Supermarket => {
                    let p = ModelParams::new(n, r, d, lambda, kappa).map_err(usage)?;
                    supermarket_marginal(&p, k, cap).map_err(oracle_err)?
                }
                System::JsqPair => {
                    let sol = jsq_pair(lambda, k).map_err(oracle_err)?;
                    StationaryDist {
                        mass: sol.marginal(2 * k, |s| s.queues.iter().map(|&q| u32::from(q)).sum()),
                        truncation_error_bound: 2.0 * truncation_bound(lambda, 2, k),
                        residual: sol.residual,
                    }
                }
            };
            dist.write_csv(&mut out).map_err(io_err)?;
        }
        OracleCommand::ZeroOnUpdate { lambda, r, d, kappa, k } => {
            // n is irrelevant to the hyperstar chain; any valid value will do
            let p = ModelParams::new(2 * r, r, d, lambda, kappa).map_err(usage)?;
            let rho = zero_on_update_exact(&p, k, cap).map_err(oracle_err)?;
            writeln!(out, "# K={k} residual={:e}", rho.residual).map_err(io_err)?;
            writeln!(out, "length,mass,lower_bound,holds").map_err(io_err)?;
            for (x, &mass) in rho.mass.iter().enumerate() {
                let bound = zero_queue_lower_bound(&p, x as u32);
                writeln!(out, "{x},{mass:e},{bound:e},{}", mass >= bound).map_err(io_err)?;
            }
        }
        OracleCommand::Bounds { lambda, m, k_max, kappa } => {
            if !(lambda > 0.0 && lambda.is_finite()) || m == 0 {
                return Err(CliError::Usage("need lambda > 0 and m >= 1".into()));
            }
            out.write_all(bounds_table(lambda, m, kappa, k_max).as_bytes()).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

pub fn verify(criteria: &[u32], global: &Global) -> Result<(), CliError> {
    let ids = if criteria.is_empty() { CRITERIA.to_vec() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.contains(id)) {
        return Err(CliError::Usage(format!("no criterion {bad}; ids run from 1 to 11")));
    }
    let seed = global.seed.unwrap_or(DEFAULT_SEED);
    let reports = run_suite(&ids, seed, |r| println!("{r}"));
    if let Some(path) = &global.out {
        let mut out = open_out(Some(path))?;
        serde_json::to_writer_pretty(&mut out, &reports).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(out).and_then(|_| out.flush()).map_err(io_err)?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.id.to_string()).collect();
    println!("{} of {} criteria pass", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria failed: {}", failed.join(", "))))
    }
}
