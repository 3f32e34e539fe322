//! Executes one configured experiment into an atomically committed run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use hermite_core::chaos::{
    chaos_projection_profile_with_ceiling, c1_constant, enumerate_contractions_with_ceiling, Regime,
    DEFAULT_CEILING,
};
use hermite_core::functional::{
    cross_independence, eps_seed, functional_samples, gaussianity_report, kappa_from_terminal,
    limit_covariance_srd, scaling_fit, CenteringOptions, FunctionalSample, Model, SeriesEvaluator,
};
use hermite_core::functional::diagnostics::MIN_GAUSSIANITY_REPLICAS;
use hermite_core::homogenization::run_homogenization;
use hermite_core::process::{
    io::{write_binary, write_csv},
    simulate_fbm, simulate_hermite, simulate_hou, simulate_volterra, PathGrid,
};
use hermite_core::rng::derive_seed;
use hermite_core::stats::{excess_kurtosis, mean, skewness, variance};
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind, PathFormat, ProcessKind};
use crate::output::{Manifest, StagedDir, MANIFEST, SUMMARY};

pub const DEFAULT_FUNCTIONAL_REPLICAS: usize = 1000;
pub const DEFAULT_HOMOGENIZE_REPLICAS: usize = 2000;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Value,
    /// Verdict for kinds that carry one (homogenize, verify).
    pub pass: Option<bool>,
}

/// Runs `config` inside a pool of `threads` workers (the global pool when absent).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut dir = StagedDir::create(out)?;
    let (summary, pass) = with_threads(config.threads, || -> Result<(Value, Option<bool>)> {
        match config.kind {
            ExperimentKind::Decompose => decompose(config, &mut dir).map(|s| (s, None)),
            ExperimentKind::Simulate => simulate(config, &mut dir).map(|s| (s, None)),
            ExperimentKind::Functional => functional(config, &mut dir).map(|s| (s, None)),
            ExperimentKind::Homogenize => homogenize(config, &mut dir),
            ExperimentKind::Verify => {
                let only = config.verify.as_ref().map(|v| v.only.clone()).unwrap_or_default();
                let names = crate::verify::select(&only)?;
                let report = crate::verify::run_suite(&names, config.seed, |line| println!("{line}"));
                let pass = report.pass();
                Ok((serde_json::to_value(&report)?, Some(pass)))
            }
        }
    })??;
    dir.write_json(SUMMARY, &summary)?;
    let mut files = dir.files().to_vec();
    files.sort();
    let manifest = Manifest {
        kind: serde_json::to_value(config.kind)?.as_str().unwrap_or_default().to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: config.threads.unwrap_or_else(rayon::current_num_threads),
        files,
    };
    dir.write_json(MANIFEST, &manifest)?;
    let dir = dir.commit()?;
    Ok(RunOutcome { dir, summary, pass })
}

fn decompose(config: &ExperimentConfig, dir: &mut StagedDir) -> Result<Value> {
    let d = config.decompose.as_ref().ok_or_else(|| ConfigError("missing [decompose] section".into()))?;
    let ceiling = d.ceiling.unwrap_or(DEFAULT_CEILING);
    let vectors: Vec<Value> = enumerate_contractions_with_ceiling(d.k, d.m, ceiling)?
        .iter()
        .map(|v| json!({"r": v.r, "delta": v.delta, "c1": c1_constant(v).to_string()}))
        .collect();
    let profile: serde_json::Map<String, Value> = chaos_projection_profile_with_ceiling(d.k, d.m, ceiling)?
        .into_iter()
        .map(|(deg, c)| (deg.to_string(), Value::String(c.to_string())))
        .collect();
    let doc = json!({"k": d.k, "m": d.m, "vectors": vectors, "profile": profile});
    dir.write_json("profile.json", &doc)?;
    Ok(doc)
}

fn simulate(config: &ExperimentConfig, dir: &mut StagedDir) -> Result<Value> {
    let s = config.simulate.as_ref().ok_or_else(|| ConfigError("missing [simulate] section".into()))?;
    let params = config.hurst_params()?;
    let kernel = match s.process {
        ProcessKind::Volterra => Some(config.kernel_spec()?),
        _ => None,
    };
    let replicas = config.replicas_or(1);
    let paths: Vec<Result<PathGrid>> = {
        use rayon::prelude::*;
        (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let mut cfg = config.sim.sim_config(s.n_steps, config.seed);
                cfg.replica = r;
                let path = match s.process {
                    ProcessKind::Fbm => simulate_fbm(params.h, &cfg)?,
                    ProcessKind::Hermite => simulate_hermite(&params, &cfg)?,
                    ProcessKind::Volterra => simulate_volterra(kernel.as_ref().expect("kernel checked"), &params, &cfg)?,
                    ProcessKind::Hou => simulate_hou(s.lambda, s.sigma, &params, &cfg)?,
                };
                Ok(path)
            })
            .collect()
    };
    let mut entries = Vec::with_capacity(replicas);
    for (r, path) in paths.into_iter().enumerate() {
        let path = path?;
        let (name, bytes) = match s.format {
            PathFormat::Csv => {
                let mut buf = Vec::new();
                write_csv(&path, &mut buf)?;
                (format!("path_{r:04}.csv"), buf)
            }
            PathFormat::Binary => {
                let mut buf = Vec::new();
                write_binary(&path, &mut buf)?;
                (format!("path_{r:04}.bin"), buf)
            }
        };
        dir.write(&name, &bytes)?;
        entries.push(json!({"file": name, "meta": path.meta}));
    }
    Ok(json!({
        "process": s.process,
        "params": {"h": params.h, "m": params.m},
        "n_steps": s.n_steps,
        "dt": config.sim.dt,
        "paths": entries,
    }))
}

fn build_model(config: &ExperimentConfig) -> Result<Model> {
    Ok(Model::new(config.hurst_params()?, config.kernel_spec()?, config.sim.clone()))
}

fn build_evaluators(config: &ExperimentConfig, model: &Model) -> Result<Vec<SeriesEvaluator>> {
    let opts = CenteringOptions {
        calibration_samples: config.functional.calibration_samples,
        seed: derive_seed(config.seed, "centering"),
        ..Default::default()
    };
    config
        .series
        .iter()
        .map(|s| {
            let series = s.to_series()?;
            let eval = SeriesEvaluator::with_options(&s.id, &series, model, s.centering, &opts)
                .with_context(|| format!("series {:?}", s.id))?;
            if hermite_core::chaos::classify_regime(&model.params, eval.rank).is_boundary() {
                return Err(ConfigError(format!(
                    "series {:?} (rank {}) sits on the boundary H*(w) = 1/2",
                    s.id, eval.rank
                ))
                .into());
            }
            Ok(eval)
        })
        .collect()
}

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn moments(x: &[f64]) -> Value {
    json!({
        "mean": mean(x),
        "variance": variance(x),
        "l2_norm": (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt(),
        "skewness": skewness(x),
        "excess_kurtosis": excess_kurtosis(x),
    })
}

fn histogram(x: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in x {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

fn functional(config: &ExperimentConfig, dir: &mut StagedDir) -> Result<Value> {
    let model = build_model(config)?;
    let evals = build_evaluators(config, &model)?;
    let replicas = config.replicas_or(DEFAULT_FUNCTIONAL_REPLICAS);
    let opts = &config.functional;
    let mut rows = String::from("eps,series,replica,t,value\n");
    let mut hist = String::from("series,eps,bin_lo,bin_hi,count\n");
    let mut per_eps = Vec::new();
    // terminal[series][eps index]
    let mut terminal: Vec<Vec<Vec<f64>>> = vec![Vec::new(); evals.len()];
    for &eps in &config.eps {
        let samples = functional_samples(&evals, &model, eps, &config.t_grid, replicas, eps_seed(config.seed, eps))?;
        let mut series_stats = serde_json::Map::new();
        for (s, sample) in samples.iter().enumerate() {
            for (r, row) in sample.values.iter().enumerate() {
                for (t, v) in config.t_grid.iter().zip(row) {
                    writeln!(rows, "{},{},{r},{},{}", fmt_f(eps), sample.series_id, fmt_f(*t), fmt_f(*v))?;
                }
            }
            let term = sample.terminal();
            for (lo, hi, c) in histogram(&term, opts.histogram_bins) {
                writeln!(hist, "{},{},{},{},{c}", sample.series_id, fmt_f(eps), fmt_f(lo), fmt_f(hi))?;
            }
            let diag = if replicas >= MIN_GAUSSIANITY_REPLICAS {
                serde_json::to_value(gaussianity_report(sample)?)?
            } else {
                json!({"skipped": format!("needs at least {MIN_GAUSSIANITY_REPLICAS} replicas")})
            };
            series_stats.insert(
                sample.series_id.clone(),
                json!({"terminal": moments(&term), "diagnostics": diag, "regime": sample.regime}),
            );
            terminal[s].push(term);
        }
        let cross = cross_pairs(&samples)?;
        per_eps.push(json!({"eps": eps, "series": series_stats, "cross": cross}));
    }
    dir.write("functional.csv", rows.as_bytes())?;
    dir.write("histogram.csv", hist.as_bytes())?;

    let t_end = *config.t_grid.last().expect("validated non-empty");
    let mut scaling_csv = String::from("series,eps,log_inv_eps,log_var\n");
    let mut series_summary = serde_json::Map::new();
    for (s, eval) in evals.iter().enumerate() {
        let regime = hermite_core::chaos::classify_regime(&model.params, eval.rank);
        let raw: Vec<Vec<f64>> = config
            .eps
            .iter()
            .zip(&terminal[s])
            .map(|(&eps, term)| {
                let alpha = eps.powf(regime.scaling_exponent);
                term.iter().map(|v| v / alpha).collect()
            })
            .collect();
        for (eps, r) in config.eps.iter().zip(&raw) {
            writeln!(scaling_csv, "{},{},{},{}", eval.id, fmt_f(*eps), fmt_f(-eps.ln()), fmt_f(variance(r).ln()))?;
        }
        let scaling = match scaling_fit(&config.eps, &raw, &model, eval.rank) {
            Ok(est) => serde_json::to_value(est)?,
            Err(e) => json!({"skipped": e.to_string()}),
        };
        let limit = if !opts.limits {
            Value::Null
        } else {
            match regime.regime {
                Regime::ShortRange => {
                    let n = opts.lambda_replicas.unwrap_or(replicas);
                    let seed = derive_seed(config.seed, &format!("lambda/{}", eval.id));
                    json!({"lambda": limit_covariance_srd(eval, eval, &model, opts.lag_cutoff, n, seed)?})
                }
                Regime::LongRange if config.eps.len() >= 2 && (t_end - 1.0).abs() < 1e-12 => {
                    json!({"kappa": kappa_from_terminal(&config.eps, &terminal[s])?})
                }
                Regime::LongRange => json!({"skipped": "kappa needs two eps values and a t_grid ending at 1"}),
                Regime::Boundary => Value::Null,
            }
        };
        series_summary.insert(
            eval.id.clone(),
            json!({"rank": eval.rank, "regime": regime, "centered": eval.centered, "scaling": scaling, "limit": limit}),
        );
    }
    dir.write("scaling.csv", scaling_csv.as_bytes())?;
    Ok(json!({
        "params": {"h": model.params.h, "m": model.params.m},
        "replicas": replicas,
        "eps": config.eps,
        "t_grid": config.t_grid,
        "series": series_summary,
        "per_eps": per_eps,
    }))
}

/// Independence diagnostics for every SRD/LRD pair of series.
fn cross_pairs(samples: &[FunctionalSample]) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            if a.regime.regime == b.regime.regime {
                continue;
            }
            let rep = cross_independence(a, b)?;
            out.push(json!({"a": a.series_id, "b": b.series_id, "report": rep}));
        }
    }
    Ok(out)
}

fn homogenize(config: &ExperimentConfig, dir: &mut StagedDir) -> Result<(Value, Option<bool>)> {
    let h = config.homogenize.as_ref().ok_or_else(|| ConfigError("missing [homogenize] section".into()))?;
    let model = build_model(config)?;
    let evals = build_evaluators(config, &model)?;
    let eval = match &h.series {
        Some(id) => evals.iter().find(|e| &e.id == id).ok_or_else(|| anyhow!("unknown series {id}"))?,
        None => &evals[0],
    };
    let spec = h.spec(config.replicas_or(DEFAULT_HOMOGENIZE_REPLICAS), derive_seed(config.seed, "homogenize"));
    let outcome = run_homogenization(eval, &model, &spec)?;
    let mut csv = String::from("replica,x_eps,x_limit\n");
    for (r, (a, b)) in outcome.terminal_eps.iter().zip(&outcome.terminal_limit).enumerate() {
        writeln!(csv, "{r},{},{}", fmt_f(*a), fmt_f(*b))?;
    }
    dir.write("terminal.csv", csv.as_bytes())?;
    let verdict = json!({
        "ks": outcome.weak.ks_distance,
        "threshold": outcome.weak.ks_critical,
        "pass": outcome.pass,
    });
    dir.write_json("verdict.json", &verdict)?;
    let summary = json!({
        "series": eval.id,
        "rank": eval.rank,
        "regime": outcome.regime,
        "c": outcome.c,
        "c_stderr": outcome.c_stderr,
        "limit": outcome.limit,
        "weak": outcome.weak,
        "max_solver_error": outcome.max_solver_error,
        "verdict": verdict,
    });
    Ok((summary, Some(outcome.pass)))
}
