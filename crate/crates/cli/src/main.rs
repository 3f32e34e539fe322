use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hermite_cli::config::{ConfigError, ExperimentConfig, ExperimentKind};
use hermite_cli::runner::{run_experiment, with_threads};
use hermite_cli::verify::{run_suite, select, DEFAULT_SEED};
use hermite_cli::emit_report;

#[derive(Parser, Debug)]
#[command(name = "hermite", version, about = "Wiener-chaos calculus, Hermite process simulation and homogenization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides HERMITE_THREADS and the config.
    #[arg(long, global = true, env = "HERMITE_THREADS")]
    threads: Option<usize>,
    /// Output directory (for `report`: the run directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Criteria to run (`verify`), comma-separated.
    #[arg(long, global = true)]
    only: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Contraction vectors and chaos projection profile of y^k.
    Decompose,
    /// Sample paths of fBm, Hermite, Volterra or Hermite-OU processes.
    Simulate,
    /// Normalized functionals over an eps ladder with scaling and limit estimates.
    Functional,
    /// Slow/fast system against its limit equation.
    Homogenize,
    /// Acceptance criteria with one verdict line each.
    Verify,
    /// Consolidate run directories into report.json and merged CSVs.
    Report,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Decompose => ExperimentKind::Decompose,
            Command::Simulate => ExperimentKind::Simulate,
            Command::Functional => ExperimentKind::Functional,
            Command::Homogenize => ExperimentKind::Homogenize,
            Command::Verify => ExperimentKind::Verify,
            Command::Report => return None,
        })
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn run(cli: Cli) -> Result<bool> {
    if cli.threads == Some(0) {
        return Err(usage("--threads must be >= 1"));
    }
    let Some(kind) = cli.command.kind() else {
        let dir = cli.out.ok_or_else(|| usage("report needs --out DIR pointing at a run directory"))?;
        let report = emit_report(&dir)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(true);
    };
    let config = match &cli.config {
        Some(p) => Some(ExperimentConfig::load(p)?),
        None if kind == ExperimentKind::Verify => None,
        None => return Err(usage("--config PATH is required for this subcommand")),
    };
    if let Some(c) = &config {
        if c.kind != kind {
            return Err(usage(format!("config kind {:?} does not match the subcommand", c.kind)));
        }
    }
    let Some(mut config) = config else {
        // verify without a config file
        let names = select(&cli.only)?;
        let seed = cli.seed.unwrap_or(DEFAULT_SEED);
        if let Some(out) = &cli.out {
            let mut cfg: ExperimentConfig = ExperimentConfig::parse(&format!("kind = \"verify\"\nseed = {seed}\n"))?;
            cfg.threads = cli.threads;
            cfg.verify = Some(hermite_cli::config::VerifyConfig { only: cli.only.clone() });
            return Ok(run_experiment(&cfg, out)?.pass.unwrap_or(true));
        }
        let report = with_threads(cli.threads, || run_suite(&names, seed, |line| println!("{line}")))?;
        return Ok(report.pass());
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    if !cli.only.is_empty() {
        select(&cli.only)?;
        config.verify = Some(hermite_cli::config::VerifyConfig { only: cli.only.clone() });
    }
    let out = cli
        .out
        .or_else(|| config.out.clone())
        .ok_or_else(|| usage("no output directory: pass --out DIR or set `out` in the config"))?;
    let outcome = run_experiment(&config, &out)?;
    eprintln!("wrote {}", outcome.dir.display());
    Ok(outcome.pass.unwrap_or(true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<ConfigError>().is_some()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
