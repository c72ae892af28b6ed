//! Command-line front end: `generate`, `judge`, `fit`, `simulate`, `plan`.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 config, 4 I/O, 5 fit,
//! 6 validation or parameter errors, 7 empty input.

pub mod commands;
pub mod config;
pub mod records;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::scaling::{FitMethod, FitOptions, SaturatedPoints};
use crate::scoring::Criterion;
use config::{PlanSection, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "seqcliff", version, about = "Sequence benchmarks, SAR curves, scaling fits and error-model simulation")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides SEQCLIFF_OUT_DIR and the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Scoring criterion for `judge`.
    #[arg(long, global = true)]
    pub criterion: Option<Criterion>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (advisory; results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance set (instances.jsonl).
    Generate,
    /// Score responses; writes trials.jsonl, curve.csv and rejects.jsonl.
    Judge {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        responses: PathBuf,
    },
    /// Fit the scaling law to a curve; writes fit.json.
    Fit {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Transformed)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = SaturatedArg::Exclude)]
        saturated: SaturatedArg,
    },
    /// Run the spin-glass ensemble; writes ensemble.csv, theory.csv and optionally synthetic_curve.csv.
    Simulate,
    /// Tabulate divide-and-conquer plans; writes plan.csv. Flags override `[plan]`.
    Plan {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta0: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        k_max: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Transformed,
    Ml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SaturatedArg {
    Exclude,
    Clip,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn plan_section(cfg: &RunConfig, command: &Command) -> Result<PlanSection> {
    let Command::Plan {
        alpha,
        beta0,
        theta,
        n,
        k_max,
    } = command
    else {
        unreachable!("only called for plan")
    };
    let base = cfg.plan.as_ref();
    let need = |flag: Option<f64>, from: Option<f64>, name: &str| {
        flag.or(from)
            .ok_or_else(|| config::config_err(&format!("plan.{name}"), "missing (give the flag or the config key)"))
    };
    Ok(PlanSection {
        alpha: need(*alpha, base.map(|p| p.alpha), "alpha")?,
        beta0: need(*beta0, base.map(|p| p.beta0), "beta0")?,
        theta: theta.or(base.map(|p| p.theta)).unwrap_or(1.0),
        n: need(*n, base.map(|p| p.n), "n")?,
        k_max: k_max
            .or(base.map(|p| p.k_max))
            .ok_or_else(|| config::config_err("plan.k_max", "missing (give the flag or the config key)"))?,
    })
}

/// Runs one subcommand and returns a one-line summary for stdout.
pub fn run(cli: &Cli) -> Result<String> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::param("threads", "must be at least 1"));
        }
        // Fails harmlessly when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cfg = load_config(cli)?;
    let out = cfg.out_dir(cli.out.as_deref());
    match &cli.command {
        Command::Generate => {
            let (path, count) = commands::cmd_generate(&cfg, &out, cli.seed)?;
            Ok(format!("wrote {count} instances to {}", path.display()))
        }
        Command::Judge { instances, responses } => {
            let criterion = cli
                .criterion
                .or(cfg.grid.as_ref().map(|g| g.criterion))
                .unwrap_or_default();
            let s = commands::cmd_judge(instances, responses, criterion, &out)?;
            Ok(format!(
                "judged {} responses ({} rejected) into {}",
                s.judged,
                s.rejected,
                s.curve_path.display()
            ))
        }
        Command::Fit {
            curve,
            method,
            saturated,
        } => {
            let opts = FitOptions {
                method: match method {
                    MethodArg::Transformed => FitMethod::Transformed,
                    MethodArg::Ml => FitMethod::BinomialMl,
                },
                saturated: match saturated {
                    SaturatedArg::Exclude => SaturatedPoints::Exclude,
                    SaturatedArg::Clip => SaturatedPoints::Clip,
                },
            };
            let (path, report) = commands::cmd_fit(curve, opts, &out)?;
            Ok(format!(
                "alpha = {}, beta0 = {} from {} points; report in {}",
                report.fit.alpha,
                report.fit.beta0,
                report.fit.points_used,
                path.display()
            ))
        }
        Command::Simulate => {
            let rows = commands::cmd_simulate(cfg.simulate()?, cli.seed, &out)?;
            Ok(format!("simulated {} lengths into {}", rows.len(), out.display()))
        }
        Command::Plan { .. } => {
            let plan = plan_section(&cfg, &cli.command)?;
            let (path, plans) = commands::cmd_plan(&plan, &out)?;
            Ok(format!("wrote {} plans to {}", plans.len(), path.display()))
        }
    }
}
