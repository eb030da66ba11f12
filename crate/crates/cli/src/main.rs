//! `probe`: generate, solve, and certify probing instances from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 instance validation error,
//! 3 enumeration/state cap exceeded.

mod experiment;
mod generate;
mod instance;
mod report;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use experiment::{run_experiment, run_oracle, RunConfig, StrategyName};
use instance::{parse_instance, Instance, ValidationError};
use report::{emit_report, Format, Report};

#[derive(Parser)]
#[command(name = "probe", version, about = "Probing strategies for stochastic optimization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials when exact evaluation is out of reach.
    #[arg(long, global = true, default_value_t = 100_000)]
    mc_trials: u64,
    /// Approximation slack for the makespan threshold search.
    #[arg(long, global = true, default_value_t = 0.1)]
    eps: f64,
    /// Joint-outcome budget for exact evaluation.
    #[arg(long, global = true, default_value_t = 100_000)]
    enum_cap: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: table, csv, or json.
    #[arg(long, global = true, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance file.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Evaluate probing strategies on an instance.
    Solve {
        instance: PathBuf,
        /// Strategies to run (repeatable): none, all, nonadaptive.
        #[arg(long, default_values_t = vec![StrategyName::Nonadaptive], value_parser = clap::value_parser!(StrategyName))]
        strategy: Vec<StrategyName>,
        /// Require the instance to carry this objective.
        #[arg(long)]
        objective: Option<String>,
        /// Add exact hard-budget oracle columns (small instances only).
        #[arg(long, default_value_t = false)]
        with_oracle: bool,
    },
    /// Run a brute-force oracle: hard, soft-lb, nonadaptive, or outlier.
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        mode: String,
    },
    /// Evaluate a stored probe-set policy against an instance.
    Eval {
        instance: PathBuf,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Re-emit a stored JSON report in another format.
    Report { input: PathBuf },
}

#[derive(Subcommand)]
enum GenCmd {
    /// The family where probing beats no probing by a factor ~n/3.
    Benefit {
        #[arg(long, default_value_t = 20)]
        n: usize,
    },
    /// The arbitrary-centers construction with a scripted adaptive edge.
    Gap {
        #[arg(long, default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value_t = 8)]
        pairs: usize,
        #[arg(long, default_value_t = 9)]
        redundancy: usize,
    },
    /// A seeded random instance.
    Random {
        #[arg(long)]
        objective: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
    },
}

#[derive(Deserialize)]
struct PolicyFile {
    probe_set: Vec<usize>,
}

fn write_output(global: &GlobalArgs, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_config(global: &GlobalArgs, with_oracle: bool) -> RunConfig {
    RunConfig {
        seed: global.seed,
        mc_trials: global.mc_trials,
        eps: global.eps,
        enum_cap: global.enum_cap,
        with_oracle,
    }
}

fn emit(global: &GlobalArgs, report: &Report) -> Result<()> {
    write_output(global, &emit_report(report, global.format)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { what } => {
            let file = match what {
                GenCmd::Benefit { n } => {
                    if n < 2 {
                        return Err(ValidationError("benefit: need n >= 2".into()).into());
                    }
                    generate::benefit_file(n)
                }
                GenCmd::Gap { copies, pairs, redundancy } => {
                    generate::gap_file(copies, pairs, redundancy)?
                }
                GenCmd::Random { objective, n, max_support } => {
                    generate::random_file(&objective, n, max_support, cli.global.seed)?
                }
            };
            write_output(&cli.global, &file.emit())
        }
        Cmd::Solve { instance, strategy, objective, with_oracle } => {
            let (_, inst) = parse_instance(&instance)?;
            if let Some(want) = objective {
                if want != inst.objective_name() {
                    return Err(ValidationError(format!(
                        "objective: instance is {}, not {want}",
                        inst.objective_name()
                    ))
                    .into());
                }
            }
            let cfg = run_config(&cli.global, with_oracle);
            let report = run_experiment(&inst, &strategy, &cfg)?;
            emit(&cli.global, &report)
        }
        Cmd::Oracle { instance, mode } => {
            let (_, inst) = parse_instance(&instance)?;
            let cfg = run_config(&cli.global, false);
            let report = run_oracle(&inst, &mode, &cfg)?;
            emit(&cli.global, &report)
        }
        Cmd::Eval { instance, policy } => {
            let (_, inst) = parse_instance(&instance)?;
            let text = std::fs::read_to_string(&policy)
                .with_context(|| format!("reading {}", policy.display()))?;
            let policy: PolicyFile = serde_json::from_str(&text)
                .map_err(|e| ValidationError(format!("policy file: {e}")))?;
            if let Some(&bad) = policy.probe_set.iter().find(|&&i| i >= inst.num_items()) {
                return Err(ValidationError(format!(
                    "policy file: probe index {bad} out of range"
                ))
                .into());
            }
            let cfg = run_config(&cli.global, false);
            let (set, value) = experiment::evaluate_strategy(&inst, Some(policy.probe_set), &cfg)?;
            let (value, value_kind, half_width) = match value {
                probe_core::eval::ValueEstimate::Exact(v) => (v, "exact".to_string(), None),
                probe_core::eval::ValueEstimate::MonteCarlo { mean, half_width, .. } => {
                    (mean, "mc".to_string(), Some(half_width))
                }
            };
            let cost = match &inst {
                Instance::Wct(i) => i.probe_cost_of(&set),
                Instance::Makespan(i) => i.probe_cost_of(&set),
                Instance::KMedian(i) => i.nodes().probe_cost_of(&set),
                Instance::Steiner(i) => i.nodes().probe_cost_of(&set),
            };
            let report = Report {
                objective: inst.objective_name().into(),
                seed: cli.global.seed,
                rows: vec![report::ReportRow {
                    strategy: "stored-policy".into(),
                    policy: report::describe_probe_set(&set),
                    value,
                    value_kind,
                    half_width,
                    probe_cost_max: cost,
                    probe_cost_expected: cost,
                    opt_hard: None,
                    value_over_opt: None,
                    cost_over_budget: Some(cost / inst.budget()),
                }],
            };
            emit(&cli.global, &report)
        }
        Cmd::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let report: Report = serde_json::from_str(&text)
                .map_err(|e| ValidationError(format!("report file: {e}")))?;
            emit(&cli.global, &report)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(core) = err.downcast_ref::<probe_core::Error>() {
        return match core {
            probe_core::Error::EnumerationTooLarge { .. }
            | probe_core::Error::StateSpaceTooLarge { .. } => 3,
            probe_core::Error::InvalidDist(_)
            | probe_core::Error::InvalidInstance(_)
            | probe_core::Error::BrokenMetric(_) => 2,
            _ => 1,
        };
    }
    if err.downcast_ref::<ValidationError>().is_some() {
        return 2;
    }
    1
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}
