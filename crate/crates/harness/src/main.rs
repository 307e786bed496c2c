use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use moaccel_cli::acceptance;
use moaccel_cli::config::{parse_config, parse_sweep};
use moaccel_cli::report::{emit_report, Report};
use moaccel_cli::runner::{run_plan, run_sweep};

#[derive(Parser)]
#[command(name = "moaccel", version, about = "Accelerated multiobjective gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (run) or parent directory (sweep)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Plans to execute concurrently in a sweep
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Also write every iterate to iterates.csv
    #[arg(long, global = true)]
    store_iterates: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single plan
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Expand list values into plans and execute them all
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in acceptance suite
    Check,
    /// Recompute the report of an existing run directory
    Report { run_dir: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn summarize(label: &str, dir: &Path, report: &Report) {
    let status = if report.passed() { "ok" } else { "FAILED" };
    let slope = report.rate_slope.map_or("n/a".to_string(), |s| format!("{s:.3}"));
    println!(
        "{label}: {status} ({}, rate slope {slope}, {:.2}s) -> {}",
        report.termination,
        report.wall_time,
        dir.display()
    );
    for r in report.failed_invariants() {
        println!("  {} violated by {:e}", r.name, r.worst_violation);
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let mut plan = parse_config(&read(&config)?).with_context(|| format!("in {}", config.display()))?;
            plan.store_iterates |= cli.store_iterates;
            let Some(dir) = cli.out.or_else(|| plan.output_dir.clone()) else {
                bail!("no output directory: pass --out or set `dir` in [output]");
            };
            let report = run_plan(&plan, &dir)?;
            summarize(plan.mode.as_str(), &dir, &report);
            Ok(report.passed())
        }
        Command::Sweep { config } => {
            let mut plans = parse_sweep(&read(&config)?).with_context(|| format!("in {}", config.display()))?;
            for (_, plan) in plans.iter_mut() {
                plan.store_iterates |= cli.store_iterates;
            }
            let Some(base) = cli.out.or_else(|| plans.first().and_then(|(_, p)| p.output_dir.clone())) else {
                bail!("no output directory: pass --out or set `dir` in [output]");
            };
            let mut all_passed = true;
            for (label, dir, report) in run_sweep(&plans, &base, cli.workers)? {
                match report {
                    Ok(report) => {
                        summarize(&label, &dir, &report);
                        all_passed &= report.passed();
                    }
                    Err(e) => {
                        println!("{label}: error: {e:#}");
                        all_passed = false;
                    }
                }
            }
            Ok(all_passed)
        }
        Command::Check => {
            let outcomes = acceptance::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Report { run_dir } => {
            let report = emit_report(&run_dir)?;
            println!("{}", serde_json::to_string_pretty(&report.to_json())?);
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
