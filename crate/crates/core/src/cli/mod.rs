//! Command-line front end: `riskmp <command> --config <path> [--out <dir>]
//! [--seed <u64>] [--threads <n>]`.
//!
//! Exit codes: 0 success, 1 runtime failure (with `error.json` in the output
//! directory), 2 configuration or usage error.

pub mod commands;
pub mod config;
pub mod table;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::{ExperimentConfig, ProblemConfig};
pub use table::{Stamp, StampedCsv};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    Solve,
    Verify,
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "riskmp", version, about = "Risk-aware minimum principle experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Simulate the initial policy and summarize paths and costs.
    Simulate(Common),
    /// Run successive approximations and write the run artifacts.
    Solve(Common),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(Common),
    /// Render plot-ready tables from a finished solve.
    Report(Common),
}

#[derive(Debug, clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    command: &'a str,
    kind: &'a str,
    message: String,
    config_hash: &'a str,
    seed: u64,
}

fn write_error(out: &Path, command: &str, err: &Error, cfg: &ExperimentConfig) {
    let record =
        ErrorRecord { command, kind: err.kind(), message: err.to_string(), config_hash: &cfg.hash(), seed: cfg.seed };
    let _ = std::fs::create_dir_all(out);
    let mut json = serde_json::to_string_pretty(&record).expect("error record serializes");
    json.push('\n');
    let _ = std::fs::write(out.join("error.json"), json);
}

fn execute(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<bool, Error> {
    match command {
        Command::Simulate => commands::simulate(cfg, out).map(|_| true),
        Command::Solve => {
            let s = commands::solve(cfg, out)?;
            println!(
                "objective {:.6} ± {:.6}; {} iterations; converged {}; checks {}/{}",
                s.objective, s.standard_error, s.iterations, s.converged, s.checks_passed, s.checks_total
            );
            Ok(true)
        }
        Command::Verify => {
            let checks = verify::run_suite(cfg);
            std::fs::create_dir_all(out)?;
            let mut table = StampedCsv::new(commands::stamp(cfg), &["check", "passed", "detail"]);
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &checks {
                println!("{:width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
                table.push([c.name.clone(), c.passed.to_string(), c.detail.replace(',', ";")]);
            }
            table.write(&out.join("verify.csv"))?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
        Command::Report => {
            print!("{}", commands::report(cfg, out)?);
            Ok(true)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, common) = match cli.command {
        CommandArgs::Simulate(c) => (Command::Simulate, c),
        CommandArgs::Solve(c) => (Command::Solve, c),
        CommandArgs::Verify(c) => (Command::Verify, c),
        CommandArgs::Report(c) => (Command::Report, c),
    };
    let name = format!("{command:?}").to_lowercase();

    let mut cfg = match ExperimentConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("riskmp {name}: {e}");
            return 2;
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());

    let pool = match common.threads {
        Some(0) => {
            eprintln!("riskmp {name}: --threads must be positive");
            return 2;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("riskmp {name}: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(command, &cfg, &out)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("riskmp {name}: {e}");
            write_error(&out, &name, &e, &cfg);
            1
        }
    }
}
