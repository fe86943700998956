use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{read_run, write_run};
use crate::run::run_experiment;
use crate::sweep::{parse_horizons, sweep};
use crate::verify::{verify_bounds, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

const DEFAULT_OUT: &str = "usc-out";

#[derive(Debug, Parser)]
#[command(name = "usc", version, about = "Universal online convex optimization experiments")]
struct Cli {
    /// Also fail (exit 2) when a check had to be skipped.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write CSV traces plus a report.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-check the regret bounds from a directory written by `run`.
    Verify { trace_dir: PathBuf },
    /// Regret-vs-horizon scaling table.
    Sweep {
        config: PathBuf,
        /// e.g. `2^8..2^14`, `2^8..2^14:2` or `256,1024`.
        #[arg(long)]
        horizons: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Seeds per horizon; the median regret is reported.
        #[arg(long, default_value_t = 1)]
        multi_seed: usize,
        /// Where to write sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn verdict(report: &Report, strict: bool) -> i32 {
    if !report.all_passed() || (strict && !report.warnings.is_empty()) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.stream.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let cfg = load(&config, seed)?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            let run = run_experiment(&cfg)?;
            let report = verify_bounds(&run.data);
            write_run(&dir, &run.data, Some(&run.comparator), &report)?;
            print!("{report}");
            println!("wrote {}", dir.display());
            Ok(verdict(&report, cli.strict))
        }
        Command::Verify { trace_dir } => {
            let data = read_run(&trace_dir)?;
            let report = verify_bounds(&data);
            print!("{report}");
            Ok(verdict(&report, cli.strict))
        }
        Command::Sweep { config, horizons, seed, multi_seed, out } => {
            let cfg = load(&config, seed)?;
            let horizons = parse_horizons(&horizons).map_err(|m| HarnessError::Invalid(format!("--horizons: {m}")))?;
            let result = sweep(&cfg, &horizons, multi_seed)?;
            print!("{result}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
                let path = dir.join("sweep.csv");
                std::fs::write(&path, result.to_csv()).map_err(|e| HarnessError::io(path, e))?;
            }
            Ok(if result.scaling_holds() && result.bounds_hold() { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}
