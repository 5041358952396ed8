//! `ordermech`: run, verify, and probe the task-delegation mechanisms from
//! scenario config files.
//!
//! Exit codes follow the verifier: 0 every check passed (or none requested),
//! 1 a check failed, 2 a check ran out of enumeration budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ordermech::harness::{
    self, load_scenario, run_experiment, run_oracle, run_sweep, run_verification, ExitStatus,
    Scenario,
};

#[derive(Parser)]
#[command(name = "ordermech", version, about = "Mechanism engine for task delegation under private ordering preferences", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's mechanism over its instances; write CSV rows and a
    /// JSON summary.
    Run {
        config: PathBuf,
        /// Directory for output files (default: alongside the config).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the scenario's configured property checks and emit the
    /// verification reports as JSON.
    Verify {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the exhaustive welfare optimum for the scenario's instances.
    Oracle { config: PathBuf },
    /// Re-run the scenario once per integer value of a named parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Inclusive integer range, e.g. `0..8`.
        #[arg(long)]
        range: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Built-in walkthroughs; currently `example1`.
    Demo { name: String },
}

fn out_paths(config: &Path, out_dir: &Option<PathBuf>, suffix: &str) -> (PathBuf, PathBuf) {
    let stem = config.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "scenario".into());
    let dir = out_dir
        .clone()
        .unwrap_or_else(|| config.parent().map(Path::to_path_buf).unwrap_or_default());
    (dir.join(format!("{stem}{suffix}.csv")), dir.join(format!("{stem}{suffix}.json")))
}

fn parse_range(range: &str) -> Result<(i64, i64)> {
    let (lo, hi) = range
        .split_once("..")
        .with_context(|| format!("range {range:?} is not of the form a..b"))?;
    let lo: i64 = lo.trim().parse().with_context(|| format!("bad range start {lo:?}"))?;
    let hi: i64 = hi.trim().parse().with_context(|| format!("bad range end {hi:?}"))?;
    Ok((lo, hi))
}

fn load(config: &Path) -> Result<Scenario> {
    load_scenario(config).with_context(|| format!("loading {}", config.display()))
}

fn run(cli: Cli) -> Result<ExitStatus> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let scenario = load(&config)?;
            let out = run_experiment(&scenario)?;
            let (csv_path, json_path) = out_paths(&config, &out_dir, "");
            if let Some(dir) = csv_path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&csv_path, &out.csv)?;
            let mut summary = serde_json::to_value(&out.summary)?;
            if !out.verification.is_empty() {
                let reports: Vec<_> = out
                    .verification
                    .iter()
                    .map(|(_, r)| serde_json::to_value(r))
                    .collect::<serde_json::Result<_>>()?;
                summary["verification"] = serde_json::Value::Array(reports);
            }
            fs::write(&json_path, format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
            println!("wrote {} and {}", csv_path.display(), json_path.display());
            Ok(out.exit)
        }
        Command::Verify { config, out_dir } => {
            let scenario = load(&config)?;
            let reports = run_verification(&scenario)?;
            if reports.is_empty() {
                anyhow::bail!("the scenario has no `verify` section");
            }
            let mut exit = ExitStatus::Pass;
            for (_, r) in &reports {
                exit = match r.status {
                    ordermech::verifier::CheckStatus::Fail => ExitStatus::Fail,
                    ordermech::verifier::CheckStatus::NonExhaustive
                        if exit != ExitStatus::Fail =>
                    {
                        ExitStatus::NonExhaustive
                    }
                    _ => exit,
                };
            }
            let value: Vec<_> = reports
                .iter()
                .map(|(_, r)| serde_json::to_value(r))
                .collect::<serde_json::Result<_>>()?;
            let text = format!("{}\n", serde_json::to_string_pretty(&value)?);
            let (_, json_path) = out_paths(&config, &out_dir, "-verify");
            if let Some(dir) = json_path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&json_path, &text)?;
            print!("{text}");
            Ok(exit)
        }
        Command::Oracle { config } => {
            let scenario = load(&config)?;
            let value = run_oracle(&scenario)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(ExitStatus::Pass)
        }
        Command::Sweep { config, param, range, out_dir } => {
            let scenario = load(&config)?;
            let (lo, hi) = parse_range(&range)?;
            let out = run_sweep(&scenario, &param, lo, hi)?;
            let (csv_path, json_path) =
                out_paths(&config, &out_dir, &format!("-sweep-{}", param.replace('.', "_")));
            if let Some(dir) = csv_path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&csv_path, &out.csv)?;
            fs::write(
                &json_path,
                format!("{}\n", serde_json::to_string_pretty(&out.summaries)?),
            )?;
            println!("wrote {} and {}", csv_path.display(), json_path.display());
            Ok(out.exit)
        }
        Command::Demo { name } => match name.as_str() {
            "example1" => {
                println!("{}", serde_json::to_string_pretty(&harness::demo_example1())?);
                Ok(ExitStatus::Pass)
            }
            other => anyhow::bail!("unknown demo {other:?}; available: example1"),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
