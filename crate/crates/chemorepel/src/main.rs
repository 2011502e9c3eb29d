//! Command-line front end.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
//! config error, 3 numerical failure (solver abort). Inconclusive checks
//! without an abort exit 0: absence of evidence is not a failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chemorepel::acceptance;
use chemorepel::scenario::{parse_config, run_scenario, ScenarioConfig, ScenarioKind, Verdict};
use chemorepel::Error;

#[derive(Parser)]
#[command(name = "chemorepel", version, about = "Chemorepulsion lab: PDE runs, ODE checks, sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the output directory (config value, or "acceptance-out" for
    /// check)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Replace the seed of a random-smooth initial family
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Suppress the summary on standard output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a config file (sweeps go through `sweep`)
    Run { config: PathBuf },
    /// Run the built-in acceptance suite
    Check,
    /// Run a parameter sweep from a config file
    Sweep { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config } => scenario_command(&cli, config, false),
        Command::Sweep { config } => scenario_command(&cli, config, true),
        Command::Check => check_command(&cli),
    };
    match code {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for_error(&err))
        }
    }
}

fn exit_for_error(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn load_config(cli: &Cli, path: &Path) -> Result<ScenarioConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    Ok(cfg)
}

fn scenario_command(cli: &Cli, path: &Path, want_sweep: bool) -> Result<ExitCode, Error> {
    let cfg = load_config(cli, path)?;
    let is_sweep = cfg.kind == ScenarioKind::Sweep;
    if is_sweep != want_sweep {
        return Err(Error::validation(if want_sweep {
            format!("`sweep` needs a sweep config, got scenario = {}", cfg.kind.name())
        } else {
            "`run` does not take sweep configs; use `chemorepel sweep`".to_string()
        }));
    }
    let report = run_scenario(&cfg)?;
    if !cli.quiet {
        print!("{}", report.render());
    }
    Ok(ExitCode::from(report.exit_code()))
}

/// Run the eight acceptance criteria, print one verdict line each, and
/// record every graded check in <out>/report.txt.
fn check_command(cli: &Cli) -> Result<ExitCode, Error> {
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("acceptance-out"));
    fs::create_dir_all(&out_dir)?;
    let outcomes = acceptance::run_all(&out_dir.join("sweep"));

    let mut report = String::from("suite: acceptance\n");
    let mut worst = 0u8;
    for (number, title, outcome) in &outcomes {
        match outcome {
            Ok(outcome) => {
                if !cli.quiet {
                    println!("{}", outcome.summary());
                }
                let verdict = if outcome.passed() { "pass" } else { "fail" };
                report.push_str(&format!("criterion_{number}: {verdict}\n"));
                for check in &outcome.checks {
                    report.push_str(&format!(
                        "c{number}_{}: {} value={:.6e} tol={:e}\n",
                        check.name,
                        check.verdict.as_str(),
                        check.value,
                        check.tol
                    ));
                    if check.verdict == Verdict::Fail {
                        worst = worst.max(1);
                    }
                }
            }
            Err(err) => {
                if !cli.quiet {
                    println!("criterion {number} ({title}): error: {err}");
                }
                report.push_str(&format!("criterion_{number}: error {err}\n"));
                worst = worst.max(exit_for_error(err));
            }
        }
    }
    let report_path = out_dir.join("report.txt");
    fs::write(&report_path, report)?;
    if !cli.quiet {
        println!("report: {}", report_path.display());
    }
    Ok(ExitCode::from(worst))
}
