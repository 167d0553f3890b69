use std::path::PathBuf;
use std::process::ExitCode;

use acflow::{
    kernel_selftest, run_experiment, selftest, sweep, Check, ExperimentConfig, HarnessError,
};
use clap::{Parser, Subcommand};

/// Allen–Cahn flow on a disk with Neumann boundary: runs, sweeps and checks.
#[derive(Parser)]
#[command(name = "acflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its diagnostics, snapshots and report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat an experiment over a strictly decreasing list of eps values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Times at which the discrepancy integral is compared across runs.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        times: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the heat-kernel identities at seeded random points.
    KernelCheck {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Standing wave, surface tension, grid and potential invariants.
    Selftest,
}

fn print_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{}", c.line());
    }
    checks.iter().all(|c| c.pass)
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(cmd: Command) -> Result<ExitCode, HarnessError> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = run_experiment(&cfg, Some(&out))?;
            for w in &outcome.warnings {
                eprintln!("warning: {w:?}");
            }
            Ok(status(print_checks(&outcome.checks)))
        }
        Command::Sweep {
            config,
            eps,
            times,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = sweep(&cfg, &eps, &times, Some(&out))?;
            for run in &outcome.runs {
                println!("# eps = {}", run.config.eps);
                print_checks(&run.checks);
            }
            println!("# sweep");
            print_checks(&outcome.checks);
            Ok(status(outcome.passed()))
        }
        Command::KernelCheck { n, samples, seed } => {
            let report = kernel_selftest(n, samples, seed)?;
            let pass = print_checks(&report.checks);
            if !pass {
                eprintln!("worst standard sample: {:?}", report.standard);
                if let Some(w) = &report.reflected {
                    eprintln!("worst reflected sample: {w:?}");
                }
            }
            Ok(status(pass))
        }
        Command::Selftest => Ok(status(print_checks(&selftest()?))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
