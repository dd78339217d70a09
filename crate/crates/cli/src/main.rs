use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fcs_cli::{load_config, oracle_check, run, scan, CliError};

#[derive(Parser)]
#[command(name = "fcs", version, about = "Full counting statistics of free-fermion charge transport")]
struct Cli {
    /// Scenario configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for λ-grid and scan-point evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: generating function, distribution, cumulants, norms and every configured scan.
    Run,
    /// Compare the engine with the Fock-space oracle (at most 14 modes).
    OracleCheck {
        /// Also run randomized determinant-identity self-tests with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// One configured scan as a CSV table.
    Scan {
        /// Scan name from `analysis.scans`.
        name: String,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), detail: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config { path: "--threads".into(), detail: e.to_string() })?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config { path: "--config".into(), detail: "a configuration file is required".into() })?;
    let config = load_config(path)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run => emit(out, &json(&run(&config)?)),
        Command::OracleCheck { seed } => {
            let report = oracle_check(&config, *seed)?;
            emit(out, &json(&report))?;
            report.into_result().map(|_| ())
        }
        Command::Scan { name } => emit(out, &scan(&config, name)?.to_csv()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fcs: [{}] {e}", e.label());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
