use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ofdmcr::config::{parse_config, Experiment};
use ofdmcr::error::CliError;
use ofdmcr::experiments::run_and_write;
use ofdmcr::output::Table;
use ofdmcr::plot::render_svg;
use ofdmcr::selftest::run_selftest;

/// Capacity analysis and simulation of random subcarrier allocation in
/// OFDM cognitive radio.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named experiments.
    ListExperiments,
    /// Run the quick invariant suite.
    Selftest,
    /// Render a CSV written by `run` as SVG.
    Plot {
        csv: PathBuf,
        /// Output file, defaults to the CSV path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Run { config, seed, out } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
            let mut spec = parse_config(&text)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if out.is_some() {
                spec.out = out;
            }
            run_and_write(&spec, std::io::stdout().lock(), &mut std::io::stderr())?;
        }
        Cmd::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<8} {}", e.name(), e.describe());
            }
        }
        Cmd::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(CliError::Tolerance("selftest".into()));
            }
        }
        Cmd::Plot { csv, out } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
            let t = Table::read(&text)?;
            let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let path = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&path, render_svg(&t, &title))
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
