use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subdiff_cli::config::{parse_config, Mode};
use subdiff_cli::selftest::run_selftest;
use subdiff_cli::{output_dir, run, CliError};
use subdiff_core::{ml_eval, MLParams64};

#[derive(Parser)]
#[command(name = "subdiff", version, about = "Forward and inverse source problems for time-fractional subdiffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem and write the trajectory and its time integral.
    Forward { config: PathBuf },
    /// Recover the source from the time-integral data.
    Inverse { config: PathBuf },
    /// Manufacture data from a known source, invert, and report the recovery error.
    Roundtrip { config: PathBuf },
    /// Evaluate the two-parameter Mittag-Leffler function E_{rho,mu}(z).
    MlEval {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Run the built-in identity and solver checks.
    Selftest {
        #[arg(long)]
        quick: bool,
        /// Also write the summary to selftest.txt in this directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn run_config(path: &Path, mode: Mode) -> Result<(), CliError> {
    let config = parse_config(path, mode)?;
    let dir = output_dir(config.output_dir.as_deref());
    let outcome = run(&config, mode, &dir)?;
    for (key, value) in &outcome.summary {
        println!("{key} = {value}");
    }
    println!("output_dir = {}", outcome.out_dir.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Forward { config } => run_config(&config, Mode::Forward),
        Command::Inverse { config } => run_config(&config, Mode::Inverse),
        Command::Roundtrip { config } => run_config(&config, Mode::Roundtrip),
        Command::MlEval { rho, mu, z } => {
            let params = MLParams64::new(rho, mu).map_err(|e| CliError::Config(e.to_string()))?;
            println!("{}", ml_eval(params, z)?);
            Ok(())
        }
        Command::Selftest { quick, output_dir } => {
            let checks = run_selftest(quick);
            let text: String = checks.iter().map(|c| format!("{c}\n")).collect();
            print!("{text}");
            let dir = output_dir.or_else(|| std::env::var_os(subdiff_cli::OUTPUT_DIR_ENV).map(PathBuf::from));
            if let Some(dir) = dir {
                std::fs::create_dir_all(&dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
                let path = dir.join("selftest.txt");
                std::fs::write(&path, &text).map_err(|e| CliError::Io { path, source: e })?;
            }
            let failures = checks.iter().filter(|c| !c.passed).count();
            if failures > 0 {
                return Err(CliError::Selftest(failures));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
