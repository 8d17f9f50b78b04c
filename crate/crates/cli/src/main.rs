//! Verification and solving workflows for graded spin chains, driven by JSON
//! configurations. Exit codes: 0 all checks pass, 1 a check failed, 2 bad
//! configuration or usage, 3 internal error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Yang-Baxter and inversion identities of the fundamental R-matrix.
    CheckYbe,
    /// Fusion products, reduced R-matrices, fused Yang-Baxter identities.
    CheckFusion,
    /// Transfer-matrix commutativity and generating-series identities.
    CheckTransfer,
    /// Multi-start Newton on the Bethe equations.
    SolveBae,
    /// Solve, then verify eigenvectors, eigenvalues and singular vectors.
    VerifyXxx,
    /// Gaudin hierarchy extraction, eigenvectors and singular vectors.
    VerifyGaudin,
    /// Mirror duality of transfer matrices and Bethe vectors.
    CheckDuality,
    /// Degeneration slopes from the spectral chain to the Gaudin model.
    LimitSweep,
}

#[derive(Parser, Debug)]
#[command(name = "superchain", version, about = "gl(m|n) spin-chain verification workbench")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Override the configured tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the configured sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("SUPERCHAIN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let mut config = match config::load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(tol) = cli.tol {
        if tol <= 0.0 {
            eprintln!("config error: /tol must be positive");
            return ExitCode::from(2);
        }
        config.tol = tol;
    }
    if let Some(samples) = cli.samples {
        if samples == 0 {
            eprintln!("config error: /samples must be positive");
            return ExitCode::from(2);
        }
        config.samples = samples;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let start = Instant::now();
    let result = match cli.command {
        Command::CheckYbe => commands::check_ybe(&config),
        Command::CheckFusion => commands::check_fusion(&config),
        Command::CheckTransfer => commands::check_transfer(&config),
        Command::SolveBae => commands::solve_bae_cmd(&config),
        Command::VerifyXxx => commands::verify_xxx(&config),
        Command::VerifyGaudin => commands::verify_gaudin(&config),
        Command::CheckDuality => commands::check_duality(&config),
        Command::LimitSweep => commands::limit_sweep(&config),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(commands::CommandError::Config(msg)) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
        Err(commands::CommandError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            return ExitCode::from(3);
        }
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let rendered = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if let Some(path) = cli.out {
        if let Err(e) = std::fs::write(&path, rendered) {
            eprintln!("internal error: cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    } else {
        println!("{rendered}");
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
