//! Batch front-end: a single JSON config selects the pipeline (`sum`,
//! `count`, `fit`, `densities`, `detect`, `search`) and its inputs; results
//! are written atomically as CSV + JSON. Progress goes to standard error,
//! the JSON summary to standard output. Exit codes: 0 success, 1 capacity
//! failure, 2 config error.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frobcount_core::Error;

#[derive(Parser)]
#[command(name = "frobcount", version, about = "Counts, fits, density grids, detectors, and searches over explicit families", long_about = None)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for the CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Worker threads for slab-parallel pipelines (integer outputs are
    /// bit-identical for every value).
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Seed recorded in reports for empirical sampling windows.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => 1,
        Error::Domain(_) | Error::Config(_) | Error::Serde(_) => 2,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        let err = serde_json::json!({"error": "--threads must be >= 1", "exit_code": 2});
        eprintln!("{err}");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let err = serde_json::json!({
                "error": format!("cannot read config {}: {e}", cli.config.display()),
                "exit_code": 2,
            });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    let cfg: config::RunConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            let err = serde_json::json!({
                "error": format!("malformed config: {e}"),
                "exit_code": 2,
            });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    let ctx = run::RunContext {
        threads: cli.threads,
        seed: cli.seed,
    };
    match run::run(&cfg, &cli.out, &ctx) {
        Ok((paths, summary)) => {
            eprintln!("wrote {} and {}", paths.csv.display(), paths.json.display());
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code_for(&e);
            let err = serde_json::json!({"error": e.to_string(), "exit_code": code});
            eprintln!("{err}");
            ExitCode::from(code)
        }
    }
}
