use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cohsyn_cli::{run, Mode, RunArgs};

/// Guaranteed-cost coherent controller synthesis.
#[derive(Debug, Parser)]
#[command(name = "cohsyn", version)]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV output; metadata goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides solver.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let args = RunArgs {
        mode: cli.mode,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        jobs: cli.jobs,
    };
    match run(&args) {
        Ok(o) => ExitCode::from(o.exit_code()),
        Err(e) => {
            eprintln!("cohsyn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
