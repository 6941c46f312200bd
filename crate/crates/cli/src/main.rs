//! `romkit`: offline ROM analysis, batch processing, reliability reports and the live
//! session server.
//!
//! Exit codes: 0 success, 1 fatal input or configuration error, 2 when a batch finished
//! with failed entries.

mod analyze;
mod batch;
mod input;
mod reliability;
mod serve;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "romkit",
    version,
    about = "Joint range-of-motion analysis and reliability statistics"
)]
struct Cli {
    #[command(flatten)]
    global: settings::GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure the range of motion of one recorded repetition.
    Analyze(analyze::AnalyzeArgs),
    /// Measure every entry of a cohort manifest in parallel.
    Batch(batch::BatchArgs),
    /// ICC, SE_M and MDC per movement from results or a measurement table.
    Reliability(reliability::ReliabilityArgs),
    /// Run the live session HTTP service.
    Serve(serve::ServeArgs),
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.global.verbose);
    let outcome = match cli.command {
        Command::Analyze(args) => analyze::run(args, &cli.global),
        Command::Batch(args) => batch::run(args, &cli.global),
        Command::Reliability(args) => reliability::run(args, &cli.global),
        Command::Serve(args) => serve::run(args, &cli.global),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
