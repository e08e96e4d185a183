use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tubecert::checks::{self, RunOptions};
use tubecert::registry;

#[derive(Parser)]
#[command(name = "tubecert", version, about = "Batch verification of tube-domain certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a config file (`default` runs the shipped suite).
    Verify {
        config: String,
        #[arg(long)]
        fail_fast: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        seed_override: Option<u64>,
        /// Leave `wall_time_ms` out of the JSON report.
        #[arg(long)]
        no_timing: bool,
    },
    /// Print the defining data of a registry object.
    Describe { id: String },
    /// List example registry identifiers.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            fail_fast,
            jobs,
            format,
            seed_override,
            no_timing,
        } => {
            let specs = if config == "default" {
                checks::parse_config(checks::DEFAULT_SUITE)
            } else {
                checks::load_config(&PathBuf::from(&config))
            };
            let specs = match specs {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions { jobs, fail_fast, seed_override };
            let report = checks::run_checks(&specs, &opts);
            match format {
                Format::Json => print!("{}", report.to_ndjson(!no_timing)),
                Format::Md => print!("{}", report.to_markdown()),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Describe { id } => match registry::describe(&id) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
        Command::List => {
            for id in registry::list() {
                println!("{id}");
            }
            ExitCode::SUCCESS
        }
    }
}
