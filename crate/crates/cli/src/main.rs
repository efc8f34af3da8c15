mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig, Task, Tolerances};
use error::Failure;

/// Robin eigenvalues of the rectangle [0,1] x [0,L]: spectra, gaps,
/// multiplicities and pair correlation.
#[derive(Parser, Debug)]
#[command(name = "robin-rect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    tolerances: Tolerances,
    /// Format of tabular outputs
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Directory receiving output files and meta.json (default: current directory;
    /// with `run`, overrides the replayed one)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores, or the replayed value with `run`);
    /// outputs do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Task(Task),
    /// Replay a run from a config file (a RunConfig, or a meta.json holding one)
    Run {
        /// Path to the JSON config
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    RunConfig::from_json(&text).or_else(|first| {
        let meta: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("bad config: {e}")))?;
        match meta.get("config") {
            Some(cfg) => RunConfig::from_json(&cfg.to_string()),
            None => Err(first),
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match cli.command {
        Command::Run { config } => {
            let mut config = load_config(&config)?;
            if let Some(dir) = cli.out_dir {
                config.out_dir = dir;
            }
            if cli.threads.is_some() {
                config.threads = cli.threads;
            }
            config
        }
        Command::Task(task) => RunConfig {
            task,
            tolerances: cli.tolerances,
            format: cli.format,
            out_dir: cli.out_dir.unwrap_or_else(|| PathBuf::from(".")),
            threads: cli.threads,
        },
    };
    match config.threads {
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::usage(format!("thread pool: {e}")))?
            .install(|| commands::execute(&config)),
        None => commands::execute(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
