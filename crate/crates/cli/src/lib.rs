//! Command-line front end: scenario parsing, dispatch and artifact output.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use commands::{Command, Failure};

#[derive(Debug, Parser)]
#[command(name = "cosmowave", version, about = "Klein-Gordon modes on singular FLRW backgrounds")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// worker threads for parallel sweeps (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// recorded in the metadata; no command draws random numbers
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            1
        }
        Err(Failure::Io(e)) => {
            eprintln!("io error: {e}");
            1
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("{}: {e}", e.name());
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let raw = std::fs::read(&cli.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let text = std::str::from_utf8(&raw).map_err(|e| Failure::Config(format!("config is not UTF-8: {e}")))?;
    let cfg = config::parse(text).map_err(Failure::Config)?;
    std::fs::create_dir_all(&cli.out)?;
    let meta = output::Metadata::new(cli.command.name(), &raw, &cfg.solver, cli.seed);
    let job = || commands::run(cli.command, &cfg, &cli.out, &meta);
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
            pool.install(job)
        }
        None => job(),
    }
}
