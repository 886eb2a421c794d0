use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use landau_cli::config::RunConfig;
use landau_cli::{cmd_export, cmd_simulate, cmd_verify, exit_code, EXIT_OK};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "landau", version, about = "Coulomb Landau equation near a Maxwellian: simulate, verify, export")]
struct Cli {
    /// TOML configuration (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured evolution and write CSV, JSON and checkpoints.
    Simulate,
    /// Run verification suites; `--suite list` prints their names.
    Verify {
        #[arg(long)]
        suite: Option<String>,
    },
    /// Convert a checkpoint to CSV (full, v-slice or x-slice).
    Export {
        checkpoint: PathBuf,
        #[arg(long, default_value = "full")]
        format: String,
    },
}

fn run(cli: Cli) -> Result<i32> {
    if let Ok(n) = std::env::var("LANDAU_THREADS") {
        let n: usize = n.parse().context("LANDAU_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg, &out),
        Command::Verify { suite } => cmd_verify(&cfg, suite.as_deref(), &out),
        Command::Export { checkpoint, format } => {
            let path = cmd_export(&checkpoint, &format, &out)?;
            println!("{}", path.display());
            Ok(EXIT_OK)
        }
    }
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
