use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use weightlab::cli::{execute, CliError, Command};

/// Verification lab for Muckenhoupt weights on spaces of homogeneous type.
#[derive(Parser)]
#[command(name = "weightlab", version, about)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Directory for reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Replaces every seed in the manifest.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate A_p, A_∞ and derived exponents per weight and p.
    Constants { config: PathBuf },
    /// Run the selected checks; exit 1 if any fails.
    Verify {
        config: PathBuf,
        /// Also probe the largest surviving ε per instance.
        #[arg(long)]
        probe_epsilon: bool,
    },
    /// Probe ε across a one-parameter weight family.
    Sweep { config: PathBuf },
}

fn run(args: Args) -> anyhow::Result<u8> {
    let (command, config) = match args.command {
        Cmd::Constants { config } => (Command::Constants, config),
        Cmd::Verify { config, probe_epsilon } => (Command::Verify { probe_epsilon }, config),
        Cmd::Sweep { config } => (Command::Sweep, config),
    };
    let outcome = execute(command, &config, &args.out, args.jobs, args.seed)
        .with_context(|| format!("running {}", config.display()))?;
    print!("{}", outcome.summary);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(2, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
