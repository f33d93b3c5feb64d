use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multidisk_cli::{run, CliError, RunConfig};

/// Multiple scattering by circular disks.
#[derive(Parser)]
#[command(name = "multidisk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// off, error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scattering problem and write far-field, grid and manifest files.
    Solve(RunArgs),
    /// Time-reversal (DORT) analysis: eigenvalues and focus maps.
    Dort(RunArgs),
    /// Check a config and its geometry without solving.
    Validate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let m = run::cmd_solve(&cfg, &a.out)?;
            log::info!("wrote {} to {}", m.outputs.join(", "), a.out.display());
        }
        Command::Dort(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let m = run::cmd_dort(&cfg, &a.out)?;
            if let Some(d) = &m.dort {
                println!("{} significant eigenvalues", d.significant);
            }
        }
        Command::Validate { config } => {
            let cfg = RunConfig::load(config)?;
            println!("{}: {}", cfg.name(), run::cmd_validate(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp_millis()
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
