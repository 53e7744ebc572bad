use std::path::PathBuf;
use std::process::ExitCode;

use cfsupp_lab::output::{manifest_path, write_csv, write_csv_file, Manifest};
use cfsupp_lab::run::workers_from_env;
use cfsupp_lab::{run_sweep, LabError, Options, Protocol, SweepSpec};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cfsupp", version, about = "Bosonic noise suppression sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Heralded CF suppression.
    Suppress(Common),
    /// Bare bosonic channel.
    Unsuppressed(Common),
    /// Two-party transmission with a noisy Bell pair.
    Communicate(Common),
    /// Qubit teleportation baseline.
    Teleport(Common),
    /// Optimized gate sequences calibrated at p = 0.
    Optimize(Common),
}

fn execute(cli: Cli) -> Result<usize, LabError> {
    let (protocol, common) = match cli.command {
        Command::Suppress(c) => (Protocol::Suppress, c),
        Command::Unsuppressed(c) => (Protocol::Unsuppressed, c),
        Command::Communicate(c) => (Protocol::Communicate, c),
        Command::Teleport(c) => (Protocol::Teleport, c),
        Command::Optimize(c) => (Protocol::Optimize, c),
    };
    let file = match &common.config {
        Some(path) => Options::from_file(path)?,
        None => Options::default(),
    };
    let options = common.options.or(file);
    let spec = SweepSpec::new(protocol, &options)?;
    let out = run_sweep(&spec, workers_from_env()?)?;
    match &options.out {
        Some(path) => write_csv_file(&out.records, path)?,
        None => write_csv(&out.records, std::io::stdout().lock())?,
    }
    let manifest = options
        .manifest
        .clone()
        .or_else(|| options.out.as_deref().map(manifest_path));
    if let Some(path) = manifest {
        Manifest::new(&spec, &out).write(&path)?;
    }
    Ok(out.failures)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            log::error!("{n} grid point(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("cfsupp: {e}");
            ExitCode::FAILURE
        }
    }
}
