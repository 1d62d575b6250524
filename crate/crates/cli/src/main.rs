use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plap::commands::{exit, exit_code};
use plap::{Command, RawConfig};

#[derive(Parser)]
#[command(
    name = "plap",
    version,
    about = "Nonlocal p-Laplacian evolution: solvers, rate studies and graph sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (`key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `run.threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "plap-out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Evolve one problem and write the trajectory.
    Solve,
    /// Error against a fine mesh for a list of mesh sizes.
    StudySpace,
    /// Error against a fine step for a list of step refinements.
    StudyTime,
    /// Error of sampled graphs against the truncated kernel.
    StudyGraph,
    /// Sample one graph and write its edge list and statistics.
    SampleGraph,
    /// Randomized checks of the operator and scheme properties.
    VerifyProperties,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::StudySpace => Command::StudySpace,
        Cmd::StudyTime => Command::StudyTime,
        Cmd::StudyGraph => Command::StudyGraph,
        Cmd::SampleGraph => Command::SampleGraph,
        Cmd::VerifyProperties => Command::VerifyProperties,
    };
    let raw = match &cli.config {
        Some(path) => RawConfig::load(path),
        None => Ok(RawConfig::default()),
    };
    let cfg = raw.and_then(|mut raw| {
        if let Some(seed) = cli.seed {
            raw.set("run.seed", seed.to_string());
        }
        if let Some(threads) = cli.threads {
            raw.set("run.threads", threads.to_string());
        }
        raw.resolve()
    });
    let cfg = match cfg {
        Ok(cfg) => cfg,
        Err(e) => {
            match &cli.config {
                Some(path) => eprintln!("plap: {}: {e}", path.display()),
                None => eprintln!("plap: {e}"),
            }
            return ExitCode::from(exit::CONFIG as u8);
        }
    };
    let result = plap::run(command, &cfg, &cli.out);
    if let Err(e) = &result {
        eprintln!("plap: {e:#}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
