mod commands;
mod config;
mod report;
mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Config, ConfigError};

#[derive(Parser)]
#[command(name = "lambda1", version, about = "First Laplace eigenvalue experiments on intrinsic surface meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Overrides `seed` in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for grid experiments (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest eigenpairs and lambda1-bar of a mesh
    Spectrum(RunArgs),
    /// Glue a cross-cap or handle into a capped sphere
    Glue(RunArgs),
    /// Per-mode harmonic extension certificate
    VerifyExtend(RunArgs),
    /// Conformal maximization of lambda1-bar
    Maximize(RunArgs),
    /// Gap between glued maxima and the base over an (eps, L) grid
    Gap(RunArgs),
    /// Eigenmap scaling along an eps family
    Scaling(RunArgs),
    /// Table of the reports in a directory
    Summary { dir: PathBuf },
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] lambda1_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("check failed: {0}")]
    Check(String),
}

impl Failure {
    /// 1 for bad input, 2 for numerical failure.
    fn exit_code(&self) -> u8 {
        use lambda1_core::Error as E;
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Core(E::InvalidMesh(_) | E::Parse { .. } | E::Io(_) | E::InvalidInput(_) | E::CountTooSmall { .. }) => 1,
            Failure::Core(_) | Failure::Check(_) => 2,
        }
    }
}

fn run(name: &str, args: &RunArgs, f: fn(&Config, u64, &Path) -> Result<(), Failure>) -> Result<(), Failure> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let cfg = Config::parse(&text, &commands::allowed_keys(name))?;
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.get("seed", commands::DEFAULT_SEED)?,
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(ConfigError::Invalid { key: "--threads".into(), message: "must be at least 1".into() }.into());
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    f(&cfg, seed, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => run("spectrum", a, commands::spectrum),
        Command::Glue(a) => run("glue", a, commands::glue_cmd),
        Command::VerifyExtend(a) => run("verify-extend", a, commands::verify_extend),
        Command::Maximize(a) => run("maximize", a, commands::maximize),
        Command::Gap(a) => run("gap", a, commands::gap),
        Command::Scaling(a) => run("scaling", a, commands::scaling),
        Command::Summary { dir } => match summary::collect(dir) {
            Ok(rows) => {
                print!("{}", summary::render(&rows));
                return ExitCode::from(if rows.iter().all(|r| r.pass) { 0 } else { 2 });
            }
            Err(e) => Err(Failure::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display())))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
