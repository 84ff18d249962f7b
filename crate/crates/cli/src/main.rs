//! `hnabem`: experiment driver for scattering by a collinear sound-soft screen.

mod commands;
mod config;
mod csv;

use clap::{Parser, Subcommand};
use commands::{CliError, CliResult, RunOptions};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hnabem", version, about = "Hybrid numerical-asymptotic BEM for screen scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Write zero timings so output is byte-identical between runs.
    #[arg(long, global = true)]
    no_timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for every wavenumber and degree.
    Solve {
        /// Also write each assembled system as a binary dump.
        #[arg(long)]
        dump: bool,
    },
    /// Energy-norm errors against the largest degree.
    Converge,
    /// Far-field samples and sup-norm errors.
    Farfield {
        /// Include a piecewise-constant reference solve.
        #[arg(long)]
        reference_bem: bool,
    },
    /// Field on the sampling rectangle.
    Domain,
    /// Condition numbers of the Galerkin matrices.
    Condition,
    /// Compare the fast assembly with brute-force quadrature.
    OracleCompare,
}

fn load_config(path: Option<&PathBuf>) -> CliResult<RunConfig> {
    let cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            RunConfig::parse(&text)
        }
        None => RunConfig::parse(""),
    };
    cfg.map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = load_config(cli.config.as_ref())?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    commands::ensure_dir(&cli.out)?;
    let mut opts = RunOptions {
        out: cli.out.clone(),
        no_timings: cli.no_timings,
        dump: false,
    };
    match cli.command {
        Command::Solve { dump } => {
            opts.dump = dump;
            commands::cmd_solve(&cfg, &opts)
        }
        Command::Converge => commands::cmd_converge(&cfg, &opts),
        Command::Farfield { reference_bem } => commands::cmd_farfield(&cfg, &opts, reference_bem),
        Command::Domain => commands::cmd_domain(&cfg, &opts),
        Command::Condition => commands::cmd_condition(&cfg, &opts),
        Command::OracleCompare => commands::cmd_oracle_compare(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
