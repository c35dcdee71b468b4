use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use aoi_coexist_cli::config::{ExperimentConfig, ModeName, FULL_SCALE_RUNS, FULL_SCALE_STAGES};
use aoi_coexist_cli::error::CliError;
use aoi_coexist_cli::{execute, with_threads, Command};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aoi-coexist", version, about = "AON/TON coexistence experiments")]
struct Cli {
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    stages: Option<usize>,
    /// Worker threads; defaults to all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// 100000 runs of 1000 stages unless --runs/--stages say otherwise
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Write CSV here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the effective configuration as TOML to this path
    #[arg(long, global = true)]
    echo_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Competition,
    Cooperation,
}

#[derive(Subcommand)]
enum Sub {
    /// Stage-game equilibrium and threshold ages
    Msne,
    /// Expected stage payoffs, competitive and cooperative
    Stage,
    /// Monte Carlo discounted payoffs
    Simulate {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Grim-trigger deviation inequalities over (alpha, P_R)
    Region,
    /// Gain of cooperation over competition
    Gain {
        /// Compare cooperation with itself; every gain must be zero
        #[arg(long)]
        self_test: bool,
    },
    /// Frequencies of tau_A* = 1 and 0 under competition
    Freq,
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.paper_scale {
        cfg.run.n_runs = FULL_SCALE_RUNS;
        cfg.run.n_stages = FULL_SCALE_STAGES;
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = cli.runs {
        cfg.run.n_runs = r;
    }
    if let Some(s) = cli.stages {
        cfg.run.n_stages = s;
    }
    if let Sub::Simulate { mode: Some(m) } = cli.command {
        cfg.run.mode = match m {
            ModeArg::Competition => ModeName::Competition,
            ModeArg::Cooperation => ModeName::Cooperation,
        };
    }
    Ok(cfg)
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    let cfg = effective_config(&cli)?;
    if let Some(path) = &cli.echo_config {
        std::fs::write(path, cfg.to_toml())?;
    }
    let cmd = match cli.command {
        Sub::Msne => Command::Msne,
        Sub::Stage => Command::Stage,
        Sub::Simulate { .. } => Command::Simulate(cfg.run.mode.into()),
        Sub::Region => Command::Region,
        Sub::Gain { self_test } => Command::Gain { self_test },
        Sub::Freq => Command::Freq,
    };
    let mut out: Box<dyn Write + Send> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    with_threads(cli.threads, || execute(cmd, &cfg, &mut out))??;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aoi-coexist: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
