//! Experiment driver behind the `aoi-coexist` binary.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;

use aoi_coexist::Mode;

use config::ExperimentConfig;
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Msne,
    Stage,
    Simulate(Mode),
    Region,
    Gain { self_test: bool },
    Freq,
}

pub fn execute(cmd: Command, cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Msne => commands::cmd_msne(cfg, out),
        Command::Stage => commands::cmd_stage(cfg, out),
        Command::Simulate(mode) => commands::cmd_simulate(cfg, mode, out),
        Command::Region => commands::cmd_region(cfg, out),
        Command::Gain { self_test } => commands::cmd_gain(cfg, self_test, out),
        Command::Freq => commands::cmd_freq(cfg, out),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `cmd` and returns the CSV text.
pub fn render(cmd: Command, cfg: &ExperimentConfig, threads: Option<usize>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    with_threads(threads, || execute(cmd, cfg, &mut buf))??;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
