//! Command-line front end for the `qswitch` simulator: configuration
//! parsing, the ten protocol commands, and CSV/JSON/SVG output with a
//! checksummed manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use commands::{execute, Command, Context};
pub use config::{parse_config, Format, RunConfig};
pub use error::{CliError, Result};

/// Everything taken from the command line and environment.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub command: Option<String>,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    /// Value of `QSWITCH_OUT`; wins over `--out` and the config.
    pub env_out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub workers: Option<usize>,
    pub verbose: bool,
}

/// Loads the configuration, runs the command on a worker pool of the
/// requested size and writes its outputs. Returns the output directory.
pub fn run(inv: &Invocation) -> Result<PathBuf> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&inv.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", inv.config.display())))?;
    let mut cfg = parse_config(&text)?;

    let name = inv
        .command
        .clone()
        .or_else(|| cfg.run.command.clone())
        .ok_or_else(|| CliError::Config("no command given on the command line or in [run]".into()))?;
    let command = Command::parse(&name).ok_or_else(|| {
        let known: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
        CliError::Config(format!("unknown command '{name}' (expected one of {})", known.join(", ")))
    })?;

    let out = inv.env_out.clone().or_else(|| inv.out.clone()).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    cfg.output.dir = out.display().to_string();
    if let Some(f) = &inv.formats {
        cfg.output.formats = f.clone();
    }
    if inv.workers.is_some() {
        cfg.run.workers = inv.workers;
    }
    cfg.run.command = Some(command.name().to_string());

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.run.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let ctx = Context {
        base_dir: inv.config.parent().map(Path::to_path_buf).unwrap_or_default(),
        verbose: inv.verbose,
    };
    if inv.verbose {
        eprintln!("qswitch: {} with {} worker(s)", command.name(), pool.current_num_threads());
    }
    let report = pool.install(|| execute(command, &cfg, &ctx))?;
    let files = report.render(&command.stem(), &cfg.output.formats)?;
    output::write_outputs(&out, command.name(), &cfg.to_text(), &files, started.elapsed().as_secs_f64())?;
    if inv.verbose {
        eprintln!("qswitch: wrote {} file(s) to {} in {:.2} s", files.len() + 1, out.display(), started.elapsed().as_secs_f64());
    }
    Ok(out)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
