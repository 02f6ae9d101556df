use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use vmimo_core::config::game_config_to_toml;
use vmimo_core::experiments::{kind_name, run, write_outputs};
use vmimo_core::oracle::run_oracle;
use vmimo_core::{default_game_config, ConfigError, Experiment, ExperimentError, ModelError};

/// Power-control game experiments for cooperative wireless links.
#[derive(Debug, Parser)]
#[command(name = "vmimo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its CSV and resolved-config sidecar.
    Run {
        spec: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override a value in the experiment file, e.g. `game.cost_k=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Seed for simulated frame columns.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate sweep points on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Check an experiment file without running it.
    Validate {
        spec: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Cross-check an experiment against independent evaluations.
    Oracle {
        spec: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the built-in default game configuration.
    Defaults,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_ORACLE: u8 = 3;

#[derive(Debug)]
struct OracleMismatch(usize);

impl std::fmt::Display for OracleMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} oracle check(s) failed", self.0)
    }
}

impl std::error::Error for OracleMismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<OracleMismatch>() {
            return EXIT_ORACLE;
        }
        if cause.is::<ModelError>() {
            return EXIT_DOMAIN;
        }
        if let Some(ExperimentError::Model(_)) = cause.downcast_ref::<ExperimentError>() {
            return EXIT_DOMAIN;
        }
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
    }
    EXIT_CONFIG
}

fn load(spec: &Path, overrides: &[String]) -> anyhow::Result<Experiment> {
    Experiment::load(spec, overrides).with_context(|| format!("loading {}", spec.display()))
}

/// Writes `text` to stdout; a reader closing the pipe early is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let mut out = String::new();
    match cli.command {
        Command::Run {
            spec,
            out: dir,
            overrides,
            seed,
            sequential,
        } => {
            let mut exp = load(&spec, &overrides)?;
            if let Some(seed) = seed {
                exp.options.seed = seed;
            }
            if sequential {
                exp.options.parallel = false;
            }
            let table = run(&exp)?;
            let files = write_outputs(&table, &exp, &dir)?;
            writeln!(out, "wrote {}", files.csv.display())?;
            writeln!(out, "wrote {}", files.resolved.display())?;
            for (k, v) in &table.metadata.summary {
                writeln!(out, "  {k}: {v}")?;
            }
        }
        Command::Validate { spec, overrides } => {
            let exp = load(&spec, &overrides)?;
            let labels: Vec<&str> = exp.configs.iter().map(|(l, _)| l.as_str()).collect();
            for (_, cfg) in &exp.configs {
                cfg.validate()?;
            }
            writeln!(
                out,
                "ok: {} ({}), configs: {}",
                exp.name,
                kind_name(exp.kind),
                labels.join(", ")
            )?;
        }
        Command::Oracle {
            spec,
            overrides,
            seed,
        } => {
            let exp = load(&spec, &overrides)?;
            let checks = run_oracle(&exp, seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{mark} {}: {}", c.name, c.detail)?;
            }
            writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
            if failed > 0 {
                emit(&out)?;
                return Err(OracleMismatch(failed).into());
            }
        }
        Command::Defaults => out = game_config_to_toml(&default_game_config()),
    }
    emit(&out)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
