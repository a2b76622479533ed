//! `paqft`: batch front-end for the paqft-core checks.
//!
//! Every subcommand writes `{subcommand}_{timestamp}.csv` into the output
//! directory and prints a short summary. Exit codes: 0 success, 2 configuration
//! or argument error, 3 failed numerical check, 4 internal error.

mod artifact;
mod commands;

use artifact::Artifact;
use clap::{Parser, Subcommand};
use paqft_core::config::RunConfig;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Internal(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

// Any library error after the configuration validated is an invariant violation.
impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "paqft", version, about = "Perturbative algebraic QFT on a 1+1 lattice: checks and artifacts")]
struct Cli {
    /// Run configuration (TOML); defaults apply to missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Artifact directory, overriding `out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Artifact name suffix; defaults to the Unix time in seconds.
    #[arg(long, global = true, value_name = "TAG", value_parser = parse_tag)]
    timestamp: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// GNS representations of the example states or of `gns.state_file`.
    Gns,
    /// Weyl relations in the Schrödinger representation.
    Weyl,
    /// Retarded, advanced, causal and Hadamard propagators around a source.
    Propagators,
    /// ⋆_H commutator of two smeared fields.
    Commutator,
    /// Wick expansion of two normal-ordered squares.
    Wick,
    /// Self-line cancellation.
    Tadpole,
    /// Formal S-matrix of a quadratic interaction.
    Smatrix,
    /// Bogoliubov map of a smeared field.
    Bogoliubov,
    /// Graphs, symmetry factors and degrees of divergence.
    Graphs,
    /// Epstein-Glaser extension of `eg.expression` to the power `eg.power`.
    Extend,
    /// Analytic regularization and minimal subtraction of `eg.family`.
    Ms,
    /// Wavefront estimate of `microlocal.expression`.
    Wf,
    /// Bicharacteristic flow.
    Flow,
    /// Full acceptance battery.
    Suite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gns => "gns",
            Command::Weyl => "weyl",
            Command::Propagators => "propagators",
            Command::Commutator => "commutator",
            Command::Wick => "wick",
            Command::Tadpole => "tadpole",
            Command::Smatrix => "smatrix",
            Command::Bogoliubov => "bogoliubov",
            Command::Graphs => "graphs",
            Command::Extend => "extend",
            Command::Ms => "ms",
            Command::Wf => "wf",
            Command::Flow => "flow",
            Command::Suite => "suite",
        }
    }
}

fn parse_tag(s: &str) -> Result<String, String> {
    if !s.is_empty() && s.len() <= 64 && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        Ok(s.to_string())
    } else {
        Err("use 1 to 64 characters from [A-Za-z0-9_-]".into())
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<(Artifact, bool), CliError> {
    let art = match cmd {
        Command::Gns => commands::gns(cfg)?,
        Command::Weyl => commands::weyl(cfg)?,
        Command::Propagators => commands::propagators(cfg)?,
        Command::Commutator => commands::commutator(cfg)?,
        Command::Wick => commands::wick(cfg)?,
        Command::Tadpole => commands::tadpole(cfg)?,
        Command::Smatrix => commands::smatrix(cfg)?,
        Command::Bogoliubov => commands::bogoliubov(cfg)?,
        Command::Graphs => commands::graphs(cfg)?,
        Command::Extend => commands::extend_cmd(cfg)?,
        Command::Ms => commands::ms(cfg)?,
        Command::Wf => commands::wf(cfg)?,
        Command::Flow => commands::flow(cfg)?,
        Command::Suite => return Ok(commands::suite(cfg)),
    };
    Ok((art, false))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = load_config(cli)?;
    let (art, internal) = dispatch(cli.command, &cfg)?;
    let tag = match &cli.timestamp {
        Some(t) => t.clone(),
        None => SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0).to_string(),
    };
    let path = art.write_csv(&cfg.out_dir, &format!("{}_{tag}", cli.command.name()))?;
    for line in &art.summary {
        println!("{line}");
    }
    println!("{} rows written to {}", art.rows.len(), path.display());
    Ok(if internal {
        EXIT_INTERNAL
    } else if art.failures.is_empty() {
        0
    } else {
        eprintln!("failed: {}", art.failures.join(", "));
        EXIT_CHECK
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("paqft: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Internal(_) => EXIT_INTERNAL,
            })
        }
    }
}
