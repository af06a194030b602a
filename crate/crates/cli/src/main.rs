//! `dirac-lab`: runs the numerical checks from JSON configurations and writes
//! plot-ready CSV, JSON and binary snapshot files.
//!
//! Exit codes: 0 success, 1 condition not satisfied (`check`) or I/O failure,
//! 2 usage, 3 convergence, 4 stability.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_lab::LabError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use config::{FlagTargets, Flags};
use output::{write_atomic, Run, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lab(LabError::Domain(_) | LabError::SingularPoint(_)) => 2,
            CliError::Lab(LabError::Convergence { .. } | LabError::Accuracy(_)) => 3,
            CliError::Lab(LabError::Stability(_)) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac-lab", version, about = "Dirac quantization with a massive photon: numerical checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; its keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "dirac-lab-out")]
    out: PathBuf,
    /// Tolerance (quantization, quadrature or solver, by command).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Electric charge.
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Magnetic pole strength.
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Test the quantization condition 2qg ∈ ℤ; exit 0 iff satisfied.
    Check,
    /// Screened charge and sphere fluxes of the pole and charge fields.
    Fields,
    /// Holonomies around the pole and around flux tubes.
    Holonomy,
    /// Field angular momentum sweep over photon mass and separation.
    Angmom,
    /// Lattice Aharonov–Bohm double-slit simulation.
    Absim,
    /// Nielsen–Olesen vortex profile and tension.
    Vortex,
    /// Confinement energy of a pole–antipole string versus length.
    Confine,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Fields => "fields",
            Command::Holonomy => "holonomy",
            Command::Angmom => "angmom",
            Command::Absim => "absim",
            Command::Vortex => "vortex",
            Command::Confine => "confine",
        }
    }
}

type Handler<C> = fn(&C, &mut Sink, &mut Run) -> Result<u8, CliError>;

fn execute<C>(name: &str, flags: &Flags, config: Option<&Path>, out: &Path, handler: Handler<C>) -> u8
where
    C: Default + Serialize + DeserializeOwned + FlagTargets,
{
    let mut run = Run::new(name);
    let mut document = Value::Null;
    let mut outputs = Vec::new();
    let result = config::resolve::<C>(flags, config).and_then(|resolved| {
        document = resolved.document;
        let mut sink = Sink::new(out, &document)?;
        run.note("config_sha256", sink.hash());
        let code = handler(&resolved.config, &mut sink, &mut run);
        outputs = sink.written().to_vec();
        code
    });
    let (code, error) = match result {
        Ok(code) => (code, None),
        Err(e) => {
            eprintln!("dirac-lab {name}: {e}");
            (e.exit_code(), Some(e.to_string()))
        }
    };
    let manifest = run.finish(&document, &outputs, code, error);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = out.join(format!("{name}_manifest.json"));
    if let Err(e) = std::fs::create_dir_all(out)
        .map_err(|e| e.to_string())
        .and_then(|_| write_atomic(&path, format!("{text}\n").as_bytes()).map_err(|e| e.to_string()))
    {
        eprintln!("dirac-lab {name}: could not write manifest: {e}");
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Flags { q: cli.q, g: cli.g, tol: cli.tol };
    let cfg = cli.config.as_deref();
    let out = cli.out.as_path();
    let name = cli.command.name();
    let code = match cli.command {
        Command::Check => execute(name, &flags, cfg, out, commands::check),
        Command::Fields => execute(name, &flags, cfg, out, commands::fields),
        Command::Holonomy => execute(name, &flags, cfg, out, commands::holonomy),
        Command::Angmom => execute(name, &flags, cfg, out, commands::angmom),
        Command::Absim => execute(name, &flags, cfg, out, commands::absim),
        Command::Vortex => execute(name, &flags, cfg, out, commands::vortex),
        Command::Confine => execute(name, &flags, cfg, out, commands::confine),
    };
    ExitCode::from(code)
}
