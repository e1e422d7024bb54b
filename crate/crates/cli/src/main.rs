//! `hfun`: batch front-end for h-functions of Cantor-level slit domains.

mod commands;
mod config;
mod validate;

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::{emit_json, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "hfun", version, about = "h-functions of slit domains approximating the Cantor set")]
struct Cli {
    /// Worker threads for the parallel stages.
    #[arg(long, env = "HFUN_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Step heights over the gaps as CSV.
    Steps(RunConfig),
    /// The merged h-curve as CSV.
    Curve(RunConfig),
    /// Near-threshold power-law fits, one row per level.
    Asymptotics {
        #[command(flatten)]
        cfg: RunConfig,
        /// Levels to fit.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        levels: Vec<u32>,
    },
    /// Runs the invariant suite; exits nonzero on any failure.
    Validate {
        #[command(flatten)]
        cfg: RunConfig,
        /// Shifts the first circle's radius after convergence (negative control).
        #[arg(long, hide = true, allow_hyphen_values = true)]
        tamper_radius: Option<f64>,
    },
    /// Converges the circular preimage and writes it as a snapshot.
    Premap(RunConfig),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Steps(cfg) => commands::steps(&cfg),
        Command::Curve(cfg) => commands::curve(&cfg),
        Command::Asymptotics { cfg, levels } => commands::asymptotics(&cfg, &levels),
        Command::Premap(cfg) => commands::premap(&cfg),
        Command::Validate { cfg, tamper_radius } => {
            let p = validate::build(&cfg, tamper_radius)?;
            let checks = validate::run(&cfg, &p)?;
            let mut text = String::new();
            for c in &checks {
                text.push_str(&c.line());
                text.push('\n');
            }
            config::emit(cfg.output.as_deref(), &text)?;
            emit_json(
                cfg.metadata.as_deref(),
                &json!({
                    "command": "validate",
                    "level": cfg.level,
                    "mode": cfg.basepoint.as_str(),
                    "checks": checks,
                    "report": p.report,
                    "timings": p.timings,
                }),
            )?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            if !failed.is_empty() {
                bail!(ValidationFailed(failed.join(", ")));
            }
            Ok(())
        }
    }
}

#[derive(Debug)]
struct ValidationFailed(String);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "failed checks: {}", self.0)
    }
}

impl std::error::Error for ValidationFailed {}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(core) = e.chain().find_map(|c| c.downcast_ref::<hfun_core::Error>()) {
        core.kind()
    } else if e.downcast_ref::<ValidationFailed>().is_some() {
        "validation"
    } else if e.chain().any(|c| c.is::<std::io::Error>()) {
        "io"
    } else {
        "other"
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": error_kind(&e), "message": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}
