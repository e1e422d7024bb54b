//! Run parameters shared by every subcommand.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use hfun_core::bie::{GmresConfig, NU_SPREAD_TOL};
use hfun_core::conformal::{PreimageConfig, PreimageSnapshot, SolveSettings};
use hfun_core::geometry::{BasepointMode, DEFAULT_MAX_SLITS};
use hfun_core::pipeline::PipelineConfig;

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive finite number")),
        Err(e) => Err(e.to_string()),
    }
}

fn mode(s: &str) -> std::result::Result<BasepointMode, String> {
    s.parse().map_err(|e: hfun_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Cantor level ℓ; the domain has 2^ℓ slits.
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    /// Basepoint: `left` (z0 = -3/2) or `center` (z0 = 0).
    #[arg(long, default_value = "left", value_parser = mode)]
    pub basepoint: BasepointMode,
    /// Nodes per circle (power of two).
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Stopping tolerance of the preimage iteration.
    #[arg(long, default_value_t = 1e-14, value_parser = positive)]
    pub eps: f64,
    /// Iteration cap of the preimage iteration.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Relative residual target of every GMRES solve.
    #[arg(long, default_value_t = 1e-13, value_parser = positive)]
    pub solver_tol: f64,
    /// ξ samples per swept slit.
    #[arg(long, default_value_t = 31)]
    pub samples: usize,
    /// Width of the near-threshold window.
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub asym_eps: f64,
    /// Near-threshold samples per fit.
    #[arg(long, default_value_t = 20)]
    pub asym_count: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_SLITS)]
    pub max_slits: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON metadata destination.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Preimage snapshot, read when present (written by `premap`).
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Solve the arc remainder exactly instead of the constant approximation.
    #[arg(long)]
    pub exact_remainder: bool,
}

impl RunConfig {
    pub fn preimage(&self) -> PreimageConfig {
        PreimageConfig {
            eps: self.eps,
            max_iter: self.max_iter,
            solve: SolveSettings {
                n: self.n,
                gmres: GmresConfig {
                    tol: self.solver_tol,
                    ..GmresConfig::default()
                },
                spread_tol: NU_SPREAD_TOL,
            },
        }
    }

    /// Pipeline settings; an unreadable snapshot is an error, a missing one is not.
    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let snapshot = match &self.snapshot {
            Some(p) if p.exists() => Some(read_snapshot(p)?),
            _ => None,
        };
        Ok(PipelineConfig {
            preimage: self.preimage(),
            samples_per_slit: self.samples,
            max_slits: self.max_slits,
            snapshot,
        })
    }
}

fn read_snapshot(p: &Path) -> Result<PreimageSnapshot> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading snapshot {}", p.display()))?;
    Ok(PreimageSnapshot::from_json(&text)?)
}

/// Writes `text` to `path`, or to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    match path {
        Some(p) => {
            let text = serde_json::to_string_pretty(value)? + "\n";
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            log::info!("metadata: {value}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrap {
        #[command(flatten)]
        cfg: RunConfig,
    }

    #[test]
    fn defaults() {
        let c = Wrap::parse_from(["x"]).cfg;
        assert_eq!(c.n, 16);
        assert_eq!(c.eps, 1e-14);
        assert_eq!(c.max_iter, 100);
        assert_eq!(c.solver_tol, 1e-13);
        assert_eq!(c.samples, 31);
        assert_eq!(c.asym_eps, 1e-6);
        assert_eq!(c.asym_count, 20);
        assert_eq!(c.basepoint, BasepointMode::LeftExterior);
        let p = c.preimage();
        assert_eq!(p.solve.n, 16);
        assert_eq!(p.solve.gmres.tol, 1e-13);
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        assert!(Wrap::try_parse_from(["x", "--eps", "0"]).is_err());
        assert!(Wrap::try_parse_from(["x", "--solver-tol=-1e-3"]).is_err());
        assert!(Wrap::try_parse_from(["x", "--asym-eps", "nan"]).is_err());
        assert!(Wrap::try_parse_from(["x", "--basepoint", "right"]).is_err());
        let c = Wrap::parse_from(["x", "--basepoint", "center", "--max-iter", "7"]).cfg;
        assert_eq!(c.basepoint, BasepointMode::Center);
        assert_eq!(c.max_iter, 7);
    }

    #[test]
    fn missing_snapshot_is_not_an_error() {
        let mut c = Wrap::parse_from(["x"]).cfg;
        c.snapshot = Some("/nonexistent/snapshot.json".into());
        assert!(c.pipeline().unwrap().snapshot.is_none());
    }
}
