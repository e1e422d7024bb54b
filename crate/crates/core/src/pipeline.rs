//! End-to-end driver: slit domain → circular preimage → harmonic measures →
//! capture context.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::asymfit::{fit_power_law, sample_near_threshold, threshold, FitResult};
use crate::conformal::{find_preimage, slit_fit_residual, Preimage, PreimageConfig, PreimageSnapshot};
use crate::error::Result;
use crate::geometry::{cantor_level_capped, BasepointMode, SlitDomain, DEFAULT_MAX_SLITS};
use crate::harmonic::build_harmonic_data;
use crate::hfun::{build_curve, CaptureContext, HCurve, DEFAULT_SAMPLES_PER_SLIT};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub preimage: PreimageConfig,
    pub samples_per_slit: usize,
    pub max_slits: usize,
    /// Cached circles; used when its key matches the requested run.
    pub snapshot: Option<PreimageSnapshot>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preimage: PreimageConfig::default(),
            samples_per_slit: DEFAULT_SAMPLES_PER_SLIT,
            max_slits: DEFAULT_MAX_SLITS,
            snapshot: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub preimage_s: f64,
    pub harmonic_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapReport {
    pub criterion: f64,
    pub iterations: usize,
    pub from_snapshot: bool,
    pub slit_fit_residual: f64,
    pub max_im_f: f64,
    pub max_nu_spread: f64,
    pub max_row_sum: f64,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub level: Option<u32>,
    pub ctx: CaptureContext,
    pub report: MapReport,
    pub timings: Timings,
    pub samples_per_slit: usize,
}

/// Converged preimage of `slits`, from the snapshot when its key matches.
pub fn preimage_for(slits: &SlitDomain, cfg: &PipelineConfig) -> Result<(Preimage, bool)> {
    match &cfg.snapshot {
        Some(s) if s.matches(slits.level, &cfg.preimage) => Ok((s.restore(&cfg.preimage)?, true)),
        Some(_) => {
            log::warn!("snapshot key does not match this run; iterating from scratch");
            Ok((find_preimage(slits, &cfg.preimage)?, false))
        }
        None => Ok((find_preimage(slits, &cfg.preimage)?, false)),
    }
}

impl Pipeline {
    pub fn build(level: u32, mode: BasepointMode, cfg: &PipelineConfig) -> Result<Self> {
        let slits = cantor_level_capped(level, cfg.max_slits)?;
        Self::from_slits(slits, mode, cfg)
    }

    pub fn from_slits(slits: SlitDomain, mode: BasepointMode, cfg: &PipelineConfig) -> Result<Self> {
        crate::geometry::Basepoint::new(mode).validate(&slits)?;
        let t = Instant::now();
        let (pre, from_snapshot) = preimage_for(&slits, cfg)?;
        let preimage_s = t.elapsed().as_secs_f64();
        Self::from_preimage(pre, from_snapshot, slits, mode, cfg, preimage_s)
    }

    pub fn from_preimage(
        pre: Preimage,
        from_snapshot: bool,
        slits: SlitDomain,
        mode: BasepointMode,
        cfg: &PipelineConfig,
        preimage_s: f64,
    ) -> Result<Self> {
        let t = Instant::now();
        let harmonic = build_harmonic_data(pre.map.grid(), &cfg.preimage.solve.gmres, cfg.preimage.solve.spread_tol)?;
        let harmonic_s = t.elapsed().as_secs_f64();
        let report = MapReport {
            criterion: pre.criterion,
            iterations: pre.iterations,
            from_snapshot,
            slit_fit_residual: slit_fit_residual(&pre.map, &slits),
            max_im_f: pre.map.max_boundary_height(),
            max_nu_spread: harmonic.max_nu_spread.max(pre.map.nu_spread.iter().copied().fold(0.0, f64::max)),
            max_row_sum: harmonic.max_row_sum(),
            solver_iterations: harmonic.max_solver_iterations.max(pre.map.solver_iterations),
        };
        if report.max_nu_spread > cfg.preimage.solve.spread_tol {
            log::warn!(
                "nu spread {:.3e} exceeds {:.1e}; consider a finer grid",
                report.max_nu_spread,
                cfg.preimage.solve.spread_tol
            );
        }
        let level = slits.level;
        let ctx = CaptureContext::new(pre.map, harmonic, slits, mode)?;
        Ok(Self {
            level,
            ctx,
            report,
            timings: Timings { preimage_s, harmonic_s },
            samples_per_slit: cfg.samples_per_slit,
        })
    }

    pub fn mode(&self) -> BasepointMode {
        self.ctx.mode()
    }

    pub fn step_heights(&self) -> Vec<f64> {
        self.ctx.step_heights()
    }

    pub fn curve(&self) -> Result<HCurve> {
        build_curve(&self.ctx, self.samples_per_slit)
    }

    pub fn near_threshold_fit(&self, eps: f64, count: usize) -> Result<FitResult> {
        let samples = sample_near_threshold(&self.ctx, eps, count)?;
        fit_power_law(&samples, threshold(&self.ctx))
    }

    pub fn snapshot(&self, cfg: &PipelineConfig) -> PreimageSnapshot {
        let d = self.ctx.map.domain();
        PreimageSnapshot {
            level: self.level,
            n: cfg.preimage.solve.n,
            eps: cfg.preimage.eps,
            centers: d.centers.clone(),
            radii: d.radii.clone(),
            criterion: self.report.criterion,
            iterations: self.report.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_skips_iteration() {
        let cfg = PipelineConfig::default();
        let p = Pipeline::build(2, BasepointMode::LeftExterior, &cfg).unwrap();
        assert!(!p.report.from_snapshot);
        let cached = PipelineConfig {
            snapshot: Some(p.snapshot(&cfg)),
            ..PipelineConfig::default()
        };
        let q = Pipeline::build(2, BasepointMode::LeftExterior, &cached).unwrap();
        assert!(q.report.from_snapshot);
        assert_eq!(p.step_heights(), q.step_heights());
        // a snapshot for another level is ignored
        let r = Pipeline::build(1, BasepointMode::LeftExterior, &cached).unwrap();
        assert!(!r.report.from_snapshot);
    }

    #[test]
    fn center_rejects_level_zero() {
        assert!(Pipeline::build(0, BasepointMode::Center, &PipelineConfig::default()).is_err());
    }

    #[test]
    fn report_is_clean() {
        let p = Pipeline::build(3, BasepointMode::Center, &PipelineConfig::default()).unwrap();
        assert!(p.report.criterion < 1e-14);
        assert!(p.report.slit_fit_residual <= 10.0 * 1e-14 * 8.0);
        assert!(p.report.max_row_sum < 1e-10);
    }
}
