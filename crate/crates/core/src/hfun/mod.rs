//! The h-function: constant steps over the gaps, and Möbius-regularized
//! arc values where the capture circle crosses a slit.
//!
//! Slit and circle indices are 0-based. In centered mode, pair `k` is the
//! slit `m/2 + k` together with its mirror `m/2 - 1 - k`.

mod mobius;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use mobius::{mobius_phi, mobius_psi, phi_field, psi_field, MobiusFrame, INFINITY};

use crate::bie::{cauchy_eval, GmresConfig, LayerOperators};
use crate::conformal::{invert_on_axis, ConformalMap};
use crate::error::{Error, Result};
use crate::format::g12;
use crate::geometry::{gap_schedule, Basepoint, BasepointMode, SlitDomain};
use crate::harmonic::{sigma_at, HarmonicData};

pub const DEFAULT_SAMPLES_PER_SLIT: usize = 31;
/// Angular offset of the continuity probes from the arc endpoints.
pub const ENDPOINT_PROBE: f64 = 1e-6;
pub const MONOTONE_TOL: f64 = 1e-6;

/// Everything the intercept formulas need at one basepoint.
#[derive(Debug, Clone)]
pub struct CaptureContext {
    pub map: ConformalMap,
    pub harmonic: HarmonicData,
    pub slits: SlitDomain,
    pub basepoint: Basepoint,
    pub zeta0: f64,
    /// `σ_k(ζ0)` for every circle.
    pub sigma0: Vec<f64>,
}

impl CaptureContext {
    pub fn new(map: ConformalMap, harmonic: HarmonicData, slits: SlitDomain, mode: BasepointMode) -> Result<Self> {
        let basepoint = Basepoint::new(mode);
        basepoint.validate(&slits)?;
        let zeta0 = invert_on_axis(&map, basepoint.z0)?;
        let sigma0 = sigma_at(map.grid(), &harmonic, Complex64::new(zeta0, 0.0))?;
        Ok(Self {
            map,
            harmonic,
            slits,
            basepoint,
            zeta0,
            sigma0,
        })
    }

    pub fn mode(&self) -> BasepointMode {
        self.basepoint.mode
    }

    pub fn m(&self) -> usize {
        self.slits.m
    }

    /// Number of arcs the capture circle sweeps: `m`, or `m/2` pairs.
    pub fn arc_count(&self) -> usize {
        match self.mode() {
            BasepointMode::LeftExterior => self.m(),
            BasepointMode::Center => self.m() / 2,
        }
    }

    /// Circle carrying `ξ` for arc `k`.
    pub fn target_circle(&self, k: usize) -> usize {
        match self.mode() {
            BasepointMode::LeftExterior => k,
            BasepointMode::Center => self.m() / 2 + k,
        }
    }

    /// Exact radius range over which arc `k` is swept.
    pub fn arc_range(&self, k: usize) -> (f64, f64) {
        let j = self.target_circle(k);
        let z0 = self.basepoint.z0;
        (self.slits.left(j) - z0, self.slits.right(j) - z0)
    }

    /// The step heights at this basepoint.
    pub fn step_heights(&self) -> Vec<f64> {
        step_heights(&self.sigma0, self.mode())
    }
}

/// Cumulative harmonic measures over the gaps.
///
/// Left mode: `ω_k = Σ_{j<k} σ_j`, `k = 1..m-1`. Centered mode: the sum runs
/// over the `k` innermost pairs, `k = 1..m/2-1`.
pub fn step_heights(sigma0: &[f64], mode: BasepointMode) -> Vec<f64> {
    let m = sigma0.len();
    let mut acc = 0.0;
    match mode {
        BasepointMode::LeftExterior => sigma0[..m.saturating_sub(1)]
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect(),
        BasepointMode::Center => {
            let h = m / 2;
            (1..h)
                .map(|k| {
                    acc += sigma0[h - k] + sigma0[h + k - 1];
                    acc
                })
                .collect()
        }
    }
}

/// One regularizing field on a partially captured circle.
#[derive(Debug, Clone, Copy)]
struct ArcField {
    circle: usize,
    xi: Complex64,
    xi1: f64,
}

impl ArcField {
    fn from_frame(f: &MobiusFrame) -> Self {
        Self {
            circle: f.k,
            xi: f.xi,
            xi1: f.xi1,
        }
    }

    fn mirrored(f: &MobiusFrame, circle: usize) -> Self {
        Self {
            circle,
            xi: -f.xi,
            xi1: -f.xi1,
        }
    }

    fn value(&self, z: Complex64) -> Result<f64> {
        psi_field(
            z,
            &MobiusFrame {
                k: self.circle,
                xi: self.xi,
                xi1: self.xi1,
            },
        )
    }
}

/// Result of one intercept evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intercept {
    pub theta: f64,
    pub r: f64,
    pub h: f64,
}

/// `U(ζ0) = Σ_f Ψ_f(ζ0) + Σ_{j full} σ_j(ζ0) - Σ_j (Σ_{f off j} Ψ_f(c_j)) σ_j(ζ0)`.
fn capture_value(ctx: &CaptureContext, fields: &[ArcField], full: &[usize]) -> Result<f64> {
    let z0 = Complex64::new(ctx.zeta0, 0.0);
    let dom = ctx.map.domain();
    let mut u = 0.0;
    for f in fields {
        u += f.value(z0)?;
    }
    for &j in full {
        u += ctx.sigma0[j];
    }
    for j in 0..dom.m() {
        let mut p = 0.0;
        for f in fields.iter().filter(|f| f.circle != j) {
            p += f.value(dom.center(j))?;
        }
        u -= p * ctx.sigma0[j];
    }
    Ok(u)
}

fn left_fields(ctx: &CaptureContext, k: usize, theta: f64) -> (Vec<ArcField>, Vec<usize>) {
    let frame = MobiusFrame::left_anchored(ctx.map.domain(), k, theta);
    (vec![ArcField::from_frame(&frame)], (0..k).collect())
}

fn center_fields(ctx: &CaptureContext, k: usize, theta: f64) -> (Vec<ArcField>, Vec<usize>) {
    let h = ctx.m() / 2;
    // ξ1 = c - r is the inner real point of the right member
    let frame = MobiusFrame::left_anchored(ctx.map.domain(), h + k, theta);
    let fields = vec![ArcField::from_frame(&frame), ArcField::mirrored(&frame, h - 1 - k)];
    let full = (0..k).flat_map(|j| [h - 1 - j, h + j]).collect();
    (fields, full)
}

fn fields_for(ctx: &CaptureContext, k: usize, theta: f64) -> (Vec<ArcField>, Vec<usize>) {
    match ctx.mode() {
        BasepointMode::LeftExterior => left_fields(ctx, k, theta),
        BasepointMode::Center => center_fields(ctx, k, theta),
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::ArcEndpoint)
    }
}

/// `(r, h)` with `ξ` at angle `θ` on circle `k`, basepoint left of all slits.
pub fn h_intercept_left(ctx: &CaptureContext, k: usize, theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    if theta < 1e-8 || PI - theta < 1e-8 {
        log::warn!("ξ within {:.1e} of an arc endpoint; Ψ is poorly conditioned", theta.min(PI - theta));
    }
    let (fields, full) = left_fields(ctx, k, theta);
    let r = ctx.map.at_angle(k, theta).re - ctx.basepoint.z0;
    Ok((r, capture_value(ctx, &fields, &full)?))
}

/// `(r, h)` for pair `k` with `ξ` at angle `θ` on circle `m/2 + k`, basepoint 0.
pub fn h_intercept_center(ctx: &CaptureContext, k: usize, theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let (fields, full) = center_fields(ctx, k, theta);
    let r = ctx.map.at_angle(ctx.m() / 2 + k, theta).re - ctx.basepoint.z0;
    Ok((r, capture_value(ctx, &fields, &full)?))
}

/// Centered intercept rebuilt from the left member's own geometry: the
/// second frame uses `c - r e^{-iθ}` and its right real point, and `r` is read
/// off the left slit. Agrees with [`h_intercept_center`] on symmetric domains.
pub fn h_intercept_center_mirrored(ctx: &CaptureContext, k: usize, theta: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let h = ctx.m() / 2;
    let dom = ctx.map.domain();
    let (jr, jl) = (h + k, h - 1 - k);
    let right = MobiusFrame::left_anchored(dom, jr, theta);
    let left = ArcField {
        circle: jl,
        xi: dom.center(jl) - Complex64::from_polar(dom.radii[jl], theta),
        xi1: dom.centers[jl] + dom.radii[jl],
    };
    let fields = [ArcField::from_frame(&right), left];
    let full: Vec<usize> = (0..k).flat_map(|j| [h - 1 - j, h + j]).collect();
    let r = ctx.basepoint.z0 - ctx.map.at_angle(jl, PI - theta).re;
    Ok((r, capture_value(ctx, &fields, &full)?))
}

pub fn h_intercept(ctx: &CaptureContext, k: usize, theta: f64) -> Result<Intercept> {
    let (r, h) = match ctx.mode() {
        BasepointMode::LeftExterior => h_intercept_left(ctx, k, theta)?,
        BasepointMode::Center => h_intercept_center(ctx, k, theta)?,
    };
    Ok(Intercept { theta, r, h })
}

/// Intercepts with the remainder problem solved exactly instead of
/// replacing each `Ψ_f` on `C_j` by `Ψ_f(c_j)`.
///
/// The remainder `W` has data `-Σ_{f off j} Ψ_f` on `C_j`; one Neumann-kernel
/// solve gives an analytic function with real boundary values `data + ν_j`,
/// and the harmonic measures remove the piecewise constant `ν`.
pub struct ExactRemainder<'a> {
    ctx: &'a CaptureContext,
    ops: LayerOperators<'a>,
    gmres: GmresConfig,
}

impl<'a> ExactRemainder<'a> {
    pub fn new(ctx: &'a CaptureContext, gmres: GmresConfig) -> Self {
        Self {
            ctx,
            ops: LayerOperators::new(ctx.map.grid()),
            gmres,
        }
    }

    pub fn intercept(&self, k: usize, theta: f64) -> Result<Intercept> {
        check_theta(theta)?;
        let ctx = self.ctx;
        let approx = h_intercept(ctx, k, theta)?;
        let (fields, full) = fields_for(ctx, k, theta);
        let grid = ctx.map.grid();
        let mut data = vec![0.0; grid.len()];
        for (p, d) in data.iter_mut().enumerate() {
            let j = grid.circle_of(p);
            for f in fields.iter().filter(|f| f.circle != j) {
                *d -= f.value(grid.points()[p])?;
            }
        }
        let (sol, nu) = self.ops.solve_for(&data, &self.gmres, f64::INFINITY)?;
        let boundary: Vec<Complex64> = (0..grid.len())
            .map(|p| Complex64::new(data[p] + nu.nu[grid.circle_of(p)], sol.mu[p]))
            .collect();
        let z0 = Complex64::new(ctx.zeta0, 0.0);
        let mut u = cauchy_eval(grid, &boundary, z0)?.re;
        for (j, s) in ctx.sigma0.iter().enumerate() {
            u -= nu.nu[j] * s;
        }
        for &j in &full {
            u += ctx.sigma0[j];
        }
        for f in &fields {
            u += f.value(z0)?;
        }
        Ok(Intercept { h: u, ..approx })
    }
}

/// Deviation of `Ψ_f` on circle `j` from its value at `c_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantError {
    /// Circle carrying the regularizing field.
    pub field_circle: usize,
    pub j: usize,
    pub max_dev: f64,
}

/// Node-wise `max |Ψ_f(η_j) - Ψ_f(c_j)|` for every field of arc `k` at `θ`.
pub fn constant_approximation(ctx: &CaptureContext, k: usize, theta: f64) -> Result<Vec<ConstantError>> {
    let (fields, _) = fields_for(ctx, k, theta);
    let grid = ctx.map.grid();
    let dom = ctx.map.domain();
    let mut out = Vec::new();
    for f in &fields {
        for j in (0..dom.m()).filter(|&j| j != f.circle) {
            let pc = f.value(dom.center(j))?;
            let mut dev: f64 = 0.0;
            for &z in &grid.points()[grid.range(j)] {
                dev = dev.max((f.value(z)? - pc).abs());
            }
            out.push(ConstantError {
                field_circle: f.circle,
                j,
                max_dev: dev,
            });
        }
    }
    Ok(out)
}

/// Bound on the error `U(ζ0)` inherits from the constant approximation:
/// `Σ_j σ_j(ζ0) · max_f dev_{f,j}` (maximum principle).
pub fn constant_error_bound(ctx: &CaptureContext, errs: &[ConstantError]) -> f64 {
    let mut per_j = vec![0.0f64; ctx.m()];
    for e in errs {
        per_j[e.j] += e.max_dev;
    }
    per_j.iter().zip(&ctx.sigma0).map(|(d, s)| d * s).sum()
}

/// Equidistant angles on the open upper semicircle, half a spacing from each
/// end, ordered so that `r` increases.
pub fn sample_angles(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| PI - PI * (i as f64 - 0.5) / count as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSegment {
    /// Number of slits (or pairs) inside the capture circle.
    pub k: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    /// Circle carrying `ξ`.
    pub slit: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub samples: Vec<Intercept>,
    /// Probes just inside both ends of the arc.
    pub start_probe: Intercept,
    pub end_probe: Intercept,
    /// Largest node deviation of the constant approximation over the samples.
    pub constant_dev: f64,
    /// Largest induced bound on `|ΔU(ζ0)|` over the samples.
    pub constant_bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveDiagnostics {
    /// Largest mismatch between an arc probe and the adjacent step height.
    pub continuity: f64,
    /// Largest mismatch between a probe's `r` and the exact slit endpoint.
    pub endpoint_r: f64,
    pub constant_dev: f64,
    pub constant_bound: f64,
    /// Largest decrease found when merging (0 for a monotone curve).
    pub max_drop: f64,
    pub h_min: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCurve {
    pub basepoint: Basepoint,
    pub m: usize,
    /// `h = 0` for `r ≤ leading`.
    pub leading: f64,
    /// `h = 1` for `r ≥ trailing`.
    pub trailing: f64,
    pub steps: Vec<StepSegment>,
    pub arcs: Vec<ArcSegment>,
    pub diagnostics: CurveDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentType {
    Step,
    Arc,
}

impl SegmentType {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentType::Step => "step",
            SegmentType::Arc => "arc",
        }
    }
}

/// One row of the merged curve. `index` is the step count for steps and the
/// 1-based slit number for arcs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub h: f64,
    pub kind: SegmentType,
    pub index: usize,
}

impl HCurve {
    /// Steps and arc samples merged and sorted by `r`.
    pub fn merged(&self) -> Vec<CurvePoint> {
        let pt = |r, h, kind, index| CurvePoint { r, h, kind, index };
        let mut out = vec![
            pt(0.0, 0.0, SegmentType::Step, 0),
            pt(self.leading, 0.0, SegmentType::Step, 0),
        ];
        for s in &self.steps {
            out.push(pt(s.r_lo, s.omega, SegmentType::Step, s.k));
            out.push(pt(s.r_hi, s.omega, SegmentType::Step, s.k));
        }
        for a in &self.arcs {
            for s in &a.samples {
                out.push(pt(s.r, s.h, SegmentType::Arc, a.slit + 1));
            }
        }
        out.push(pt(self.trailing, 1.0, SegmentType::Step, self.steps.len() + 1));
        out.sort_by(|a, b| a.r.total_cmp(&b.r));
        out
    }

    /// CSV with columns `r,h,segment_type,slit_index`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,h,segment_type,slit_index\n");
        for p in self.merged() {
            s.push_str(&format!("{},{},{},{}\n", g12(p.r), g12(p.h), p.kind.as_str(), p.index));
        }
        s
    }

    pub fn arc_sample_count(&self) -> usize {
        self.arcs.iter().map(|a| a.samples.len()).sum()
    }
}

fn audit(points: &[CurvePoint]) -> (f64, Option<f64>) {
    let mut drop: f64 = 0.0;
    let mut at = None;
    let mut best = f64::NEG_INFINITY;
    for p in points {
        if best - p.h > drop {
            drop = best - p.h;
            at = Some(p.r);
        }
        best = best.max(p.h);
    }
    (drop, at)
}

/// How the remainder problem on the other circles is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remainder {
    /// Each `Ψ_f` on `C_j` replaced by `Ψ_f(c_j)`.
    #[default]
    Constant,
    /// One extra Neumann-kernel solve per sample.
    Exact,
}

fn build_arc(ctx: &CaptureContext, exact: Option<&ExactRemainder<'_>>, k: usize, samples: usize) -> Result<ArcSegment> {
    let eval = |theta: f64| match exact {
        Some(e) => e.intercept(k, theta),
        None => h_intercept(ctx, k, theta),
    };
    let (r_lo, r_hi) = ctx.arc_range(k);
    let mut pts = Vec::with_capacity(samples);
    let mut dev: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for theta in sample_angles(samples) {
        pts.push(eval(theta)?);
        let errs = constant_approximation(ctx, k, theta)?;
        dev = errs.iter().map(|e| e.max_dev).fold(dev, f64::max);
        bound = bound.max(constant_error_bound(ctx, &errs));
    }
    Ok(ArcSegment {
        slit: ctx.target_circle(k),
        r_lo,
        r_hi,
        samples: pts,
        start_probe: eval(PI - ENDPOINT_PROBE)?,
        end_probe: eval(ENDPOINT_PROBE)?,
        constant_dev: dev,
        constant_bound: bound,
    })
}

/// Assembles the full h-curve and audits monotonicity and continuity.
pub fn build_curve(ctx: &CaptureContext, samples_per_slit: usize) -> Result<HCurve> {
    build_curve_with(ctx, samples_per_slit, Remainder::Constant)
}

pub fn build_curve_with(ctx: &CaptureContext, samples_per_slit: usize, remainder: Remainder) -> Result<HCurve> {
    let sched = gap_schedule(&ctx.slits, &ctx.basepoint)?;
    let omegas = ctx.step_heights();
    let steps: Vec<StepSegment> = sched
        .steps
        .iter()
        .zip(&omegas)
        .map(|(s, &omega)| StepSegment {
            k: s.k,
            r_lo: s.r_lo,
            r_hi: s.r_hi,
            omega,
        })
        .collect();
    let exact = match remainder {
        Remainder::Exact => Some(ExactRemainder::new(ctx, GmresConfig::default())),
        Remainder::Constant => None,
    };
    let arcs = (0..ctx.arc_count())
        .into_par_iter()
        .map(|k| build_arc(ctx, exact.as_ref(), k, samples_per_slit))
        .collect::<Result<Vec<_>>>()?;

    let mut diag = CurveDiagnostics::default();
    for (k, a) in arcs.iter().enumerate() {
        let before = if k == 0 { 0.0 } else { steps[k - 1].omega };
        let after = steps.get(k).map_or(1.0, |s| s.omega);
        diag.continuity = diag
            .continuity
            .max((a.start_probe.h - before).abs())
            .max((a.end_probe.h - after).abs());
        diag.endpoint_r = diag
            .endpoint_r
            .max((a.start_probe.r - a.r_lo).abs())
            .max((a.end_probe.r - a.r_hi).abs());
        diag.constant_dev = diag.constant_dev.max(a.constant_dev);
        diag.constant_bound = diag.constant_bound.max(a.constant_bound);
    }
    let mut curve = HCurve {
        basepoint: ctx.basepoint,
        m: ctx.m(),
        leading: sched.leading,
        trailing: sched.trailing,
        steps,
        arcs,
        diagnostics: diag,
    };
    let merged = curve.merged();
    let (drop, at) = audit(&merged);
    curve.diagnostics.max_drop = drop;
    curve.diagnostics.h_min = merged.iter().map(|p| p.h).fold(f64::INFINITY, f64::min);
    curve.diagnostics.h_max = merged.iter().map(|p| p.h).fold(f64::NEG_INFINITY, f64::max);
    if drop > MONOTONE_TOL {
        return Err(Error::Monotonicity {
            r: at.unwrap_or(f64::NAN),
            drop,
        });
    }
    Ok(curve)
}
