//! Behaviour of h just above its first threshold: near-threshold sampling,
//! power-law fits `h ≈ C (r - r*)^β`, and the exponential growth fit of `C_ℓ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hfun::{h_intercept, CaptureContext};

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_COUNT: usize = 20;
/// Samples span `r - r*` from `0.9 ε` down to `0.9 ε · 10^-DECADES`.
pub const DECADES: f64 = 3.0;

/// Reference `C_0..C_8` for the left basepoint, used as a fixture for the growth fit.
pub const REFERENCE_C_LEFT: [f64; 9] = [
    0.900316, 0.939343, 0.977556, 1.018398, 1.061124, 1.105679, 1.152042, 1.200444, 1.251569,
];

/// Reference `C_1..C_8` for the centered basepoint.
pub const REFERENCE_C_CENTER: [f64; 8] = [
    2.351932, 2.395871, 2.466099, 2.555452, 2.655781, 2.763722, 2.878107, 2.998958,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c: f64,
    pub beta: f64,
    /// `Σ (h_j - C (r_j - r*)^β)²` in the original variables.
    pub e: f64,
    pub r_star: f64,
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub a: f64,
    pub b: f64,
    /// `Σ (C_ℓ - A e^{bℓ})²`.
    pub error: f64,
}

impl GrowthFit {
    pub fn predict(&self, level: f64) -> f64 {
        self.a * (self.b * level).exp()
    }
}

/// The single-slit pair `(2√2/π, 1/2)`.
pub fn exact_c0() -> (f64, f64) {
    (2.0 * 2f64.sqrt() / PI, 0.5)
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `h = C (r - r*)^β` by a line in log-log coordinates.
pub fn fit_power_law(samples: &[(f64, f64)], r_star: f64) -> Result<FitResult> {
    if samples.len() < 3 {
        return Err(Error::Domain(format!("power-law fit needs 3 samples, got {}", samples.len())));
    }
    if let Some(&(r, h)) = samples.iter().find(|(r, h)| !(*h > 0.0) || !(*r > r_star)) {
        return Err(Error::Domain(format!("sample (r={r}, h={h}) is not above the threshold with h > 0")));
    }
    let x: Vec<f64> = samples.iter().map(|(r, _)| (r - r_star).ln()).collect();
    let y: Vec<f64> = samples.iter().map(|(_, h)| h.ln()).collect();
    let (beta, lc) = line_fit(&x, &y);
    let c = lc.exp();
    let e = samples
        .iter()
        .map(|(r, h)| (h - c * (r - r_star).powf(beta)).powi(2))
        .sum();
    Ok(FitResult {
        c,
        beta,
        e,
        r_star,
        samples: samples.to_vec(),
    })
}

/// Fits `C_ℓ ≈ A e^{bℓ}` by a line through `(ℓ, log C_ℓ)`.
pub fn fit_exp_growth(levels: &[f64], c_values: &[f64]) -> Result<GrowthFit> {
    if levels.len() != c_values.len() {
        return Err(Error::SizeMismatch {
            expected: levels.len(),
            got: c_values.len(),
        });
    }
    if levels.len() < 3 {
        return Err(Error::Domain("growth fit needs at least 3 levels".into()));
    }
    if let Some(c) = c_values.iter().find(|c| !(**c > 0.0)) {
        return Err(Error::Domain(format!("nonpositive constant {c}")));
    }
    let y: Vec<f64> = c_values.iter().map(|c| c.ln()).collect();
    let (b, la) = line_fit(levels, &y);
    let a = la.exp();
    let error = levels
        .iter()
        .zip(c_values)
        .map(|(l, c)| (c - a * (b * l).exp()).powi(2))
        .sum();
    Ok(GrowthFit { a, b, error })
}

/// Radius threshold where h starts rising: the near end of the first swept slit.
pub fn threshold(ctx: &CaptureContext) -> f64 {
    ctx.arc_range(0).0
}

/// `count` pairs `(r, h)` with `r - r*` geometrically spaced in `(0, ε)`.
///
/// Each `r` is placed by bisection in the angle of `ξ` on the first swept
/// circle, between the top of the circle and the endpoint preimage.
pub fn sample_near_threshold(ctx: &CaptureContext, eps: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    if count < 2 || !(eps > 0.0) {
        return Err(Error::Domain("need eps > 0 and at least 2 samples".into()));
    }
    let r_star = threshold(ctx);
    let circle = ctx.target_circle(0);
    let z0 = ctx.basepoint.z0;
    let r_of = |theta: f64| ctx.map.at_angle(circle, theta).re - z0;
    let floor = r_of(PI) - r_star;
    let mut out = Vec::with_capacity(count);
    for i in (0..count).rev() {
        let delta = 0.9 * eps * 10f64.powf(-DECADES * i as f64 / (count - 1) as f64);
        let (mut lo, mut hi) = (0.5 * PI, PI);
        if r_of(lo) - r_star <= delta {
            return Err(Error::Sampling(format!("r at the top of the circle is within {delta:.1e} of the threshold")));
        }
        if floor >= delta {
            return Err(Error::Sampling(format!(
                "endpoint image misses the threshold by {floor:.1e} > {delta:.1e}; increase n"
            )));
        }
        // r decreases in θ on (π/2, π)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if r_of(mid) - r_star > delta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
        }
        let theta = 0.5 * (lo + hi);
        let p = h_intercept(ctx, 0, theta)?;
        let d = p.r - r_star;
        if !(d > 0.0 && d < eps) {
            return Err(Error::Sampling(format!("sample r - r* = {d:.3e} outside (0, {eps:.1e})")));
        }
        out.push((p.r, p.h));
    }
    Ok(out)
}
