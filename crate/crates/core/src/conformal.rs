//! Conformal map from a circular domain onto a horizontal slit domain, and the
//! fixed-point iteration that finds the circular preimage of given slits.
//!
//! With `γ = Im η`, the Neumann-kernel solve gives `μ` and `ν` such that
//! `f = γ + ν + iμ` is the trace of an analytic `f` with `f(∞) = 0`; then
//! `F(ζ) = ζ - i f(ζ)` and on circle `j`, `F(η) = Re η + μ - iν_j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bie::{
    cauchy_eval_guarded, discretize, BoundaryGrid, CircularDomain, Density, GmresConfig, LayerOperators,
    PiecewiseConstant, TrigInterpolant, DEFAULT_GUARD, NU_SPREAD_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{initial_circles, SlitDomain};

/// Settings shared by every Neumann-kernel solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    /// Nodes per circle.
    pub n: usize,
    pub gmres: GmresConfig,
    pub spread_tol: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            n: 16,
            gmres: GmresConfig::default(),
            spread_tol: NU_SPREAD_TOL,
        }
    }
}

/// Solved map `F` of one circular domain.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    grid: BoundaryGrid,
    pub mu: Density,
    pub nu: PiecewiseConstant,
    /// `f(η) = γ + ν + iμ` at every node.
    pub boundary_f: Vec<Complex64>,
    mu_interp: Vec<TrigInterpolant>,
    pub solver_iterations: usize,
    pub solver_residual: f64,
    pub nu_spread: Vec<f64>,
}

/// Image slits of a solved map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitImage {
    pub centers: Vec<f64>,
    pub lengths: Vec<f64>,
    /// Imaginary part `-ν_j` of each image slit.
    pub heights: Vec<f64>,
}

/// Builds `F` for the circular domain `domain`.
pub fn map_from_circular(domain: &CircularDomain, settings: &SolveSettings) -> Result<ConformalMap> {
    let grid = discretize(domain, settings.n)?;
    let gamma = Density::from_fn(&grid, |z| z.im);
    let ops = LayerOperators::new(&grid);
    let (sol, nu) = ops.solve_for(&gamma, &settings.gmres, settings.spread_tol)?;
    let boundary_f = (0..grid.len())
        .map(|p| Complex64::new(gamma[p] + nu.nu[grid.circle_of(p)], sol.mu[p]))
        .collect();
    let mu_interp = (0..grid.m())
        .map(|j| TrigInterpolant::with_spectral(grid.spectral(), sol.mu.circle(j)))
        .collect();
    Ok(ConformalMap {
        grid,
        mu: sol.mu,
        nu: nu.nu,
        boundary_f,
        mu_interp,
        solver_iterations: sol.iterations,
        solver_residual: sol.true_residual,
        nu_spread: nu.spread,
    })
}

impl ConformalMap {
    pub fn grid(&self) -> &BoundaryGrid {
        &self.grid
    }

    pub fn domain(&self) -> &CircularDomain {
        self.grid.domain()
    }

    /// `Re F(η_k(s))`, using the trigonometric interpolant of `μ_k`.
    pub fn boundary_re(&self, k: usize, s: f64) -> f64 {
        let d = self.domain();
        d.centers[k] + d.radii[k] * s.cos() + self.mu_interp[k].eval(s)
    }

    fn boundary_re_derivative(&self, k: usize, s: f64) -> f64 {
        -self.domain().radii[k] * s.sin() + self.mu_interp[k].derivative(s)
    }

    /// `F(η_k(s))` on circle `k`.
    pub fn boundary_value(&self, k: usize, s: f64) -> Complex64 {
        Complex64::new(self.boundary_re(k, s), -self.nu[k])
    }

    /// `F` at the point of circle `k` with polar angle `θ` (`ζ = c_k + r_k e^{iθ}`).
    pub fn at_angle(&self, k: usize, theta: f64) -> Complex64 {
        self.boundary_value(k, (-theta).rem_euclid(2.0 * PI))
    }

    /// Largest `|Im F|` over all nodes.
    pub fn max_boundary_height(&self) -> f64 {
        self.nu.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `F(ζ)` on the boundary (interpolated) or in the interior (Cauchy integral).
    pub fn eval(&self, zeta: Complex64) -> Result<Complex64> {
        self.eval_guarded(zeta, DEFAULT_GUARD)
    }

    pub fn eval_guarded(&self, zeta: Complex64, guard: f64) -> Result<Complex64> {
        let d = self.domain();
        for k in 0..d.m() {
            let rel = d.distance_to(k, zeta).abs() / d.radii[k];
            if rel <= 1e-10 {
                let s = (-(zeta - d.center(k)).arg()).rem_euclid(2.0 * PI);
                let f = Complex64::new(zeta.im + self.nu[k], self.mu_interp[k].eval(s));
                return Ok(zeta - Complex64::i() * f);
            }
        }
        let f = cauchy_eval_guarded(&self.grid, &self.boundary_f, zeta, guard)?;
        Ok(zeta - Complex64::i() * f)
    }

    /// `f(ζ) = i (F(ζ) - ζ)` at an interior point.
    pub fn eval_f(&self, zeta: Complex64) -> Result<Complex64> {
        cauchy_eval_guarded(&self.grid, &self.boundary_f, zeta, DEFAULT_GUARD)
    }

    /// Parameter of the extremum of `Re F` on circle `k` near node `i`.
    fn polish_extremum(&self, k: usize, s0: f64, maximize: bool) -> f64 {
        let h = 2.0 * PI / self.grid.n() as f64;
        let sign = if maximize { 1.0 } else { -1.0 };
        let g = |s: f64| sign * self.boundary_re(k, s);
        let (mut a, mut b) = (s0 - h, s0 + h);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (g(x1), g(x2));
        while b - a > 1e-13 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = g(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = g(x1);
            }
        }
        let mid = 0.5 * (a + b);
        // Newton touch-up on the derivative; keep it only if it improves.
        let d1 = self.boundary_re_derivative(k, mid);
        let eps = 1e-7;
        let d2 = (self.boundary_re_derivative(k, mid + eps) - self.boundary_re_derivative(k, mid - eps)) / (2.0 * eps);
        if d2 != 0.0 {
            let cand = mid - d1 / d2;
            if (cand - mid).abs() < h && g(cand) >= g(mid) {
                return cand;
            }
        }
        mid
    }

    /// Extremes of `Re F` on circle `k`: `(s_min, min, s_max, max)`.
    pub fn circle_extremes(&self, k: usize) -> (f64, f64, f64, f64) {
        let nodes = self.grid.nodes();
        let vals: Vec<f64> = nodes.iter().map(|&s| self.boundary_re(k, s)).collect();
        let imax = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let imin = (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let smax = self.polish_extremum(k, nodes[imax], true);
        let smin = self.polish_extremum(k, nodes[imin], false);
        let (vmax, vmin) = (self.boundary_re(k, smax).max(vals[imax]), self.boundary_re(k, smin).min(vals[imin]));
        (smin, vmin, smax, vmax)
    }
}

/// Center and length of each image slit from the extremes of `Re F`.
pub fn slit_image(map: &ConformalMap) -> SlitImage {
    let m = map.domain().m();
    let mut centers = Vec::with_capacity(m);
    let mut lengths = Vec::with_capacity(m);
    for k in 0..m {
        let (_, lo, _, hi) = map.circle_extremes(k);
        centers.push(0.5 * (lo + hi));
        lengths.push(hi - lo);
    }
    SlitImage {
        centers,
        lengths,
        heights: map.nu.iter().map(|v| -v).collect(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PreimageConfig {
    /// Stop once the mean slit mismatch falls below this.
    pub eps: f64,
    pub max_iter: usize,
    pub solve: SolveSettings,
}

impl Default for PreimageConfig {
    fn default() -> Self {
        Self {
            eps: 1e-14,
            max_iter: 100,
            solve: SolveSettings::default(),
        }
    }
}

/// Converged circular preimage of a slit domain.
#[derive(Debug, Clone)]
pub struct Preimage {
    pub domain: CircularDomain,
    pub map: ConformalMap,
    /// Stopping criterion of the returned domain.
    pub criterion: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

impl Preimage {
    /// `max_j (|w'_j - w_j| + |L'_j - L|)` for the returned map.
    pub fn slit_fit_residual(&self, target: &SlitDomain) -> f64 {
        slit_fit_residual(&self.map, target)
    }
}

pub fn slit_fit_residual(map: &ConformalMap, target: &SlitDomain) -> f64 {
    let img = slit_image(map);
    (0..target.m)
        .map(|j| (img.centers[j] - target.centers[j]).abs() + (img.lengths[j] - target.length).abs())
        .fold(0.0, f64::max)
}

fn criterion(img: &SlitImage, target: &SlitDomain) -> f64 {
    let m = target.m;
    let total: f64 = (0..m)
        .map(|j| (img.centers[j] - target.centers[j]).abs() + (img.lengths[j] - target.length).abs())
        .sum();
    total / (2 * m) as f64
}

/// Iterates circle centers and radii until the image slits match `target`.
///
/// Centers move by the center mismatch, radii by a quarter of the length
/// mismatch (an isolated circle of radius `r` maps to a slit of length `4r`).
pub fn find_preimage(target: &SlitDomain, cfg: &PreimageConfig) -> Result<Preimage> {
    let mut domain = initial_circles(target);
    let mut history = Vec::new();
    for i in 1..=cfg.max_iter {
        let map = map_from_circular(&domain, &cfg.solve)?;
        let img = slit_image(&map);
        let crit = criterion(&img, target);
        history.push(crit);
        log::debug!("preimage iteration {i}: criterion {crit:.3e}");
        if crit < cfg.eps {
            return Ok(Preimage {
                domain,
                map,
                criterion: crit,
                iterations: i,
                history,
            });
        }
        let centers: Vec<f64> = (0..target.m)
            .map(|j| domain.centers[j] - (img.centers[j] - target.centers[j]))
            .collect();
        let radii: Vec<f64> = (0..target.m)
            .map(|j| domain.radii[j] - 0.25 * (img.lengths[j] - target.length))
            .collect();
        domain = CircularDomain::new(centers, radii)?;
    }
    Err(Error::MapNonConvergence {
        iterations: cfg.max_iter,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Real `ζ0` with `F(ζ0) = z0`, for `z0` on the real axis off every slit.
pub fn invert_on_axis(map: &ConformalMap, z0: f64) -> Result<f64> {
    let d = map.domain();
    let m = d.m();
    if z0 == 0.0 && d.mirror_defect() < 1e-12 && m.is_multiple_of(2) {
        // F is odd on a mirror-symmetric domain
        return Ok(0.0);
    }
    let img = slit_image(map);
    let left_end = |j: usize| img.centers[j] - 0.5 * img.lengths[j];
    let right_end = |j: usize| img.centers[j] + 0.5 * img.lengths[j];
    if (0..m).any(|j| left_end(j) <= z0 && z0 <= right_end(j)) {
        return Err(Error::Bracket(format!("{z0} lies on an image slit")));
    }
    // index of the first circle to the right of the preimage
    let idx = (0..m).find(|&j| z0 < left_end(j)).unwrap_or(m);
    let real_f = |x: f64| -> Result<f64> { Ok(map.eval(Complex64::new(x, 0.0))?.re) };
    let guard = 1.5 * DEFAULT_GUARD;
    let upper = if idx < m { Some(d.centers[idx] - d.radii[idx] * (1.0 + guard)) } else { None };
    let lower = if idx > 0 { Some(d.centers[idx - 1] + d.radii[idx - 1] * (1.0 + guard)) } else { None };

    let mut b = match upper {
        Some(b) => b,
        None => {
            let mut b = z0.max(lower.unwrap()) + 1.0;
            let mut step = 1.0;
            while real_f(b)? < z0 {
                step *= 2.0;
                b += step;
                if step > 1e8 {
                    return Err(Error::Bracket("no upper bracket".into()));
                }
            }
            b
        }
    };
    let mut a = match lower {
        Some(a) => a,
        None => {
            let mut a = z0.min(b) - 1.0;
            let mut step = 1.0;
            while real_f(a)? > z0 {
                step *= 2.0;
                a -= step;
                if step > 1e8 {
                    return Err(Error::Bracket("no lower bracket".into()));
                }
            }
            a
        }
    };
    let (mut fa, mut fb) = (real_f(a)? - z0, real_f(b)? - z0);
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::Bracket(format!(
            "F - z0 has no sign change on [{a}, {b}] ({fa:.3e}, {fb:.3e})"
        )));
    }
    // Illinois regula falsi with a bisection safeguard.
    let mut side = 0i8;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let mut cand = (a * fb - b * fa) / (fb - fa);
        if !(cand > a && cand < b) {
            cand = 0.5 * (a + b);
        }
        x = cand;
        let fx = real_f(x)? - z0;
        if fx.abs() <= 1e-15 || (b - a) < 1e-15 * (1.0 + x.abs()) {
            break;
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let residual = (map.eval(Complex64::new(x, 0.0))? - z0).norm();
    if residual > 1e-12 {
        return Err(Error::Bracket(format!("root residual {residual:.3e} above 1e-12")));
    }
    Ok(x)
}

/// Cached converged preimage keyed by `(level, n, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageSnapshot {
    pub level: Option<u32>,
    pub n: usize,
    pub eps: f64,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    pub criterion: f64,
    pub iterations: usize,
}

impl PreimageSnapshot {
    pub fn from_preimage(p: &Preimage, level: Option<u32>, cfg: &PreimageConfig) -> Self {
        Self {
            level,
            n: cfg.solve.n,
            eps: cfg.eps,
            centers: p.domain.centers.clone(),
            radii: p.domain.radii.clone(),
            criterion: p.criterion,
            iterations: p.iterations,
        }
    }

    pub fn matches(&self, level: Option<u32>, cfg: &PreimageConfig) -> bool {
        self.level == level && self.n == cfg.solve.n && self.eps == cfg.eps
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))
    }

    /// Re-solves the map on the cached circles, skipping the iteration.
    pub fn restore(&self, cfg: &PreimageConfig) -> Result<Preimage> {
        let domain = CircularDomain::new(self.centers.clone(), self.radii.clone())?;
        let map = map_from_circular(&domain, &cfg.solve)?;
        Ok(Preimage {
            domain,
            map,
            criterion: self.criterion,
            iterations: self.iterations,
            history: vec![],
        })
    }
}
