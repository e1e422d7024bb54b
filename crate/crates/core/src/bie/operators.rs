//! Nyström discretization of the Neumann kernel `N` and its singular companion `M`.
//!
//! For boundary nodes `p` (collocation) and `q` (quadrature) the complex kernel
//! `K(p,q) = η'(t_q) / (π (η(t_q) - η(s_p)))` gives `N = Im K` and `M = Re K`.
//! `N` is continuous; its diagonal is the limit `Im(η''/η') / 2π`.
//! On a single circle `M` carries the cotangent singularity, which is applied
//! spectrally; the smooth remainder goes through the trapezoidal rule.

use std::f64::consts::PI;
use std::ops::Deref;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmres::{gmres, GmresConfig, LinearOperator};
use super::grid::BoundaryGrid;
use crate::error::{Error, Result};

/// Assemble the complex kernel only up to this many unknowns (memory bound).
pub const ASSEMBLE_LIMIT: usize = 2048;

/// Real values at all `m·n` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    n: usize,
    values: Vec<f64>,
}

impl Density {
    pub fn new(n: usize, values: Vec<f64>) -> Self {
        debug_assert!(n > 0 && values.len().is_multiple_of(n));
        Self { n, values }
    }

    pub fn zeros(grid: &BoundaryGrid) -> Self {
        Self::new(grid.n(), vec![0.0; grid.len()])
    }

    /// Samples `f(η)` on every node.
    pub fn from_fn(grid: &BoundaryGrid, f: impl Fn(Complex64) -> f64) -> Self {
        Self::new(grid.n(), grid.sample(f))
    }

    /// Values on circle `j`.
    pub fn circle(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for Density {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// One real constant per circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant(pub Vec<f64>);

impl Deref for PiecewiseConstant {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `ν` collapsed per circle, with the node spread it hid.
#[derive(Debug, Clone)]
pub struct NuCollapse {
    pub nu: PiecewiseConstant,
    /// `max - min` of the nodal values on each circle.
    pub spread: Vec<f64>,
    /// Whether any spread exceeded the tolerance handed to [`nu_from`].
    pub warning: bool,
}

/// Default ceiling on the per-circle spread of `ν`.
pub const NU_SPREAD_TOL: f64 = 1e-8;

/// Discrete `N` and `M` on one grid.
pub struct LayerOperators<'g> {
    grid: &'g BoundaryGrid,
    /// Row-major `K(p,q)·w`, with the `N` diagonal limit stored in `Im` on `p == q`.
    kernel: Option<Vec<Complex64>>,
}

impl<'g> LayerOperators<'g> {
    /// Assembles the kernel when it fits under [`ASSEMBLE_LIMIT`].
    pub fn new(grid: &'g BoundaryGrid) -> Self {
        let mut ops = Self::matrix_free(grid);
        if grid.len() <= ASSEMBLE_LIMIT {
            let len = grid.len();
            let mut k = vec![Complex64::new(0.0, 0.0); len * len];
            k.par_chunks_mut(len).enumerate().for_each(|(p, row)| {
                for (q, v) in row.iter_mut().enumerate() {
                    *v = ops.entry(p, q);
                }
            });
            ops.kernel = Some(k);
        }
        ops
    }

    pub fn matrix_free(grid: &'g BoundaryGrid) -> Self {
        Self { grid, kernel: None }
    }

    pub fn grid(&self) -> &BoundaryGrid {
        self.grid
    }

    fn entry(&self, p: usize, q: usize) -> Complex64 {
        let w = self.grid.weight();
        if p == q {
            let d2 = self.grid.second_derivative(p);
            let d1 = self.grid.tangents()[p];
            Complex64::new(0.0, w * (d2 / d1).im / (2.0 * PI))
        } else {
            let pts = self.grid.points();
            w * self.grid.tangents()[q] / (PI * (pts[q] - pts[p]))
        }
    }

    #[inline]
    fn kernel_at(&self, p: usize, q: usize) -> Complex64 {
        match &self.kernel {
            Some(k) => k[p * self.grid.len() + q],
            None => self.entry(p, q),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn n_row(&self, p: usize, x: &[f64]) -> f64 {
        let len = self.grid.len();
        match &self.kernel {
            Some(k) => k[p * len..(p + 1) * len]
                .iter()
                .zip(x)
                .map(|(kv, xv)| kv.im * xv)
                .sum(),
            None => (0..len).map(|q| self.entry(p, q).im * x[q]).sum(),
        }
    }

    /// `N x` by the trapezoidal rule.
    pub fn apply_n(&self, x: &[f64]) -> Result<Density> {
        self.check(x)?;
        let out = (0..self.grid.len())
            .into_par_iter()
            .map(|p| self.n_row(p, x))
            .collect();
        Ok(Density::new(self.grid.n(), out))
    }

    /// `x - N x`.
    pub fn apply_i_minus_n(&self, x: &[f64]) -> Result<Density> {
        let nx = self.apply_n(x)?;
        let v = x.iter().zip(nx.values()).map(|(a, b)| a - b).collect();
        Ok(Density::new(self.grid.n(), v))
    }

    /// `M x`: spectral conjugation plus smooth remainder on each circle,
    /// trapezoidal rule between circles.
    pub fn apply_m(&self, x: &[f64]) -> Result<Density> {
        self.check(x)?;
        let grid = self.grid;
        let n = grid.n();
        let len = grid.len();
        let w = grid.weight();
        let nodes = grid.nodes();

        let mut out = vec![0.0; len];
        out.par_chunks_mut(n).enumerate().for_each(|(j, block)| {
            let range = grid.range(j);
            grid.spectral().conjugate(&x[range.clone()], block);
            for (i, o) in block.iter_mut().enumerate() {
                let p = range.start + i;
                // the singular part of M on a circle is minus the conjugate function
                let mut acc = -*o;
                for q in 0..len {
                    let cq = q / n;
                    let kv = self.kernel_at(p, q);
                    if cq != j {
                        acc += kv.re * x[q];
                    } else if q == p {
                        let d2 = grid.second_derivative(p);
                        let d1 = grid.tangents()[p];
                        acc += w * (d2 / d1).re / (2.0 * PI) * x[q];
                    } else {
                        let iq = q - range.start;
                        let cot = 1.0 / ((nodes[iq] - nodes[i]) / 2.0).tan();
                        acc += (kv.re - w * cot / (2.0 * PI)) * x[q];
                    }
                }
                *o = acc;
            }
        });
        Ok(Density::new(n, out))
    }
}

impl LinearOperator for LayerOperators<'_> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Applies `I - N`.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let rows = |p: usize| x[p] - self.n_row(p, x);
        if self.grid.len() >= 256 {
            y.par_iter_mut().enumerate().for_each(|(p, v)| *v = rows(p));
        } else {
            y.iter_mut().enumerate().for_each(|(p, v)| *v = rows(p));
        }
    }
}

/// `N x` on `grid` (matrix-free).
pub fn apply_n(grid: &BoundaryGrid, x: &[f64]) -> Result<Density> {
    LayerOperators::matrix_free(grid).apply_n(x)
}

/// `M x` on `grid` (matrix-free).
pub fn apply_m(grid: &BoundaryGrid, x: &[f64]) -> Result<Density> {
    LayerOperators::matrix_free(grid).apply_m(x)
}

/// Solution of `(I - N) μ = rhs` with solver diagnostics.
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub mu: Density,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub true_residual: f64,
}

impl LayerOperators<'_> {
    pub fn solve(&self, rhs: &[f64], cfg: &GmresConfig) -> Result<NeumannSolution> {
        self.check(rhs)?;
        let out = gmres(self, rhs, cfg)?;
        Ok(NeumannSolution {
            mu: Density::new(self.grid.n(), out.x),
            iterations: out.iterations,
            history: out.history,
            true_residual: out.true_residual,
        })
    }

    /// Solves `(I - N) μ = -M γ` and forms `ν = (M μ - (I - N) γ) / 2`.
    pub fn solve_for(&self, gamma: &[f64], cfg: &GmresConfig, spread_tol: f64) -> Result<(NeumannSolution, NuCollapse)> {
        let rhs: Vec<f64> = self.apply_m(gamma)?.iter().map(|v| -v).collect();
        let sol = self.solve(&rhs, cfg)?;
        let nu = self.nu_from(&sol.mu, gamma, spread_tol)?;
        Ok((sol, nu))
    }

    pub fn nu_from(&self, mu: &[f64], gamma: &[f64], spread_tol: f64) -> Result<NuCollapse> {
        let m_mu = self.apply_m(mu)?;
        let a_gamma = self.apply_i_minus_n(gamma)?;
        let nodal: Vec<f64> = m_mu
            .iter()
            .zip(a_gamma.iter())
            .map(|(a, b)| 0.5 * (a - b))
            .collect();
        let n = self.grid.n();
        let mut nu = Vec::with_capacity(self.grid.m());
        let mut spread = Vec::with_capacity(self.grid.m());
        for block in nodal.chunks(n) {
            let mean = block.iter().sum::<f64>() / n as f64;
            let (lo, hi) = block
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            nu.push(mean);
            spread.push(hi - lo);
        }
        let worst = spread.iter().cloned().fold(0.0, f64::max);
        let warning = worst > spread_tol;
        if warning {
            log::debug!("nu spread {worst:.3e} exceeds {spread_tol:.1e}; consider a finer grid");
        }
        Ok(NuCollapse {
            nu: PiecewiseConstant(nu),
            spread,
            warning,
        })
    }
}

/// Solves `(I - N) μ = rhs` by unrestarted GMRES.
pub fn solve_neumann(grid: &BoundaryGrid, rhs: &[f64], cfg: &GmresConfig) -> Result<NeumannSolution> {
    LayerOperators::new(grid).solve(rhs, cfg)
}

/// Piecewise constant `ν = (M μ - (I - N) γ) / 2`, collapsed by the per-circle mean.
pub fn nu_from(grid: &BoundaryGrid, mu: &[f64], gamma: &[f64], spread_tol: f64) -> Result<NuCollapse> {
    LayerOperators::matrix_free(grid).nu_from(mu, gamma, spread_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::grid::{discretize, CircularDomain};
    use approx::assert_abs_diff_eq;

    fn one_circle(n: usize) -> BoundaryGrid {
        discretize(&CircularDomain::new(vec![0.0], vec![1.0]).unwrap(), n).unwrap()
    }

    fn two_circles(n: usize) -> BoundaryGrid {
        discretize(&CircularDomain::new(vec![-0.5, 0.5], vec![0.2, 0.2]).unwrap(), n).unwrap()
    }

    /// Brute-force dense matrix of N straight from the kernel definition.
    fn dense_n(grid: &BoundaryGrid) -> Vec<Vec<f64>> {
        let len = grid.len();
        let pts = grid.points();
        let tan = grid.tangents();
        let w = grid.weight();
        (0..len)
            .map(|p| {
                (0..len)
                    .map(|q| {
                        if p == q {
                            // circle limit: Im(η''/η')/(2π) = -1/(2π)
                            -w / (2.0 * PI)
                        } else {
                            w * (tan[q] / (pts[q] - pts[p])).im / PI
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn n_row_sums_constant_on_one_circle() {
        let g = one_circle(32);
        let dense = dense_n(&g);
        let sums: Vec<f64> = dense.iter().map(|r| r.iter().sum()).collect();
        for s in &sums {
            assert_abs_diff_eq!(*s, sums[0], epsilon = 1e-12);
        }
        // the kernel integrates to -1 with clockwise orientation
        let nx = apply_n(&g, &vec![1.0; 32]).unwrap();
        assert!(nx.iter().all(|v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn n_matches_direct_kernel_between_circles() {
        let g = two_circles(8);
        let dense = dense_n(&g);
        for q in [0, 5, 11, 15] {
            let mut e = vec![0.0; g.len()];
            e[q] = 1.0;
            let col = apply_n(&g, &e).unwrap();
            for p in 0..g.len() {
                assert_abs_diff_eq!(col[p], dense[p][q], epsilon = 1e-14);
            }
        }
        // the assembled and matrix-free paths agree
        let x: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = LayerOperators::new(&g).apply_n(&x).unwrap();
        let b = apply_n(&g, &x).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn n_preserves_reflection_symmetry() {
        // circles symmetric about the real axis; a density even in t stays even
        let g = two_circles(8);
        let n = g.n();
        let x: Vec<f64> = (0..g.len())
            .map(|p| {
                let t = g.nodes()[p % n];
                1.0 + t.cos() + 0.3 * (2.0 * t).cos() + (p / n) as f64
            })
            .collect();
        let y = apply_n(&g, &x).unwrap();
        for j in 0..2 {
            let b = y.circle(j);
            for i in 1..n {
                assert_abs_diff_eq!(b[i], b[n - i], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn m_annihilates_constants() {
        let g = one_circle(64);
        let mx = apply_m(&g, &vec![3.0; 64]).unwrap();
        assert!(mx.iter().all(|v| v.abs() < 1e-12));
        let g2 = discretize(
            &CircularDomain::new(vec![-1.0, 0.1, 0.9], vec![0.3, 0.2, 0.25]).unwrap(),
            32,
        )
        .unwrap();
        let mx = apply_m(&g2, &vec![1.0; g2.len()]).unwrap();
        assert!(mx.iter().all(|v| v.abs() < 1e-12), "{:?}", mx.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs())));
    }

    #[test]
    fn m_on_cosine_is_minus_conjugate() {
        // independent oracle: explicit FFT Hilbert transform
        let g = one_circle(32);
        let x: Vec<f64> = g.nodes().iter().map(|t| t.cos() + 0.5 * (4.0 * t).sin()).collect();
        let mx = apply_m(&g, &x).unwrap();
        let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
            x.iter().map(|&v| rustfft::num_complex::Complex::new(v, 0.0)).collect();
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_forward(32).process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            let sgn = if k == 0 || k == 16 { 0.0 } else if k < 16 { 1.0 } else { -1.0 };
            *c *= rustfft::num_complex::Complex::new(0.0, sgn);
        }
        planner.plan_fft_inverse(32).process(&mut buf);
        for (a, b) in mx.iter().zip(&buf) {
            assert_abs_diff_eq!(*a, b.re / 32.0, epsilon = 1e-13);
        }
        // and in closed form: M cos = -sin, M sin(4t) = cos(4t)
        for (i, t) in g.nodes().iter().enumerate() {
            assert_abs_diff_eq!(mx[i], -t.sin() + 0.5 * (4.0 * t).cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn m_offdiagonal_block_is_direct_quadrature() {
        let g = two_circles(16);
        let mut x = vec![0.0; g.len()];
        for q in 16..32 {
            x[q] = (q as f64).sqrt();
        }
        let mx = apply_m(&g, &x).unwrap();
        let pts = g.points();
        let tan = g.tangents();
        for p in 0..16 {
            let direct: f64 = (16..32)
                .map(|q| g.weight() * (tan[q] / (pts[q] - pts[p])).re / PI * x[q])
                .sum();
            assert_abs_diff_eq!(mx[p], direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let g = two_circles(16);
        let sol = solve_neumann(&g, &vec![0.0; 32], &GmresConfig::default()).unwrap();
        assert!(sol.mu.iter().all(|v| *v == 0.0));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn single_circle_density_is_closed_form() {
        // exterior of |ζ| = r maps by ζ + r²/ζ; then γ = -r sin t, μ = r cos t, ν = 0
        let r = 0.5;
        let g = discretize(&CircularDomain::new(vec![0.0], vec![r]).unwrap(), 16).unwrap();
        let gamma = Density::from_fn(&g, |z| z.im);
        let ops = LayerOperators::new(&g);
        let (sol, nu) = ops.solve_for(&gamma, &GmresConfig::default(), NU_SPREAD_TOL).unwrap();
        for (i, t) in g.nodes().iter().enumerate() {
            assert_abs_diff_eq!(sol.mu[i], r * t.cos(), epsilon = 1e-13);
        }
        assert_abs_diff_eq!(nu.nu[0], 0.0, epsilon = 1e-13);
        assert!(sol.true_residual <= 1e-13);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let g = one_circle(8);
        assert!(matches!(apply_n(&g, &[0.0; 7]), Err(Error::SizeMismatch { .. })));
        assert!(matches!(apply_m(&g, &[0.0; 9]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn zero_gamma_gives_zero_nu() {
        let g = two_circles(16);
        let ops = LayerOperators::new(&g);
        let (sol, nu) = ops.solve_for(&vec![0.0; 32], &GmresConfig::default(), NU_SPREAD_TOL).unwrap();
        assert!(sol.mu.iter().all(|v| *v == 0.0));
        assert!(nu.nu.iter().all(|v| *v == 0.0));
        assert!(!nu.warning);
    }
}
