//! Harmonic measures of the circles of a circular domain.
//!
//! For each circle `j`, `γ_j = log|η - c_j|` gives an analytic `A_j` with
//! boundary values `γ_j + ν_{·,j} + iμ_j` and `A_j(∞) = 0`. Then
//! `g_k = b_k + Σ_j a_kj (A_j(ζ) - log(ζ - c_j))` and `σ_k = Re g_k`, where
//! `(a_k, b_k)` solve `[ν 1; 1ᵀ 0] [a_k; b_k] = [e_k; 0]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bie::{cauchy_weights, BoundaryGrid, Density, GmresConfig, LayerOperators, DEFAULT_GUARD};
use crate::error::{Error, Result};

/// Solved harmonic-measure data for one circular domain.
#[derive(Debug, Clone)]
pub struct HarmonicData {
    m: usize,
    /// `a[k][j]`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// `nu[i][j]`: value of `ν` on circle `i` for the right-hand side `γ_j`.
    pub nu: Vec<Vec<f64>>,
    /// `mu[j]`: the density for `γ_j`.
    pub mu: Vec<Density>,
    /// Boundary values of `Σ_j a_kj A_j`, one vector per `k`.
    combined: Vec<Vec<Complex64>>,
    pub max_solver_iterations: usize,
    pub max_nu_spread: f64,
}

/// Debug dump of the small dense data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicDump {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub nu: Vec<Vec<f64>>,
}

pub fn build_harmonic_data(grid: &BoundaryGrid, gmres: &GmresConfig, spread_tol: f64) -> Result<HarmonicData> {
    let ops = LayerOperators::new(grid);
    build_with_operators(&ops, gmres, spread_tol)
}

pub fn build_with_operators(ops: &LayerOperators<'_>, gmres: &GmresConfig, spread_tol: f64) -> Result<HarmonicData> {
    let grid = ops.grid();
    let m = grid.m();
    let dom = grid.domain();
    let solved: Vec<_> = (0..m)
        .into_par_iter()
        .map(|j| {
            let c = dom.center(j);
            let gamma = Density::from_fn(grid, |z| (z - c).norm().ln());
            ops.solve_for(&gamma, gmres, spread_tol).map(|(sol, nu)| (gamma, sol, nu))
        })
        .collect::<Result<_>>()?;

    let mut nu = vec![vec![0.0; m]; m];
    for (j, (_, _, col)) in solved.iter().enumerate() {
        for i in 0..m {
            nu[i][j] = col.nu[i];
        }
    }
    let mut sys = DMatrix::<f64>::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            sys[(i, j)] = nu[i][j];
        }
        sys[(i, m)] = 1.0;
        sys[(m, i)] = 1.0;
    }
    let lu = sys.lu();
    let mut rhs = DMatrix::<f64>::zeros(m + 1, m);
    for k in 0..m {
        rhs[(k, k)] = 1.0;
    }
    let coef = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("harmonic-measure coefficient matrix".into()))?;
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite harmonic-measure coefficients".into()));
    }
    let a: Vec<Vec<f64>> = (0..m).map(|k| (0..m).map(|j| coef[(j, k)]).collect()).collect();
    let b: Vec<f64> = (0..m).map(|k| coef[(m, k)]).collect();

    let boundary: Vec<Vec<Complex64>> = solved
        .iter()
        .map(|(gamma, sol, col)| {
            (0..grid.len())
                .map(|p| Complex64::new(gamma[p] + col.nu[grid.circle_of(p)], sol.mu[p]))
                .collect()
        })
        .collect();
    let combined = a
        .par_iter()
        .map(|ak| {
            let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (j, bj) in boundary.iter().enumerate() {
                for (x, y) in acc.iter_mut().zip(bj) {
                    *x += ak[j] * y;
                }
            }
            acc
        })
        .collect();
    let max_solver_iterations = solved.iter().map(|s| s.1.iterations).max().unwrap_or(0);
    let max_nu_spread = solved
        .iter()
        .flat_map(|s| s.2.spread.iter().copied())
        .fold(0.0, f64::max);
    let mu = solved.into_iter().map(|s| s.1.mu).collect();
    Ok(HarmonicData {
        m,
        a,
        b,
        nu,
        mu,
        combined,
        max_solver_iterations,
        max_nu_spread,
    })
}

impl HarmonicData {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dump(&self) -> HarmonicDump {
        HarmonicDump {
            a: self.a.clone(),
            b: self.b.clone(),
            nu: self.nu.clone(),
        }
    }

    /// Largest `|Σ_j a_kj|` over `k`.
    pub fn max_row_sum(&self) -> f64 {
        self.a.iter().map(|r| r.iter().sum::<f64>().abs()).fold(0.0, f64::max)
    }
}

/// All `g_k(ζ)` at once.
pub fn g_at(grid: &BoundaryGrid, data: &HarmonicData, zeta: Complex64) -> Result<Vec<Complex64>> {
    let w = cauchy_weights(grid, zeta, DEFAULT_GUARD)?;
    let dom = grid.domain();
    let logs: Vec<Complex64> = (0..data.m).map(|j| (zeta - dom.center(j)).ln()).collect();
    Ok((0..data.m)
        .map(|k| {
            let f: Complex64 = w.iter().zip(&data.combined[k]).map(|(x, y)| x * y).sum();
            let l: Complex64 = data.a[k].iter().zip(&logs).map(|(a, lg)| a * lg).sum();
            data.b[k] + f - l
        })
        .collect())
}

/// All harmonic measures `σ_k(ζ)` at once.
pub fn sigma_at(grid: &BoundaryGrid, data: &HarmonicData, zeta: Complex64) -> Result<Vec<f64>> {
    let w = cauchy_weights(grid, zeta, DEFAULT_GUARD)?;
    let dom = grid.domain();
    let logs: Vec<f64> = (0..data.m).map(|j| (zeta - dom.center(j)).norm().ln()).collect();
    Ok((0..data.m)
        .map(|k| {
            let f: f64 = w.iter().zip(&data.combined[k]).map(|(x, y)| (x * y).re).sum();
            let l: f64 = data.a[k].iter().zip(&logs).map(|(a, lg)| a * lg).sum();
            data.b[k] + f - l
        })
        .collect())
}
