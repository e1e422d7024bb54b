//! Independent reference solvers: the closed-form single-slit h-function and
//! a least-squares collocation solver for Dirichlet problems outside a few
//! disjoint disks.
//!
//! The collocation basis on circle `j` uses `w_j = r_j / (ζ - c_j)`: the real
//! and imaginary parts of `w_j^p`, `p = 1..P`, plus differences of
//! `log|ζ - c_j|` (so the log coefficients sum to zero) and a constant.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bie::CircularDomain;
use crate::error::{Error, Result};
use crate::geometry::BasepointMode;
use crate::hfun::{psi_field, MobiusFrame};

pub const DEFAULT_ORDER: usize = 24;
pub const DEFAULT_OVERSAMPLE: usize = 4;
/// Largest accepted boundary residual.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_CIRCLES: usize = 4;

/// `(2/π) arctan(√2 √((r-1)/(2-r)))`, clamped to 0 below `r = 1` and 1 above `r = 2`.
pub fn h_exact_single_slit(r: f64) -> f64 {
    if r <= 1.0 {
        0.0
    } else if r >= 2.0 {
        1.0
    } else {
        (2.0 / PI) * (2f64.sqrt() * ((r - 1.0) / (2.0 - r)).sqrt()).atan()
    }
}

/// A fitted harmonic function outside the disks.
#[derive(Debug, Clone)]
pub struct CollocationSolution {
    domain: CircularDomain,
    order: usize,
    coef: Vec<f64>,
    /// Largest boundary mismatch over collocation and midpoint checks.
    pub residual: f64,
}

fn basis_len(m: usize, order: usize) -> usize {
    1 + (m - 1) + 2 * order * m
}

fn basis_row(domain: &CircularDomain, order: usize, z: Complex64, row: &mut [f64]) {
    let m = domain.m();
    row[0] = 1.0;
    let last = (z - domain.center(m - 1)).norm().ln();
    for j in 0..m - 1 {
        row[1 + j] = (z - domain.center(j)).norm().ln() - last;
    }
    let mut at = m;
    for j in 0..m {
        let w = domain.radii[j] / (z - domain.center(j));
        let mut wp = w;
        for _ in 0..order {
            row[at] = wp.re;
            row[at + 1] = wp.im;
            at += 2;
            wp *= w;
        }
    }
}

impl CollocationSolution {
    pub fn eval(&self, z: Complex64) -> f64 {
        let mut row = vec![0.0; self.coef.len()];
        basis_row(&self.domain, self.order, z, &mut row);
        row.iter().zip(&self.coef).map(|(a, b)| a * b).sum()
    }

    /// Coefficients of `log|ζ - c_j|`; they sum to zero by construction.
    pub fn log_coefficients(&self) -> Vec<f64> {
        let m = self.domain.m();
        let mut out: Vec<f64> = self.coef[1..m].to_vec();
        out.push(-out.iter().sum::<f64>());
        out
    }
}

/// Least-squares fit of the basis to `data(j, ζ)` on every circle.
pub fn collocation_solve(
    domain: &CircularDomain,
    data: impl Fn(usize, Complex64) -> f64,
    order: usize,
    oversample: usize,
) -> Result<CollocationSolution> {
    let m = domain.m();
    if m == 0 || m > MAX_CIRCLES {
        return Err(Error::Domain(format!("collocation oracle handles 1..={MAX_CIRCLES} circles, got {m}")));
    }
    let per = oversample.max(2) * order.max(1);
    let cols = basis_len(m, order);
    let point = |j: usize, i: usize, shift: f64| {
        domain.center(j) + Complex64::from_polar(domain.radii[j], 2.0 * PI * (i as f64 + shift) / per as f64)
    };
    let mut a = DMatrix::<f64>::zeros(m * per, cols);
    let mut b = DVector::<f64>::zeros(m * per);
    let mut row = vec![0.0; cols];
    for j in 0..m {
        for i in 0..per {
            let z = point(j, i, 0.5);
            basis_row(domain, order, z, &mut row);
            for (c, v) in row.iter().enumerate() {
                a[(j * per + i, c)] = *v;
            }
            b[j * per + i] = data(j, z);
        }
    }
    // equilibrate columns before the SVD
    let scale: Vec<f64> = (0..cols)
        .map(|c| {
            let n = a.column(c).norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    for (c, s) in scale.iter().enumerate() {
        a.column_mut(c).scale_mut(*s);
    }
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-14 * svd.singular_values.max())
        .map_err(|e| Error::Singular(e.to_string()))?;
    let coef: Vec<f64> = x.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let mut sol = CollocationSolution {
        domain: domain.clone(),
        order,
        coef,
        residual: 0.0,
    };
    let mut residual: f64 = 0.0;
    for j in 0..m {
        for i in 0..per {
            for shift in [0.5, 0.0] {
                let z = point(j, i, shift);
                residual = residual.max((sol.eval(z) - data(j, z)).abs());
            }
        }
    }
    sol.residual = residual;
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::OracleAccuracy {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(sol)
}

/// Exact solution of the discontinuous capture problem: the Möbius fields
/// plus a collocation solve of the continuous remainder.
#[derive(Debug, Clone)]
pub struct MixedArcSolution {
    fields: Vec<MobiusFrame>,
    pub remainder: CollocationSolution,
}

impl MixedArcSolution {
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let mut u = self.remainder.eval(z);
        for f in &self.fields {
            u += psi_field(z, f)?;
        }
        Ok(u)
    }
}

/// `U` for the frame on circle `frame.k`: data 1 on the captured arc and on
/// every circle nearer the basepoint, 0 elsewhere. In centered mode the
/// mirror circle `m-1-k` carries the reflected arc.
pub fn mixed_arc_solve(domain: &CircularDomain, frame: &MobiusFrame, mode: BasepointMode, order: usize) -> Result<MixedArcSolution> {
    let m = domain.m();
    if m > 2 {
        return Err(Error::Domain(format!("mixed-arc oracle handles at most 2 circles, got {m}")));
    }
    let k = frame.k;
    let (fields, captured): (Vec<MobiusFrame>, Vec<bool>) = match mode {
        BasepointMode::LeftExterior => (vec![*frame], (0..m).map(|j| j < k).collect()),
        BasepointMode::Center => {
            let mirror = m - 1 - k;
            let lo = mirror.min(k);
            let hi = mirror.max(k);
            (
                vec![
                    *frame,
                    MobiusFrame {
                        k: mirror,
                        xi: -frame.xi,
                        xi1: -frame.xi1,
                    },
                ],
                (0..m).map(|j| j > lo && j < hi).collect(),
            )
        }
    };
    let data = |j: usize, z: Complex64| -> f64 {
        let base = if captured[j] { 1.0 } else { 0.0 };
        base - fields
            .iter()
            .filter(|f| f.k != j)
            .map(|f| psi_field(z, f).unwrap_or(f64::NAN))
            .sum::<f64>()
    };
    let remainder = collocation_solve(domain, data, order, DEFAULT_OVERSAMPLE)?;
    Ok(MixedArcSolution { fields, remainder })
}
