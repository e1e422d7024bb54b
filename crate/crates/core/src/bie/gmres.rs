//! Unrestarted GMRES for real operators.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A square real linear map `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let dot = |i: usize| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        if n >= 256 {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = dot(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = dot(i));
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    /// Relative residual target `‖b - Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Krylov dimension cap; there is no restart.
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual estimate after each iteration (entry 0 is the start).
    pub history: Vec<f64>,
    /// Recomputed `‖b - Ax‖ / ‖b‖`.
    pub true_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` from `x = 0`.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], cfg: &GmresConfig) -> Result<GmresOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            history: vec![0.0],
            true_residual: 0.0,
        });
    }
    let kmax = cfg.max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    basis.push(b.iter().map(|v| v / bnorm).collect());
    // Columns of the Hessenberg matrix after Givens rotations.
    let mut hess: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut cs: Vec<f64> = Vec::with_capacity(kmax);
    let mut sn: Vec<f64> = Vec::with_capacity(kmax);
    let mut g = vec![0.0; kmax + 1];
    g[0] = bnorm;
    let mut history = vec![1.0];
    let mut w = vec![0.0; n];
    let mut k = 0;
    let mut converged = false;

    while k < kmax {
        op.apply(&basis[k], &mut w);
        let mut h = vec![0.0; k + 2];
        // Modified Gram-Schmidt, applied twice.
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[i] += c;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let hn = norm(&w);
        h[k + 1] = hn;
        for i in 0..k {
            let t = cs[i] * h[i] + sn[i] * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let denom = h[k].hypot(h[k + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, h[k + 1] / denom) };
        cs.push(c);
        sn.push(s);
        h[k] = denom;
        h[k + 1] = 0.0;
        g[k + 1] = -s * g[k];
        g[k] *= c;
        hess.push(h);
        k += 1;
        let rel = g[k].abs() / bnorm;
        history.push(rel);
        if rel <= cfg.tol || hn == 0.0 {
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v / hn).collect());
    }

    // Back substitution on the triangular system.
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in i + 1..k {
            acc -= hess[j][i] * y[j];
        }
        y[i] = acc / hess[i][i];
    }
    let mut x = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        x.iter_mut().zip(&basis[j]).for_each(|(xi, vi)| *xi += yj * vi);
    }
    op.apply(&x, &mut w);
    let true_residual = norm(&w.iter().zip(b).map(|(a, b)| b - a).collect::<Vec<_>>()) / bnorm;

    if !converged {
        return Err(Error::SolverNonConvergence {
            iterations: k,
            last: *history.last().unwrap(),
            history,
        });
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        history,
        true_residual,
    })
}
