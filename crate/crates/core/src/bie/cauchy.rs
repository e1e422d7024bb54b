//! Trapezoidal Cauchy integral for functions analytic in the exterior domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::BoundaryGrid;
use crate::error::{Error, Result};

/// Minimum distance from a circle, in units of its radius, for interior evaluation.
///
/// The trapezoidal error on circle `j` behaves like `(r_j / |ζ - c_j|)^n`.
pub const DEFAULT_GUARD: f64 = 1.0;

/// Quadrature weights `w_q` with `f(ζ) ≈ Σ_q w_q f(η_q)`.
///
/// The boundary is traversed clockwise so the exterior lies on the left and
/// `f(∞) = 0` leaves no contribution from infinity.
pub fn cauchy_weights(grid: &BoundaryGrid, zeta: Complex64, guard: f64) -> Result<Vec<Complex64>> {
    let dom = grid.domain();
    for j in 0..grid.m() {
        let dist = dom.distance_to(j, zeta);
        let threshold = guard * dom.radii[j];
        if !(dist >= threshold) {
            return Err(Error::NearBoundary {
                point: format!("{zeta}"),
                circle: j,
                distance: dist,
                threshold,
            });
        }
    }
    let scale = Complex64::new(0.0, -grid.weight() / (2.0 * PI));
    Ok(grid
        .points()
        .iter()
        .zip(grid.tangents())
        .map(|(&eta, &d)| scale * d / (eta - zeta))
        .collect())
}

/// `f(ζ)` from boundary values of `f`, rejecting points inside the default guard.
pub fn cauchy_eval(grid: &BoundaryGrid, values: &[Complex64], zeta: Complex64) -> Result<Complex64> {
    cauchy_eval_guarded(grid, values, zeta, DEFAULT_GUARD)
}

pub fn cauchy_eval_guarded(
    grid: &BoundaryGrid,
    values: &[Complex64],
    zeta: Complex64,
    guard: f64,
) -> Result<Complex64> {
    if values.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let w = cauchy_weights(grid, zeta, guard)?;
    Ok(w.iter().zip(values).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::grid::{discretize, CircularDomain};
    use approx::assert_abs_diff_eq;

    fn unit(n: usize) -> BoundaryGrid {
        discretize(&CircularDomain::new(vec![0.0], vec![1.0]).unwrap(), n).unwrap()
    }

    #[test]
    fn reciprocal_powers_on_unit_circle() {
        // error is (1/|ζ|)^n, so n = 64 for machine precision at ζ = 2
        let g = unit(64);
        let f1 = g.sample(|z| 1.0 / z);
        let v = cauchy_eval(&g, &f1, Complex64::new(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        let f2 = g.sample(|z| 1.0 / (z * z));
        let v = cauchy_eval(&g, &f2, Complex64::new(-3.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = unit(8);
        let v = cauchy_eval(&g, &[Complex64::new(0.0, 0.0); 8], Complex64::new(5.0, 1.0)).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn multipole_combinations_reproduced() {
        let d = CircularDomain::new(vec![-0.6, 0.1, 0.8], vec![0.2, 0.15, 0.25]).unwrap();
        let g = discretize(&d, 64).unwrap();
        let coeffs = [(0.7, -0.2), (1.3, 0.4), (-0.5, 0.9)];
        let f = |z: Complex64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &(a, b)) in coeffs.iter().enumerate() {
                let u = 1.0 / (z - d.center(j));
                acc += Complex64::new(a, b) * u + Complex64::new(b, a) * u * u + a * u * u * u;
            }
            acc
        };
        let vals = g.sample(f);
        for z in [
            Complex64::new(0.0, 0.9),
            Complex64::new(-1.5, -0.3),
            Complex64::new(0.45, 0.5),
            Complex64::new(2.0, 0.0),
        ] {
            let got = cauchy_eval(&g, &vals, z).unwrap();
            assert!((got - f(z)).norm() < 1e-10, "{z}: {}", (got - f(z)).norm());
        }
    }

    #[test]
    fn near_boundary_rejected() {
        let g = unit(16);
        let vals = g.sample(|z| 1.0 / z);
        match cauchy_eval(&g, &vals, Complex64::new(1.5, 0.0)) {
            Err(Error::NearBoundary { circle: 0, .. }) => {}
            other => panic!("expected near-boundary error, got {other:?}"),
        }
        assert!(cauchy_eval_guarded(&g, &vals, Complex64::new(1.5, 0.0), 0.25).is_ok());
    }
}
