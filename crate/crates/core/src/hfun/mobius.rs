//! Möbius regularization of the discontinuous arc data on a partially
//! captured circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bie::CircularDomain;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Stand-in for the point at infinity.
pub const INFINITY: Complex64 = Complex64::new(f64::INFINITY, 0.0);

/// Arc data on circle `k`: the captured arc runs from `ξ̄` through `ξ1` to `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusFrame {
    pub k: usize,
    pub xi: Complex64,
    pub xi1: f64,
}

impl MobiusFrame {
    /// Frame on circle `k` with `ξ = c_k + r_k e^{iθ}`, `θ ∈ (0, π)`, and `ξ1` the
    /// left real point `c_k - r_k`.
    pub fn left_anchored(domain: &CircularDomain, k: usize, theta: f64) -> Self {
        let (c, r) = (domain.centers[k], domain.radii[k]);
        Self {
            k,
            xi: Complex64::new(c, 0.0) + Complex64::from_polar(r, theta),
            xi1: c - r,
        }
    }

    pub fn xi_bar(&self) -> Complex64 {
        self.xi.conj()
    }

    /// Polar angle of `ξ` about the center of circle `k`.
    pub fn theta(&self, domain: &CircularDomain) -> f64 {
        (self.xi - domain.center(self.k)).arg()
    }
}

/// The disk-valued Möbius map sending `ξ̄, ξ1, ξ` to `-i, 1, i`.
///
/// With `ξ` in the upper half-plane and `ξ1` the left real point of the
/// circle (or `ξ` lower and `ξ1` the right point) the exterior of the circle
/// lands inside the unit disk.
pub fn mobius_psi(zeta: Complex64, xi: Complex64, xi1: f64) -> Complex64 {
    let xb = xi.conj();
    let x1 = Complex64::new(xi1, 0.0);
    let num = (zeta - xi) * (x1 - xb) + I * (zeta - xb) * (x1 - xi);
    let den = (zeta - xb) * (x1 - xi) + I * (zeta - xi) * (x1 - xb);
    if den == Complex64::new(0.0, 0.0) {
        return INFINITY;
    }
    num / den
}

/// Unit disk onto the upper half-plane with `-i, 1, i` going to `∞, -1, 0`.
pub fn mobius_phi(w: Complex64) -> Complex64 {
    let den = I * w - 1.0;
    if den == Complex64::new(0.0, 0.0) {
        return INFINITY;
    }
    (w - I) / den
}

fn field(zeta: Complex64, xi: Complex64, xi1: f64) -> Result<f64> {
    let tol = 1e-14 * (1.0 + xi.norm());
    if (zeta - xi).norm() <= tol || (zeta - xi.conj()).norm() <= tol {
        return Err(Error::ArcEndpoint);
    }
    let a = mobius_phi(mobius_psi(zeta, xi, xi1)).arg();
    // the image is in the closed upper half-plane; fold rounding noise on the real axis
    Ok(if a >= 0.0 {
        a / PI
    } else if a < -0.5 * PI {
        1.0
    } else {
        0.0
    })
}

/// `Ψ(ζ)`: harmonic outside circle `k`, 1 on the arc through `ξ1`, 0 on the rest.
pub fn psi_field(zeta: Complex64, frame: &MobiusFrame) -> Result<f64> {
    field(zeta, frame.xi, frame.xi1)
}

/// `Φ(ζ)`: the mirrored field built from `(-ξ, -ξ1)`.
pub fn phi_field(zeta: Complex64, frame: &MobiusFrame) -> Result<f64> {
    field(zeta, -frame.xi, -frame.xi1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dom() -> CircularDomain {
        CircularDomain::new(vec![-0.4, 0.4], vec![0.1, 0.1]).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn psi_anchor_images() {
        let f = MobiusFrame::left_anchored(&dom(), 1, 1.1);
        assert!(close(mobius_psi(f.xi_bar(), f.xi, f.xi1), -I, 1e-13));
        assert!(close(mobius_psi(Complex64::new(f.xi1, 0.0), f.xi, f.xi1), Complex64::new(1.0, 0.0), 1e-13));
        assert!(close(mobius_psi(f.xi, f.xi, f.xi1), I, 1e-13));
    }

    #[test]
    fn phi_anchor_images() {
        assert!(close(mobius_phi(Complex64::new(1.0, 0.0)), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(mobius_phi(I), Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(mobius_phi(Complex64::new(0.0, 0.0)), I, 1e-15));
        assert!(mobius_phi(-I).re.is_infinite());
    }

    #[test]
    fn psi_pole_is_infinite() {
        let f = MobiusFrame::left_anchored(&dom(), 0, 0.7);
        // solve den = 0: ζ = (ξ̄(ξ1-ξ) + iξ(ξ1-ξ̄)) / ((ξ1-ξ) + i(ξ1-ξ̄))
        let (xi, xb, x1) = (f.xi, f.xi_bar(), Complex64::new(f.xi1, 0.0));
        let pole = (xb * (x1 - xi) + I * xi * (x1 - xb)) / ((x1 - xi) + I * (x1 - xb));
        let v = mobius_psi(pole, f.xi, f.xi1);
        assert!(v.norm() > 1e12 || v.re.is_infinite());
        assert!(dom().distance_to(0, pole) < 0.0, "pole lies inside the disk");
    }

    #[test]
    fn circle_goes_to_unit_circle_and_exterior_inside() {
        let d = dom();
        for theta in [0.2, 1.0, 2.9] {
            let f = MobiusFrame::left_anchored(&d, 1, theta);
            for i in 0..16 {
                let z = d.center(1) + Complex64::from_polar(0.1, 2.0 * PI * (i as f64 + 0.3) / 16.0);
                assert_abs_diff_eq!(mobius_psi(z, f.xi, f.xi1).norm(), 1.0, epsilon = 1e-12);
            }
            assert!(mobius_psi(Complex64::new(-1.5, 0.0), f.xi, f.xi1).norm() < 1.0);
        }
    }

    #[test]
    fn field_values_on_arcs() {
        let d = dom();
        let f = MobiusFrame::left_anchored(&d, 1, 1.2);
        // C' runs through the left point (angle π), C'' through the right point
        let on_c1 = d.center(1) + Complex64::from_polar(0.1, PI);
        let on_c2 = d.center(1) + Complex64::from_polar(0.1, 0.0);
        assert_abs_diff_eq!(psi_field(on_c1, &f).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(psi_field(on_c2, &f).unwrap(), 0.0, epsilon = 1e-10);
        let v = psi_field(Complex64::new(-1.5, 0.0), &f).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!(matches!(psi_field(f.xi, &f), Err(Error::ArcEndpoint)));
        assert!(matches!(psi_field(f.xi_bar(), &f), Err(Error::ArcEndpoint)));
    }

    #[test]
    fn mirrored_field_values() {
        let d = dom();
        let f = MobiusFrame::left_anchored(&d, 1, 0.8);
        let inner_left = d.center(0) + Complex64::from_polar(0.1, 0.0);
        let outer_left = d.center(0) + Complex64::from_polar(0.1, PI);
        assert_abs_diff_eq!(phi_field(inner_left, &f).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(phi_field(outer_left, &f).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn arc_value_is_harmonic_measure_for_isolated_circle() {
        // seen from infinity, Ψ is the normalized arc length of C'
        let d = dom();
        let theta = 1.3;
        let f = MobiusFrame::left_anchored(&d, 1, theta);
        let v = psi_field(Complex64::from_polar(1e9, 0.4), &f).unwrap();
        assert_abs_diff_eq!(v, (PI - theta) / PI, epsilon = 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn phi_maps_disk_to_upper_half_plane(r in 0.0f64..0.999, t in 0.0f64..std::f64::consts::TAU) {
            prop_assert!(mobius_phi(Complex64::from_polar(r, t)).im > 0.0);
        }

        #[test]
        fn mirror_identity_and_bounds(x in -2.0f64..2.0, y in 0.05f64..2.0, theta in 0.05f64..3.09) {
            let d = dom();
            let f = MobiusFrame::left_anchored(&d, 1, theta);
            let z = Complex64::new(x, y);
            prop_assume!(d.is_exterior(z) && d.is_exterior(-z));
            let phi = phi_field(z, &f).unwrap();
            let psi = psi_field(-z, &f).unwrap();
            prop_assert!((phi - psi).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&phi));
            prop_assert!((0.0..=1.0).contains(&psi_field(z, &f).unwrap()));
        }
    }
}
