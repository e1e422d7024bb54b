use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trig::Spectral;
use crate::error::{Error, Result};

/// `m` disjoint circles `|ζ - c_j| = r_j` with real centers, ordered left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularDomain {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl CircularDomain {
    pub fn new(centers: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::Geometry(format!(
                "{} centers for {} radii",
                centers.len(),
                radii.len()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(Error::Geometry(format!("radius {r} not positive")));
        }
        let d = Self::new_unchecked(centers, radii);
        if let Some(gap) = d.min_separation() {
            if !(gap > 0.0) {
                return Err(Error::Geometry(format!("circles overlap (separation {gap:.3e})")));
            }
        }
        Ok(d)
    }

    pub(crate) fn new_unchecked(centers: Vec<f64>, radii: Vec<f64>) -> Self {
        Self { centers, radii }
    }

    pub fn m(&self) -> usize {
        self.centers.len()
    }

    pub fn center(&self, j: usize) -> Complex64 {
        Complex64::new(self.centers[j], 0.0)
    }

    /// Smallest gap between consecutive circles along the real axis.
    pub fn min_separation(&self) -> Option<f64> {
        (1..self.m())
            .map(|j| {
                (self.centers[j] - self.centers[j - 1]) - self.radii[j] - self.radii[j - 1]
            })
            .reduce(f64::min)
    }

    /// Point of circle `j` at parameter `t`, clockwise: `c_j + r_j e^{-it}`.
    pub fn eta(&self, j: usize, t: f64) -> Complex64 {
        self.center(j) + self.radii[j] * Complex64::from_polar(1.0, -t)
    }

    /// Distance from `z` to circle `j` (positive outside).
    pub fn distance_to(&self, j: usize, z: Complex64) -> f64 {
        (z - self.center(j)).norm() - self.radii[j]
    }

    /// Whether `z` lies outside every closed disk.
    pub fn is_exterior(&self, z: Complex64) -> bool {
        (0..self.m()).all(|j| self.distance_to(j, z) > 0.0)
    }

    /// Reflection `ζ ↦ -ζ` maps the domain to itself.
    pub fn mirror_defect(&self) -> f64 {
        let m = self.m();
        (0..m)
            .map(|j| {
                (self.centers[j] + self.centers[m - 1 - j]).abs()
                    + (self.radii[j] - self.radii[m - 1 - j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Nyström discretization: `n` equispaced nodes on each circle.
#[derive(Clone)]
pub struct BoundaryGrid {
    domain: CircularDomain,
    n: usize,
    nodes: Vec<f64>,
    points: Vec<Complex64>,
    tangents: Vec<Complex64>,
    spectral: Arc<Spectral>,
}

impl std::fmt::Debug for BoundaryGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryGrid")
            .field("m", &self.domain.m())
            .field("n", &self.n)
            .finish()
    }
}

/// Nodes `s_i = (i-1)·2π/n` on each circle with analytic `η` and `η'`.
pub fn discretize(domain: &CircularDomain, n: usize) -> Result<BoundaryGrid> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "nodes per circle must be a power of two >= 4, got {n}"
        )));
    }
    let m = domain.m();
    let nodes: Vec<f64> = (0..n).map(|i| i as f64 * 2.0 * PI / n as f64).collect();
    let mut points = Vec::with_capacity(m * n);
    let mut tangents = Vec::with_capacity(m * n);
    for j in 0..m {
        let r = domain.radii[j];
        for &t in &nodes {
            let e = Complex64::from_polar(1.0, -t);
            points.push(domain.center(j) + r * e);
            tangents.push(Complex64::new(0.0, -r) * e);
        }
    }
    Ok(BoundaryGrid {
        domain: domain.clone(),
        n,
        nodes,
        points,
        tangents,
        spectral: Arc::new(Spectral::new(n)),
    })
}

impl BoundaryGrid {
    pub fn domain(&self) -> &CircularDomain {
        &self.domain
    }

    pub fn m(&self) -> usize {
        self.domain.m()
    }

    /// Nodes per circle.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total unknowns `m·n`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameter values shared by every circle.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn tangents(&self) -> &[Complex64] {
        &self.tangents
    }

    /// `η''` at global node `p`; for `c + r e^{-it}` this is `-(η - c)`.
    pub fn second_derivative(&self, p: usize) -> Complex64 {
        let j = p / self.n;
        -(self.points[p] - self.domain.center(j))
    }

    /// Trapezoidal weight `2π/n`.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn circle_of(&self, p: usize) -> usize {
        p / self.n
    }

    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.n..(j + 1) * self.n
    }

    pub(crate) fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Samples a function of the boundary point on every node.
    pub fn sample<T>(&self, f: impl Fn(Complex64) -> T) -> Vec<T> {
        self.points.iter().map(|&z| f(z)).collect()
    }
}
