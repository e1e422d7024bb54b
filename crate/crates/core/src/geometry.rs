//! Cantor-level slit domains, basepoints and the gap structure of the h-function.
//!
//! Level `ℓ` of the middle-thirds construction consists of `m = 2^ℓ` collinear
//! slits of common length `3^{-ℓ}` inside `[-1/2, 1/2]`. Slit centers are built
//! as exact integer numerators over `3^ℓ` and only converted to `f64` at the end.

use serde::{Deserialize, Serialize};

use crate::bie::CircularDomain;
use crate::error::{Error, Result};

/// Default cap on the number of slits a level may produce.
pub const DEFAULT_MAX_SLITS: usize = 4096;

/// `m` collinear horizontal slits on the real axis with a common length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitDomain {
    /// Cantor level, `None` for explicitly constructed layouts.
    pub level: Option<u32>,
    pub m: usize,
    pub length: f64,
    /// Slit centers in ascending order.
    pub centers: Vec<f64>,
}

impl SlitDomain {
    /// Explicit layout; used by tests and the non-Cantor constructor path.
    pub fn new(centers: Vec<f64>, length: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Geometry("no slits".into()));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Geometry(format!("slit length {length} not positive")));
        }
        for pair in centers.windows(2) {
            if !(pair[1] - pair[0] > length) {
                return Err(Error::Geometry(format!(
                    "slits centered at {} and {} overlap or are unordered",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self {
            level: None,
            m: centers.len(),
            length,
            centers,
        })
    }

    /// Left end of slit `j` (0-based).
    pub fn left(&self, j: usize) -> f64 {
        self.centers[j] - 0.5 * self.length
    }

    /// Right end of slit `j` (0-based).
    pub fn right(&self, j: usize) -> f64 {
        self.centers[j] + 0.5 * self.length
    }

    /// Sum of slit lengths.
    pub fn measure(&self) -> f64 {
        self.m as f64 * self.length
    }

    /// Whether the real point `x` lies on a slit (closed intervals).
    pub fn contains(&self, x: f64) -> bool {
        (0..self.m).any(|j| self.left(j) <= x && x <= self.right(j))
    }
}

/// Level `ℓ` of the middle-thirds construction with the default slit cap.
pub fn cantor_level(level: u32) -> Result<SlitDomain> {
    cantor_level_capped(level, DEFAULT_MAX_SLITS)
}

/// Level `ℓ` of the middle-thirds construction, failing above `max_slits`.
///
/// Each step scales the previous set by 1/3 about the origin and places the
/// two copies at `∓1/3`, so `E_1 = [-1/2,-1/6] ∪ [1/6,1/2]`.
pub fn cantor_level_capped(level: u32, max_slits: usize) -> Result<SlitDomain> {
    let slits = 1u64.checked_shl(level).unwrap_or(u64::MAX);
    if level >= 63 || slits > max_slits as u64 {
        return Err(Error::Capacity {
            level,
            slits,
            max: max_slits,
        });
    }
    // Centers are `num / 3^ℓ`; at level ℓ the copies are shifted by ∓3^{ℓ-1}.
    let mut numerators: Vec<i128> = vec![0];
    let mut pow3: i128 = 1;
    for _ in 0..level {
        let shift = pow3;
        let mut next = Vec::with_capacity(numerators.len() * 2);
        next.extend(numerators.iter().map(|&p| p - shift));
        next.extend(numerators.iter().map(|&p| p + shift));
        numerators = next;
        pow3 *= 3;
    }
    let denom = pow3 as f64;
    let centers = numerators.iter().map(|&p| p as f64 / denom).collect();
    Ok(SlitDomain {
        level: Some(level),
        m: slits as usize,
        length: 1.0 / denom,
        centers,
    })
}

/// Where the Brownian walker starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasepointMode {
    /// `z0 = -3/2`, left of every slit.
    LeftExterior,
    /// `z0 = 0`, in the central gap.
    Center,
}

impl BasepointMode {
    pub fn z0(self) -> f64 {
        match self {
            BasepointMode::LeftExterior => -1.5,
            BasepointMode::Center => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BasepointMode::LeftExterior => "left",
            BasepointMode::Center => "center",
        }
    }
}

impl std::str::FromStr for BasepointMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "left_exterior" | "left-exterior" => Ok(BasepointMode::LeftExterior),
            "center" | "centre" => Ok(BasepointMode::Center),
            other => Err(Error::Domain(format!("unknown basepoint mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basepoint {
    pub mode: BasepointMode,
    pub z0: f64,
}

impl Basepoint {
    pub fn new(mode: BasepointMode) -> Self {
        Self { mode, z0: mode.z0() }
    }

    /// Checks that the basepoint is usable for `d`: off every slit, and for
    /// the centered mode an even, mirror-symmetric layout.
    pub fn validate(&self, d: &SlitDomain) -> Result<()> {
        if d.contains(self.z0) {
            return Err(Error::Geometry(format!("basepoint {} lies on a slit", self.z0)));
        }
        match self.mode {
            BasepointMode::LeftExterior => {
                if self.z0 >= d.left(0) {
                    return Err(Error::Geometry("left basepoint is not left of all slits".into()));
                }
            }
            BasepointMode::Center => {
                if !d.m.is_multiple_of(2) {
                    return Err(Error::Geometry("centered basepoint needs an even slit count".into()));
                }
                let h = d.m / 2;
                if !(d.right(h - 1) < self.z0 && self.z0 < d.left(h)) {
                    return Err(Error::Geometry("centered basepoint is not in the middle gap".into()));
                }
            }
        }
        Ok(())
    }
}

/// A radius interval on which the h-function is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInterval {
    pub r_lo: f64,
    pub r_hi: f64,
    /// 1-based step index.
    pub k: usize,
}

/// Radius intervals where the capture circle crosses no slit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSchedule {
    pub mode: BasepointMode,
    /// `h = 0` on `[0, leading]`.
    pub leading: f64,
    pub steps: Vec<StepInterval>,
    /// `h = 1` on `[trailing, ∞)`.
    pub trailing: f64,
}

/// Gap intervals of `d` seen from basepoint `b`, from exact slit endpoints.
pub fn gap_schedule(d: &SlitDomain, b: &Basepoint) -> Result<GapSchedule> {
    b.validate(d)?;
    let z0 = b.z0;
    Ok(match b.mode {
        BasepointMode::LeftExterior => GapSchedule {
            mode: b.mode,
            leading: d.left(0) - z0,
            steps: (1..d.m)
                .map(|k| StepInterval {
                    r_lo: d.right(k - 1) - z0,
                    r_hi: d.left(k) - z0,
                    k,
                })
                .collect(),
            trailing: d.right(d.m - 1) - z0,
        },
        BasepointMode::Center => {
            let h = d.m / 2;
            // Pair k is slits h-k and h+k-1 (0-based); the right member sets r.
            GapSchedule {
                mode: b.mode,
                leading: d.left(h) - z0,
                steps: (1..h)
                    .map(|k| StepInterval {
                        r_lo: d.right(h + k - 1) - z0,
                        r_hi: d.left(h + k) - z0,
                        k,
                    })
                    .collect(),
                trailing: d.right(d.m - 1) - z0,
            }
        }
    })
}

/// Starting circles for the preimage iteration: centered on the slits with radius `L/2`.
pub fn initial_circles(d: &SlitDomain) -> CircularDomain {
    CircularDomain::new_unchecked(d.centers.clone(), vec![0.5 * d.length; d.m])
}
