//! Published step heights and power-law constants used as regression fixtures.

use crate::asymfit::{REFERENCE_C_CENTER, REFERENCE_C_LEFT};
use crate::geometry::BasepointMode;

/// Step heights for `z0 = -3/2`, levels 1..=3.
pub const STEP_HEIGHTS_LEFT: [&[f64]; 3] = [
    &[0.60527819],
    &[0.37725094, 0.60254652, 0.78306819],
    &[0.23081722, 0.37469279, 0.48515843, 0.60117033, 0.70056784, 0.78288753, 0.87276904],
];

/// Step heights for `z0 = 0`, levels 2..=4.
pub const STEP_HEIGHTS_CENTER: [&[f64]; 3] = [
    &[0.73555154],
    &[0.50657767, 0.72992958, 0.86334249],
    &[0.32412730, 0.50171513, 0.61794802, 0.72702487, 0.80333761, 0.86206402, 0.92098300],
];

pub fn step_heights(level: u32, mode: BasepointMode) -> Option<&'static [f64]> {
    match mode {
        BasepointMode::LeftExterior => STEP_HEIGHTS_LEFT.get((level as usize).checked_sub(1)?).copied(),
        BasepointMode::Center => STEP_HEIGHTS_CENTER.get((level as usize).checked_sub(2)?).copied(),
    }
}

/// Reference `C_ℓ` of the near-threshold power law.
pub fn c_constant(level: u32, mode: BasepointMode) -> Option<f64> {
    match mode {
        BasepointMode::LeftExterior => REFERENCE_C_LEFT.get(level as usize).copied(),
        BasepointMode::Center => REFERENCE_C_CENTER.get((level as usize).checked_sub(1)?).copied(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(step_heights(0, BasepointMode::LeftExterior), None);
        assert_eq!(step_heights(3, BasepointMode::LeftExterior).unwrap().len(), 7);
        assert_eq!(step_heights(2, BasepointMode::Center), Some(&[0.73555154][..]));
        assert_eq!(step_heights(5, BasepointMode::Center), None);
        assert_eq!(c_constant(0, BasepointMode::LeftExterior), Some(0.900316));
        assert_eq!(c_constant(0, BasepointMode::Center), None);
        assert_eq!(c_constant(4, BasepointMode::Center), Some(2.555452));
    }

    #[test]
    fn heights_increase() {
        for t in STEP_HEIGHTS_LEFT.iter().chain(STEP_HEIGHTS_CENTER.iter()) {
            assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
