//! FFT helpers for periodic data on `n` equispaced nodes.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse FFT plans of one length.
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Fourier coefficients `ĉ_k` of `Σ ĉ_k e^{iks}`, in FFT order.
    pub fn coefficients(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Periodic conjugate function: `cos(ks) ↦ sin(ks)`, `sin(ks) ↦ -cos(ks)`.
    /// The Nyquist mode and the mean are annihilated.
    pub fn conjugate(&self, values: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut buf = self.coefficients(values);
        let half = n / 2;
        for (k, c) in buf.iter_mut().enumerate() {
            *c = if k == 0 || k == half {
                Complex64::new(0.0, 0.0)
            } else if k < half {
                *c * Complex64::new(0.0, -1.0)
            } else {
                *c * Complex64::new(0.0, 1.0)
            };
        }
        self.inverse.process(&mut buf);
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }
}

/// Balanced trigonometric interpolant of real samples at `s_i = 2πi/n`.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    n: usize,
    /// `ĉ_0 … ĉ_{n/2}`; negative modes are conjugates.
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(values: &[f64]) -> Self {
        Self::with_spectral(&Spectral::new(values.len()), values)
    }

    pub fn with_spectral(spectral: &Spectral, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 2 && n.is_power_of_two(), "need a power-of-two sample count");
        let all = spectral.coefficients(values);
        Self {
            n,
            coeffs: all[..=n / 2].to_vec(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let half = self.n / 2;
        let mut acc = self.coeffs[0].re;
        for k in 1..half {
            acc += 2.0 * (self.coeffs[k] * Complex64::from_polar(1.0, k as f64 * s)).re;
        }
        acc + self.coeffs[half].re * (half as f64 * s).cos()
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let half = self.n / 2;
        let mut acc = 0.0;
        for k in 1..half {
            let e = Complex64::from_polar(1.0, k as f64 * s);
            acc += 2.0 * (self.coeffs[k] * Complex64::new(0.0, k as f64) * e).re;
        }
        acc - self.coeffs[half].re * half as f64 * (half as f64 * s).sin()
    }
}

/// One-shot evaluation of the trigonometric interpolant of `values` at `s`.
pub fn trig_interp(values: &[f64], s: f64) -> f64 {
    TrigInterpolant::new(values).eval(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn nodes(n: usize) -> Vec<f64> {
        (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
    }

    #[test]
    fn reproduces_low_modes() {
        let v: Vec<f64> = nodes(16).iter().map(|t| (3.0 * t).cos()).collect();
        assert_abs_diff_eq!(trig_interp(&v, 0.4), 1.2f64.cos(), epsilon = 1e-13);
    }

    #[test]
    fn constant_samples() {
        let p = TrigInterpolant::new(&[2.5; 8]);
        for s in [0.0, 0.3, 2.0, 5.9] {
            assert_abs_diff_eq!(p.eval(s), 2.5, epsilon = 1e-14);
            assert_abs_diff_eq!(p.derivative(s), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_of_mixed_modes() {
        let f = |t: f64| (2.0 * t).sin() + 0.5 * (5.0 * t).cos();
        let df = |t: f64| 2.0 * (2.0 * t).cos() - 2.5 * (5.0 * t).sin();
        let v: Vec<f64> = nodes(32).iter().map(|&t| f(t)).collect();
        let p = TrigInterpolant::new(&v);
        for s in [0.1, 1.7, 4.4] {
            assert_abs_diff_eq!(p.eval(s), f(s), epsilon = 1e-13);
            assert_abs_diff_eq!(p.derivative(s), df(s), epsilon = 1e-12);
        }
    }

    #[test]
    fn conjugate_maps_cos_to_sin() {
        let sp = Spectral::new(16);
        let t = nodes(16);
        let v: Vec<f64> = t.iter().map(|t| (2.0 * t).cos() + 3.0 + (3.0 * t).sin()).collect();
        let mut out = vec![0.0; 16];
        sp.conjugate(&v, &mut out);
        for (o, t) in out.iter().zip(&t) {
            assert_abs_diff_eq!(*o, (2.0 * t).sin() - (3.0 * t).cos(), epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn interpolates_at_nodes(vals in prop::collection::vec(-10.0f64..10.0, 16)) {
            let p = TrigInterpolant::new(&vals);
            for (i, t) in nodes(16).iter().enumerate() {
                prop_assert!((p.eval(*t) - vals[i]).abs() < 1e-12);
            }
        }
    }
}
