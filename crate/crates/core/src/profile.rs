//! Boundary flux profiles and the cumulative phase `Phi(s) = 2 pi int_0^s phi`.
//!
//! A [`FluxProfile`] holds `phi` at `N` uniformly spaced arclengths
//! `s_j = j L / N`, measured counterclockwise from the boundary reference
//! point. Internally every profile is viewed as a periodic function of the
//! reduced variable `u = 2 pi s / L`, so all spectral machinery from
//! [`crate::harmonic`] applies unchanged. Smoothness of `phi` is assumed, not
//! checked: only positivity and the unit-mass condition are validated.

use std::f64::consts::TAU;

use crate::error::{check_grid, Error, Result};
use crate::harmonic::{analyze, FourierCoefficients, PeriodicPrimitive, PeriodicSamples};

/// Smallest accepted profile.
pub const MIN_SAMPLES: usize = 8;

/// Default tolerance on `|int phi ds - 1|`.
pub const DEFAULT_NORMALIZATION_TOL: f64 = 1e-6;

/// Flux `phi(s)` sampled on a uniform periodic arclength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxProfile {
    samples: Vec<f64>,
    perimeter: f64,
}

/// Validates raw samples with the default normalization tolerance.
pub fn validate_flux(raw_samples: &[f64], perimeter: f64) -> Result<FluxProfile> {
    FluxProfile::validate(raw_samples.to_vec(), perimeter, DEFAULT_NORMALIZATION_TOL)
}

fn check_shape(samples: &[f64], perimeter: f64) -> Result<()> {
    check_grid(samples.len(), MIN_SAMPLES)?;
    if !(perimeter.is_finite() && perimeter > 0.0) {
        return Err(Error::InvalidPerimeter(perimeter));
    }
    if let Some((index, &value)) = samples
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::NonPositiveSample { index, value });
    }
    Ok(())
}

fn trapezoid(samples: &[f64], perimeter: f64) -> f64 {
    samples.iter().sum::<f64>() * perimeter / samples.len() as f64
}

impl FluxProfile {
    /// Accepts `samples` only if every value is positive and the periodic
    /// trapezoid estimate of `int_0^L phi ds` is within `tolerance` of 1.
    pub fn validate(samples: Vec<f64>, perimeter: f64, tolerance: f64) -> Result<Self> {
        check_shape(&samples, perimeter)?;
        let integral = trapezoid(&samples, perimeter);
        if !((integral - 1.0).abs() <= tolerance) {
            return Err(Error::NormalizationViolation {
                integral,
                tolerance,
            });
        }
        Ok(Self { samples, perimeter })
    }

    /// Divides the samples by their measured integral. This is the explicit
    /// opt-in path; [`FluxProfile::validate`] never rescales.
    pub fn renormalized(samples: Vec<f64>, perimeter: f64) -> Result<Self> {
        check_shape(&samples, perimeter)?;
        let integral = trapezoid(&samples, perimeter);
        let samples = samples.into_iter().map(|v| v / integral).collect();
        Ok(Self { samples, perimeter })
    }

    /// Builds a profile from a closed-form `phi(s)` on `n` nodes.
    pub fn from_fn(n: usize, perimeter: f64, phi: impl Fn(f64) -> f64) -> Result<Self> {
        let h = perimeter / n as f64;
        let samples = (0..n).map(|j| phi(j as f64 * h)).collect();
        Self::validate(samples, perimeter, DEFAULT_NORMALIZATION_TOL)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        self.perimeter / self.samples.len() as f64
    }

    /// Arclength nodes `s_j = j L / N`.
    pub fn arclengths(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.samples.len()).map(|j| j as f64 * h).collect()
    }

    /// Periodic trapezoid estimate of `int_0^L phi ds`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.samples, self.perimeter)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Fourier coefficients of `phi` in the reduced variable `u = 2 pi s / L`.
    pub fn coefficients(&self) -> FourierCoefficients {
        analyze(&PeriodicSamples::new(self.samples.clone()).expect("validated grid"))
    }

    pub(crate) fn to_reduced(&self, s: f64) -> f64 {
        TAU * s / self.perimeter
    }

    /// Trigonometric interpolant of `phi` at an arbitrary arclength.
    pub fn value_at(&self, s: f64) -> f64 {
        self.coefficients().evaluate(self.to_reduced(s))
    }

    /// Spectral `d phi / ds` on the arclength nodes.
    pub fn derivative_samples(&self) -> Vec<f64> {
        let scale = TAU / self.perimeter;
        crate::harmonic::differentiate(&self.coefficients())
            .into_values()
            .into_iter()
            .map(|d| d * scale)
            .collect()
    }
}

/// `Phi(s) = 2 pi int_0^s phi`, pinned so that `Phi(L) = 2 pi`.
///
/// Built from the Fourier primitive of the periodic interpolant: the mean
/// mode integrates linearly and the rest spectrally. Normalizing by the
/// measured mean keeps `Phi` strictly consistent with `phi` while pinning the
/// endpoint exactly.
#[derive(Debug, Clone)]
pub struct CumulativePhase {
    perimeter: f64,
    primitive: PeriodicPrimitive,
}

pub fn build_phase(profile: &FluxProfile) -> CumulativePhase {
    CumulativePhase {
        perimeter: profile.perimeter,
        primitive: PeriodicPrimitive::normalized(&profile.coefficients()),
    }
}

/// Solves `Phi(s) = theta` for `theta` in `[0, 2 pi]`.
pub fn invert_phase(phase: &CumulativePhase, theta: f64) -> Result<f64> {
    phase.inverse(theta)
}

impl CumulativePhase {
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// `Phi` on the profile nodes, followed by `Phi(L) = 2 pi`.
    pub fn values(&self) -> &[f64] {
        self.primitive.node_values()
    }

    /// `Phi(s)` for any real `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.primitive.value(TAU * s / self.perimeter)
    }

    /// `Phi(s)` and `Phi'(s)`.
    pub fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let (v, d) = self.primitive.value_with_density(TAU * s / self.perimeter);
        (v, d * TAU / self.perimeter)
    }

    /// `Phi^{-1}(theta)`; endpoints map exactly.
    pub fn inverse(&self, theta: f64) -> Result<f64> {
        if theta == TAU {
            return Ok(self.perimeter);
        }
        let u = self.primitive.invert(theta)?;
        Ok(u * self.perimeter / TAU)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eps_cosine(n: usize, l: f64, eps: f64) -> FluxProfile {
        FluxProfile::from_fn(n, l, |s| (1.0 + eps * (TAU * s / l).cos()) / l).unwrap()
    }

    #[test]
    fn constant_circle_flux_is_exactly_normalized() {
        let p = validate_flux(&[1.0 / TAU; 64], TAU).unwrap();
        assert!((p.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_flux_is_rejected_with_measurement() {
        match validate_flux(&[1.0; 64], TAU) {
            Err(Error::NormalizationViolation { integral, .. }) => {
                assert!((integral - TAU).abs() < 1e-13)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cosine_flux_integrates_to_one() {
        let p = eps_cosine(64, 3.0, 0.3);
        // direct summation oracle
        let direct: f64 = (0..64)
            .map(|j| (1.0 + 0.3 * (TAU * j as f64 / 64.0).cos()) / 3.0)
            .sum::<f64>()
            * 3.0
            / 64.0;
        assert!((direct - 1.0).abs() < 1e-14);
        assert!((p.integral() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            validate_flux(&[1.0; 4], 4.0).unwrap_err(),
            Error::GridTooCoarse { n: 4, min: 8 }
        );
        let mut raw = vec![1.0 / 8.0; 8];
        raw[3] = 0.0;
        assert_eq!(
            validate_flux(&raw, 8.0).unwrap_err(),
            Error::NonPositiveSample { index: 3, value: 0.0 }
        );
        assert_eq!(
            validate_flux(&[0.125; 8], -1.0).unwrap_err(),
            Error::InvalidPerimeter(-1.0)
        );
    }

    #[test]
    fn renormalize_divides_by_integral() {
        let p = FluxProfile::renormalized(vec![1.0; 32], TAU).unwrap();
        assert!((p.integral() - 1.0).abs() < 1e-15);
        assert!((p.samples()[0] - 1.0 / TAU).abs() < 1e-16);
    }

    #[test]
    fn constant_phase_is_identity_on_nodes() {
        let l = 5.0;
        let p = validate_flux(&vec![1.0 / l; 128], l).unwrap();
        let phase = build_phase(&p);
        for (j, v) in phase.values().iter().enumerate() {
            assert_eq!(*v, TAU * j as f64 / 128.0);
        }
        assert_eq!(phase.inverse(PI).unwrap(), l / 2.0);
    }

    #[test]
    fn cosine_phase_matches_antiderivative() {
        let (l, eps) = (2.5, 0.4);
        let phase = build_phase(&eps_cosine(64, l, eps));
        let closed = |s: f64| TAU * (s / l + eps / TAU * (TAU * s / l).sin());
        for (j, v) in phase.values().iter().enumerate() {
            let s = j as f64 * l / 64.0;
            assert!((v - closed(s)).abs() < 1e-13, "j={j}");
        }
        assert!((phase.eval(0.77) - closed(0.77)).abs() < 1e-13);
        assert_eq!(*phase.values().last().unwrap(), TAU);
    }

    #[test]
    fn inversion_matches_bisection() {
        let (l, eps) = (3.0, 0.5);
        let phase = build_phase(&eps_cosine(128, l, eps));
        // independent bisection on s/L + (eps/2pi) sin(2 pi s/L) = 1/4
        let g = |s: f64| s / l + eps / TAU * (TAU * s / l).sin() - 0.25;
        let (mut a, mut b) = (0.0, l);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                b = m
            } else {
                a = m
            }
        }
        let s = invert_phase(&phase, PI / 2.0).unwrap();
        assert!((s - 0.5 * (a + b)).abs() < 1e-12);
        assert_eq!(invert_phase(&phase, 0.0).unwrap(), 0.0);
        assert_eq!(invert_phase(&phase, TAU).unwrap(), l);
    }
}
