//! Diagnostics on flux profiles: the Paatero univalence bound, rotational
//! and reflection symmetry residuals, and boundary curvature computed from
//! the flux alone.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{analyze, grid_angles, PeriodicSamples};
use crate::mapping::ConformalMap;
use crate::par;
use crate::profile::{build_phase, FluxProfile};

/// Default relative residual below which a symmetry is reported.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-6;

/// Default largest rotation order scanned.
pub const DEFAULT_N_MAX: usize = 12;

/// Angle-grid refinement used by [`curvature_from_flux`].
pub const CURVATURE_OVERSAMPLING: usize = 2;

/// Outcome of the sufficient univalence test
/// `max |phi'(s) / phi(s)^2| <= 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivalenceReport {
    pub max_ratio: f64,
    /// Upper bound `2 pi (1 + max_ratio / 2 pi)` on the boundary rotation.
    pub paatero_bound: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationalResidual {
    pub n: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResidual {
    /// Arclength of the axis crossing, in `[0, L/2)`.
    pub offset: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub rotational: Vec<RotationalResidual>,
    pub reflection: ReflectionResidual,
    pub detected_orders: Vec<usize>,
    pub reflection_detected: bool,
    pub tolerance: f64,
}

/// `|phi'/phi^2|` as a function of the reduced variable `u`.
fn ratio_at(coeffs: &crate::harmonic::FourierCoefficients, scale: f64, u: f64) -> f64 {
    let (v, d) = coeffs.evaluate_with_derivative(u);
    (d * scale).abs() / (v * v)
}

/// Golden-section maximization on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    fc.max(fd)
}

/// Evaluates the univalence condition with `phi'` taken spectrally. The grid
/// maximum is refined on the trigonometric interpolant around the largest
/// local maxima.
pub fn paatero_check(profile: &FluxProfile) -> UnivalenceReport {
    let coeffs = profile.coefficients();
    let scale = TAU / profile.perimeter();
    let n = profile.n_samples();
    let phi = profile.samples();
    let dphi = profile.derivative_samples();
    let ratios: Vec<f64> = phi
        .iter()
        .zip(&dphi)
        .map(|(v, d)| d.abs() / (v * v))
        .collect();

    let mut peaks: Vec<usize> = (0..n)
        .filter(|&j| ratios[j] >= ratios[(j + n - 1) % n] && ratios[j] >= ratios[(j + 1) % n])
        .collect();
    peaks.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]));
    peaks.truncate(4);

    let h = TAU / n as f64;
    let mut max_ratio = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    for j in peaks {
        let u = j as f64 * h;
        let refined = golden_max(|x| ratio_at(&coeffs, scale, x), u - h, u + h);
        max_ratio = max_ratio.max(refined);
    }

    UnivalenceReport {
        max_ratio,
        paatero_bound: TAU * (1.0 + max_ratio / TAU),
        passes: max_ratio <= TAU,
    }
}

/// Residuals `||phi(. + L/n) - phi||_inf / ||phi||_inf` for
/// `n = 2..=n_max`. Shifts that are not whole grid steps use the
/// trigonometric interpolant.
pub fn rotational_symmetry(profile: &FluxProfile, n_max: usize) -> Result<Vec<RotationalResidual>> {
    let size = profile.n_samples();
    if n_max < 2 || n_max > size / 4 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must lie in [2, {}]",
            size / 4
        )));
    }
    let phi = profile.samples();
    let norm = profile.max();
    let coeffs = profile.coefficients();
    Ok(par::map_range(n_max - 1, |i| {
        let n = i + 2;
        let residual = if size.is_multiple_of(n) {
            let shift = size / n;
            (0..size).fold(0.0f64, |m, j| m.max((phi[(j + shift) % size] - phi[j]).abs()))
        } else {
            let shifted = coeffs.shifted(TAU / n as f64).synthesize();
            shifted
                .values()
                .iter()
                .zip(phi)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        RotationalResidual {
            n,
            residual: residual / norm,
        }
    }))
}

/// Orders whose residual is below `tolerance`, closed under divisors.
pub fn detected_orders(residuals: &[RotationalResidual], tolerance: f64) -> Vec<usize> {
    let hits: Vec<usize> = residuals
        .iter()
        .filter(|r| r.residual < tolerance)
        .map(|r| r.n)
        .collect();
    let mut orders: Vec<usize> = residuals
        .iter()
        .map(|r| r.n)
        .filter(|&d| hits.iter().any(|&n| n % d == 0))
        .collect();
    orders.dedup();
    orders
}

/// Scans axis crossings `s0` on the grid and half grid for the smallest
/// `||phi(s0 + .) - phi(s0 - .)||_inf / ||phi||_inf`.
pub fn reflection_symmetry(profile: &FluxProfile) -> ReflectionResidual {
    let size = profile.n_samples();
    let phi = profile.samples();
    let norm = profile.max();
    let half_shift = profile.coefficients().shifted(TAU / (2 * size) as f64).synthesize();
    let psi = half_shift.values();
    let residuals = par::map_range(size, |m| {
        let values = if m % 2 == 0 { phi } else { psi };
        let center = m / 2;
        (0..size).fold(0.0f64, |acc, j| {
            let plus = values[(center + j) % size];
            let minus = values[(center + size - j) % size];
            acc.max((plus - minus).abs())
        })
    });
    let (best, residual) = residuals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bm, br), (m, &r)| if r < br { (m, r) } else { (bm, br) });
    ReflectionResidual {
        offset: best as f64 * profile.spacing() / 2.0,
        residual: residual / norm,
    }
}

pub fn symmetry_report(profile: &FluxProfile, n_max: usize, tolerance: f64) -> Result<SymmetryReport> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("symmetry tolerance {tolerance} must be positive")));
    }
    let rotational = rotational_symmetry(profile, n_max)?;
    let reflection = reflection_symmetry(profile);
    Ok(SymmetryReport {
        detected_orders: detected_orders(&rotational, tolerance),
        reflection_detected: reflection.residual < tolerance,
        rotational,
        reflection,
        tolerance,
    })
}

/// Boundary curvature at the profile nodes, from the flux alone:
/// `kappa(s(theta)) = 2 pi phi(s(theta)) [1 + H(s''/s')(theta)]` with
/// `s' = 1 / (2 pi phi(s(theta)))`.
///
/// The conjugate function is taken in `theta`-space by its Fourier
/// multiplier on a grid twice as fine as the profile, since the change of
/// variable raises the bandwidth where the boundary speed is small. The
/// result is then read off at `theta = Phi(s_j)`.
pub fn curvature_from_flux(profile: &FluxProfile) -> Result<Vec<f64>> {
    let n = CURVATURE_OVERSAMPLING * profile.n_samples();
    let phase = build_phase(profile);
    let coeffs = profile.coefficients();
    let theta = grid_angles(n);
    let log_speed = par::try_map_range(n, |j| -> Result<f64> {
        let s = phase.inverse(theta[j])?;
        let phi = coeffs.evaluate(profile.to_reduced(s));
        if !(phi > 0.0) {
            return Err(Error::NonPositiveSample { index: j, value: phi });
        }
        Ok(-(TAU * phi).ln())
    })?;
    let turning_rate = analyze(&PeriodicSamples::new(log_speed)?)
        .derivative()
        .conjugate();
    let nodes = phase.values();
    Ok(profile
        .samples()
        .iter()
        .zip(nodes)
        .map(|(phi, t)| TAU * phi * (1.0 + turning_rate.evaluate(*t)))
        .collect())
}

/// The same curvature written as `kappa = 2 pi phi [1 + D2N(log phi)]`,
/// with the Dirichlet-to-Neumann operator of the domain. Computed by
/// [`curvature_from_flux`].
pub fn d2n_curvature_form(profile: &FluxProfile) -> Result<Vec<f64>> {
    curvature_from_flux(profile)
}

/// Signed curvature of the image of the unit circle at `f(e^{i theta})`:
/// `Re{1 + z f''(z)/f'(z)} / |f'(z)|`.
pub fn curvature_geometric(map: &ConformalMap, theta: f64) -> Result<f64> {
    let z = Complex64::from_polar(1.0, theta);
    let g = map.log_fprime(z)?;
    let dg = map.log_derivative(z)?;
    Ok((1.0 + (z * dg).re) / g.re.exp())
}

/// Trapezoid estimate of `int_0^L kappa ds` on the profile grid.
pub fn total_turning(profile: &FluxProfile, curvature: &[f64]) -> f64 {
    curvature.iter().sum::<f64>() * profile.spacing()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Anchors;

    fn cosine_profile(n: usize, l: f64, eps: f64, k: f64) -> FluxProfile {
        FluxProfile::from_fn(n, l, |s| (1.0 + eps * (k * TAU * s / l).cos()) / l).unwrap()
    }

    fn scan_oracle(eps: f64) -> f64 {
        // |phi'/phi^2| = eps 2 pi |sin u| / (1 + eps cos u)^2, independent of L
        let m = 2_000_000;
        (0..m)
            .map(|i| {
                let u = TAU * i as f64 / m as f64;
                eps * TAU * u.sin().abs() / (1.0 + eps * u.cos()).powi(2)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_flux_passes_paatero() {
        let p = FluxProfile::from_fn(64, 3.0, |_| 1.0 / 3.0).unwrap();
        let r = paatero_check(&p);
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.passes);
        assert_eq!(r.paatero_bound, TAU);
    }

    #[test]
    fn cosine_flux_ratio_matches_scan() {
        let r = paatero_check(&cosine_profile(256, 1.0, 0.3, 1.0));
        let oracle = scan_oracle(0.3);
        assert!((r.max_ratio / oracle - 1.0).abs() < 1e-6, "{} vs {oracle}", r.max_ratio);
        assert_eq!(r.passes, oracle <= TAU);
        assert!(r.paatero_bound >= TAU);
    }

    #[test]
    fn steep_flux_fails_paatero() {
        let r = paatero_check(&cosine_profile(512, 1.0, 0.99, 1.0));
        assert!(!r.passes);
        assert!(r.paatero_bound > 2.0 * TAU);
    }

    #[test]
    fn constant_flux_is_symmetric_everywhere() {
        let p = FluxProfile::from_fn(64, 2.0, |_| 0.5).unwrap();
        let rep = symmetry_report(&p, 12, DEFAULT_SYMMETRY_TOL).unwrap();
        assert!(rep.rotational.iter().all(|r| r.residual < 1e-14));
        assert_eq!(rep.detected_orders, (2..=12).collect::<Vec<_>>());
        assert_eq!(rep.reflection.offset, 0.0);
        assert_eq!(rep.reflection.residual, 0.0);
    }

    #[test]
    fn periodic_flux_detects_its_order_and_divisors() {
        let p = cosine_profile(128, 1.0, 0.2, 6.0);
        let rep = symmetry_report(&p, 12, DEFAULT_SYMMETRY_TOL).unwrap();
        assert_eq!(rep.detected_orders, vec![2, 3, 6]);
        let r4 = rep.rotational.iter().find(|r| r.n == 4).unwrap();
        assert!(r4.residual > 1e-2);
    }

    #[test]
    fn localized_bump_has_no_symmetry() {
        let l = 1.0;
        let raw: Vec<f64> = (0..128)
            .map(|j| {
                let u = TAU * j as f64 / 128.0;
                1.0 + 0.5 * (-(20.0 * (1.0 - (u - 1.0).cos()))).exp()
            })
            .collect();
        let p = FluxProfile::renormalized(raw, l).unwrap();
        let rot = rotational_symmetry(&p, 12).unwrap();
        assert!(rot.iter().all(|r| r.residual > 1e-2));
    }

    #[test]
    fn reflection_scan_finds_shifted_axis() {
        // axis crossing on the half grid
        let n = 64;
        let l = 2.0;
        let s0 = 5.5 * l / n as f64;
        let p = FluxProfile::from_fn(n, l, |s| (1.0 + 0.3 * (TAU * (s - s0) / l).cos()) / l).unwrap();
        let r = reflection_symmetry(&p);
        assert!((r.offset - s0).abs() < 1e-14);
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn n_max_bounds() {
        let p = FluxProfile::from_fn(32, 1.0, |_| 1.0).unwrap();
        assert!(rotational_symmetry(&p, 9).is_err());
        assert!(rotational_symmetry(&p, 1).is_err());
        assert!(rotational_symmetry(&p, 8).is_ok());
    }

    #[test]
    fn disk_curvature_from_flux() {
        let r = 1.7;
        let p = FluxProfile::from_fn(64, TAU * r, |_| 1.0 / (TAU * r)).unwrap();
        let k = curvature_from_flux(&p).unwrap();
        assert!(k.iter().all(|v| (v - 1.0 / r).abs() < 1e-14));
        assert_eq!(k, d2n_curvature_form(&p).unwrap());
        assert!((total_turning(&p, &k) - TAU).abs() < 1e-13);
    }

    #[test]
    fn curvature_turns_once_for_cosine_flux() {
        let p = cosine_profile(256, 3.0, 0.3, 2.0);
        let k = curvature_from_flux(&p).unwrap();
        assert!((total_turning(&p, &k) - TAU).abs() < 1e-10);
        assert_eq!(k, d2n_curvature_form(&p).unwrap());
    }

    #[test]
    fn geometric_curvature_closed_forms() {
        let modulus = PeriodicSamples::new(vec![2.0; 16]).unwrap();
        let anchors = Anchors::new(Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        let disk = ConformalMap::from_boundary_modulus(&modulus, &anchors).unwrap();
        assert!((curvature_geometric(&disk, 1.3).unwrap() - 0.5).abs() < 1e-15);

        let m = PeriodicSamples::from_fn(256, |t| (1.0 + 0.4 * Complex64::from_polar(1.0, t)).norm()).unwrap();
        let quad = ConformalMap::from_boundary_modulus(&m, &anchors).unwrap();
        let want = (1.0 + 0.4 / 1.4) / 1.4;
        assert!((curvature_geometric(&quad, 0.0).unwrap() - want).abs() < 1e-13);
        assert!((want - 0.918367).abs() < 1e-6);
    }
}
