//! Inverse operator: boundary flux and anchors to the conformal map.
//!
//! The flux fixes `|f'|` on the circle through the cumulative phase,
//! `|f'(e^{i theta})| = 1 / (2 pi phi(Phi^{-1}(theta)))`. The argument of
//! `f'` follows from the conjugate function, and the only free constant, the
//! rotation `gamma`, is chosen so that `f(1)` lies on the ray from `zeta_c`
//! through `zeta_b`. The distance along that ray is already determined by
//! the data, so any mismatch is reported rather than absorbed.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{check_grid, Error, Result};
use crate::harmonic::{grid_angles, PeriodicSamples, MIN_GRID};
use crate::mapping::{trace_boundary, Anchors, BoundaryTrace, ConformalMap};
use crate::par;
use crate::profile::{build_phase, FluxProfile};

/// Default bound on the relative anchor-distance mismatch.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// Smallest default reconstruction grid.
pub const DEFAULT_MIN_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Angle grid size; `None` picks `max(512, 2 N_s)`.
    pub n: Option<usize>,
    pub tol_residual: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            n: None,
            tol_residual: DEFAULT_RESIDUAL_TOL,
        }
    }
}

impl ReconstructOptions {
    pub fn with_grid(n: usize) -> Self {
        Self {
            n: Some(n),
            ..Self::default()
        }
    }

    fn grid_for(&self, profile: &FluxProfile) -> Result<usize> {
        let samples = profile.n_samples();
        let n = self.n.unwrap_or_else(|| DEFAULT_MIN_GRID.max(2 * samples));
        check_grid(n, MIN_GRID)?;
        if n < samples {
            return Err(Error::InvalidArgument(format!(
                "reconstruction grid {n} is coarser than the profile ({samples} samples)"
            )));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub map: ConformalMap,
    pub trace: BoundaryTrace,
    /// `| |I| - |zeta_b - zeta_c| | / |zeta_b - zeta_c|`; `None` when `gamma`
    /// was supplied directly.
    pub consistency_residual: Option<f64>,
    /// `int_0^1 exp(G(t)) dt` of the unrotated map.
    pub unit_integral: Complex64,
}

impl Reconstruction {
    pub fn gamma(&self) -> f64 {
        self.map.gamma()
    }

    pub fn perimeter(&self) -> f64 {
        self.trace.perimeter
    }

    pub fn series_tail_bound(&self) -> f64 {
        self.map.series_tail_bound()
    }

    /// `(zeta_c, f(1))`.
    pub fn anchors(&self) -> Result<Anchors> {
        self.map.anchors()
    }
}

/// `|f'(e^{i theta_j})|` on `n` grid angles implied by the flux.
pub fn boundary_modulus_from_flux(profile: &FluxProfile, n: usize) -> Result<PeriodicSamples> {
    check_grid(n, MIN_GRID)?;
    let phase = build_phase(profile);
    let coeffs = profile.coefficients();
    let theta = grid_angles(n);
    let modulus = par::try_map_range(n, |j| -> Result<f64> {
        let s = phase.inverse(theta[j])?;
        let phi = coeffs.evaluate(profile.to_reduced(s));
        if !(phi > 0.0) {
            return Err(Error::NonPositiveSample { index: j, value: phi });
        }
        Ok(1.0 / (TAU * phi))
    })?;
    PeriodicSamples::new(modulus)
}

fn unrotated_map(profile: &FluxProfile, zeta_c: Complex64, n: usize) -> Result<(ConformalMap, Complex64)> {
    let modulus = boundary_modulus_from_flux(profile, n)?;
    let map = ConformalMap::from_log_modulus(
        crate::harmonic::analyze(&PeriodicSamples::new(
            modulus.values().iter().map(|v| v.ln()).collect(),
        )?),
        Complex64::new(0.0, 0.0),
    );
    // evaluating at z = 1 runs the tail check on the integrated series
    let integral = map.eval_f(Complex64::new(1.0, 0.0))?;
    Ok((map.with_center(zeta_c), integral))
}

/// Reconstructs `f` with `f(0) = zeta_c` and `arg(f(1) - zeta_c) =
/// arg(zeta_b - zeta_c)`.
pub fn reconstruct(profile: &FluxProfile, anchors: &Anchors, opts: &ReconstructOptions) -> Result<Reconstruction> {
    if !(opts.tol_residual > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "residual tolerance {} must be positive",
            opts.tol_residual
        )));
    }
    let n = opts.grid_for(profile)?;
    let (map, integral) = unrotated_map(profile, anchors.zeta_c, n)?;
    let offset = anchors.offset();
    let residual = (integral.norm() - offset.norm()).abs() / offset.norm();
    if !(residual <= opts.tol_residual) {
        return Err(Error::InconsistentAnchors {
            residual,
            tolerance: opts.tol_residual,
        });
    }
    let map = map.with_gamma(offset.arg() - integral.arg());
    let trace = trace_boundary(&map, n)?;
    Ok(Reconstruction {
        map,
        trace,
        consistency_residual: Some(residual),
        unit_integral: integral,
    })
}

/// Reconstructs `f` with a prescribed rotation constant and no boundary
/// anchor.
pub fn reconstruct_free(profile: &FluxProfile, zeta_c: Complex64, gamma: f64, n: Option<usize>) -> Result<Reconstruction> {
    if !gamma.is_finite() || !zeta_c.is_finite() {
        return Err(Error::InvalidArgument("gamma and zeta_c must be finite".into()));
    }
    let opts = ReconstructOptions {
        n,
        ..ReconstructOptions::default()
    };
    let n = opts.grid_for(profile)?;
    let (map, integral) = unrotated_map(profile, zeta_c, n)?;
    let map = map.with_gamma(gamma);
    let trace = trace_boundary(&map, n)?;
    Ok(Reconstruction {
        map,
        trace,
        consistency_residual: None,
        unit_integral: integral,
    })
}
