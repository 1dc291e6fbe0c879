//! The normalized conformal map `f: D -> Omega` in spectral form.
//!
//! `f` is stored through the Fourier coefficients of `log|f'(e^{it})|`. The
//! Schwarz completion `G` of that boundary function gives
//! `f'(z) = e^{i gamma} exp(G(z))`; expanding `exp(G)` with the power-series
//! exponential recurrence and integrating term-wise gives `f` itself.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{check_grid, Error, Result};
use crate::harmonic::{
    analyze, grid_angles, horner, FourierCoefficients, PeriodicPrimitive, PeriodicSamples,
    MIN_GRID,
};
use crate::par;

/// Relative tolerance on the truncated-series tail, scaled by `|f(1) - f(0)|`.
pub const SERIES_TAIL_RTOL: f64 = 1e-8;

/// Slack allowed on `|z| <= 1`.
const DISK_SLACK: f64 = 1e-12;

/// Pole and boundary reference that fix the normalization `f(0) = zeta_c`,
/// `f(1) = zeta_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchors {
    pub zeta_c: Complex64,
    pub zeta_b: Complex64,
}

impl Anchors {
    pub fn new(zeta_c: Complex64, zeta_b: Complex64) -> Result<Self> {
        if zeta_c == zeta_b {
            return Err(Error::CoincidentAnchors);
        }
        Ok(Self { zeta_c, zeta_b })
    }

    /// `zeta_b - zeta_c`.
    pub fn offset(&self) -> Complex64 {
        self.zeta_b - self.zeta_c
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SeriesTails {
    f: f64,
    fsecond: f64,
}

/// Geometric extrapolation of `sum_{k>M} t_k` from the last decade of
/// terms `t_k`. A plateau at round-off level counts as converged.
fn geometric_tail(terms: &[f64]) -> f64 {
    let m = terms.len();
    let scale = terms.iter().fold(0.0f64, |a, &t| a.max(t));
    if m < 10 || scale == 0.0 {
        return terms.last().copied().unwrap_or(0.0);
    }
    let early = terms[m - 10..m - 5].iter().fold(0.0f64, |a, &t| a.max(t));
    let late = terms[m - 5..].iter().fold(0.0f64, |a, &t| a.max(t));
    if late <= 64.0 * f64::EPSILON * scale {
        return late;
    }
    let ratio = if early > 0.0 {
        (late / early).powf(0.2)
    } else {
        f64::INFINITY
    };
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        late * ratio / (1.0 - ratio)
    }
}

/// Normalized conformal map of the unit disk.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    zeta_c: Complex64,
    gamma: f64,
    log_modulus: FourierCoefficients,
    /// Power series of `G` (degree `N/2`).
    schwarz: Vec<Complex64>,
    /// `z G'(z)` coefficients, index `k` holds `k g_k`.
    schwarz_derivative: Vec<Complex64>,
    /// `exp(G) = sum b_k z^k`, `k = 0..=M`.
    fprime_series: Vec<Complex64>,
    /// `sum b_k z^{k+1} / (k+1)` stored without the leading `z`.
    f_series: Vec<Complex64>,
    tails: SeriesTails,
}

impl ConformalMap {
    /// Builds the map from samples of `|f'(e^{i theta_j})|`, leaving
    /// `gamma = 0`. Only `anchors.zeta_c` is used here; the boundary anchor
    /// is resolved by [`crate::inverse`].
    pub fn from_boundary_modulus(modulus: &PeriodicSamples, anchors: &Anchors) -> Result<Self> {
        if let Some((index, &value)) = modulus
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveModulus { index, value });
        }
        let logs = PeriodicSamples::new(modulus.values().iter().map(|v| v.ln()).collect())?;
        Ok(Self::from_log_modulus(analyze(&logs), anchors.zeta_c))
    }

    /// Builds the map from the coefficients of `log|f'|` with `gamma = 0`
    /// and the default series order `M = N/2`.
    pub fn from_log_modulus(log_modulus: FourierCoefficients, zeta_c: Complex64) -> Self {
        let order = log_modulus.grid_len() / 2;
        Self::assemble(log_modulus, zeta_c, 0.0, order)
    }

    fn assemble(log_modulus: FourierCoefficients, zeta_c: Complex64, gamma: f64, order: usize) -> Self {
        let schwarz = log_modulus.schwarz_series();
        let schwarz_derivative: Vec<Complex64> = schwarz
            .iter()
            .enumerate()
            .map(|(k, g)| g * k as f64)
            .collect();

        // b_0 = e^{g_0},  n b_n = sum_{k=1}^{n} k g_k b_{n-k}
        let degree = schwarz.len() - 1;
        let mut b = Vec::with_capacity(order + 1);
        b.push(schwarz[0].exp());
        for n in 1..=order {
            let acc = (1..=n.min(degree))
                .map(|k| schwarz_derivative[k] * b[n - k])
                .fold(Complex64::new(0.0, 0.0), |a, t| a + t);
            b.push(acc / n as f64);
        }
        let f_series: Vec<Complex64> = b
            .iter()
            .enumerate()
            .map(|(k, bk)| bk / (k + 1) as f64)
            .collect();

        let f_terms: Vec<f64> = f_series.iter().map(|c| c.norm()).collect();
        let fs_terms: Vec<f64> = b.iter().enumerate().map(|(k, c)| k as f64 * c.norm()).collect();
        let tails = SeriesTails {
            f: geometric_tail(&f_terms),
            fsecond: geometric_tail(&fs_terms),
        };

        Self {
            zeta_c,
            gamma: wrap_angle(gamma),
            log_modulus,
            schwarz,
            schwarz_derivative,
            fprime_series: b,
            f_series,
            tails,
        }
    }

    /// Same map with rotation constant `gamma` (wrapped into `(-pi, pi]`).
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = wrap_angle(gamma);
        self
    }

    /// Same map translated so that `f(0) = zeta_c`.
    pub fn with_center(mut self, zeta_c: Complex64) -> Self {
        self.zeta_c = zeta_c;
        self
    }

    /// Rebuilds the power series of `f'` to order `order`.
    pub fn with_series_order(self, order: usize) -> Self {
        Self::assemble(self.log_modulus, self.zeta_c, self.gamma, order)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn zeta_c(&self) -> Complex64 {
        self.zeta_c
    }

    pub fn log_modulus_coeffs(&self) -> &FourierCoefficients {
        &self.log_modulus
    }

    pub fn series_order(&self) -> usize {
        self.fprime_series.len() - 1
    }

    /// Size of the grid the map was sampled on.
    pub fn grid_len(&self) -> usize {
        self.log_modulus.grid_len()
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.gamma)
    }

    /// `int_0^1 exp(G(t)) dt`, i.e. `f(1) - zeta_c` with `gamma = 0`.
    pub fn unit_integral(&self) -> Complex64 {
        self.f_series.iter().fold(Complex64::new(0.0, 0.0), |a, c| a + c)
    }

    /// Estimated tail of the integrated series at `|z| = 1`.
    pub fn series_tail_bound(&self) -> f64 {
        self.tails.f
    }

    fn tail_tolerance(&self) -> f64 {
        SERIES_TAIL_RTOL * self.unit_integral().norm()
    }

    /// `(zeta_c, f(1))`.
    pub fn anchors(&self) -> Result<Anchors> {
        Anchors::new(self.zeta_c, self.eval_f(Complex64::new(1.0, 0.0))?)
    }

    fn check_disk(z: Complex64) -> Result<f64> {
        let radius = z.norm();
        if !(radius <= 1.0 + DISK_SLACK) {
            return Err(Error::OutsideClosedDisk { radius });
        }
        Ok(radius.min(1.0))
    }

    fn check_tail(&self, tail: f64, radius: f64, power: usize) -> Result<()> {
        let tolerance = self.tail_tolerance();
        let tail = tail * radius.powi(power as i32);
        if tail > tolerance {
            return Err(Error::SeriesNotConverged { tail, tolerance });
        }
        Ok(())
    }

    /// `G(z)`, so that `f'(z) = e^{i gamma} exp(G(z))`. On `|z| = 1` the real
    /// part is the interpolated `log|f'|` and the imaginary part its
    /// conjugate function.
    pub fn log_fprime(&self, z: Complex64) -> Result<Complex64> {
        Self::check_disk(z)?;
        Ok(horner(&self.schwarz, z))
    }

    /// `G'(z) = f''(z) / f'(z)`.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        Self::check_disk(z)?;
        Ok(horner(&self.schwarz_derivative[1..], z))
    }

    pub fn eval_fprime(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.rotation() * self.log_fprime(z)?.exp())
    }

    pub fn eval_f(&self, z: Complex64) -> Result<Complex64> {
        let r = Self::check_disk(z)?;
        self.check_tail(self.tails.f, r, self.series_order() + 2)?;
        Ok(self.zeta_c + self.rotation() * z * horner(&self.f_series, z))
    }

    pub fn eval_fsecond(&self, z: Complex64) -> Result<Complex64> {
        let r = Self::check_disk(z)?;
        self.check_tail(self.tails.fsecond, r, self.series_order())?;
        let derivative: Vec<Complex64> = self
            .fprime_series
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, b)| b * k as f64)
            .collect();
        Ok(self.rotation() * horner(&derivative, z))
    }

    /// `|f'(e^{i theta})|` from the boundary data.
    pub fn boundary_modulus(&self, theta: f64) -> f64 {
        self.log_modulus.evaluate(theta).exp()
    }
}

/// Discretized image of the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub theta: Vec<f64>,
    pub points: Vec<Complex64>,
    pub arclength: Vec<f64>,
    pub tangent_angle: Vec<f64>,
    pub curvature: Vec<f64>,
    pub perimeter: f64,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Length of the closed polygon through the points.
    pub fn polygon_length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| (self.points[(j + 1) % n] - self.points[j]).norm())
            .sum()
    }

    /// Net change of the tangent angle around the closed curve: the sum of
    /// wrapped steps, a multiple of `2 pi`.
    pub fn winding(&self) -> f64 {
        let n = self.tangent_angle.len();
        (0..n)
            .map(|j| wrap_angle(self.tangent_angle[(j + 1) % n] - self.tangent_angle[j]))
            .sum()
    }
}

/// Samples `f` on `n` equally spaced boundary angles together with
/// arclength, tangent angle `psi = arg f' + pi/2 + theta`, and curvature.
pub fn trace_boundary(map: &ConformalMap, n: usize) -> Result<BoundaryTrace> {
    check_grid(n, MIN_GRID)?;
    let theta = grid_angles(n);
    let samples = par::try_map_range(n, |j| -> Result<_> {
        let t = theta[j];
        let z = Complex64::from_polar(1.0, t);
        let point = map.eval_f(z)?;
        let g = map.log_fprime(z)?;
        let psi = map.gamma + g.im + FRAC_PI_2 + t;
        let kappa = crate::analysis::curvature_geometric(map, t)?;
        Ok((point, g.re.exp(), psi, kappa))
    })?;

    let mut points = Vec::with_capacity(n);
    let mut modulus = Vec::with_capacity(n);
    let mut tangent_angle = Vec::with_capacity(n);
    let mut curvature = Vec::with_capacity(n);
    for (p, m, psi, k) in samples {
        points.push(p);
        modulus.push(m);
        tangent_angle.push(psi);
        curvature.push(k);
    }

    for j in 0..n {
        let next = (j + 1) % n;
        let mut jump = tangent_angle[next] - tangent_angle[j];
        if next == 0 {
            jump += TAU;
        }
        if jump.abs() >= PI {
            return Err(Error::UnwrapAmbiguity { index: j, next, jump });
        }
    }

    let primitive = PeriodicPrimitive::new(&analyze(&PeriodicSamples::new(modulus)?));
    let mut arclength = primitive.node_values().to_vec();
    arclength.pop();
    Ok(BoundaryTrace {
        theta,
        points,
        arclength,
        tangent_angle,
        curvature,
        perimeter: primitive.total(),
    })
}

/// Level curve `U = -(1/2 pi) log r` of the Green's function, i.e. the image
/// of the circle `|z| = r`.
pub fn green_level_curve(map: &ConformalMap, r: f64, n: usize) -> Result<Vec<Complex64>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("level radius {r} not in (0, 1)")));
    }
    check_grid(n, MIN_GRID)?;
    let theta = grid_angles(n);
    par::try_map_range(n, |j| map.eval_f(Complex64::from_polar(r, theta[j])))
}
