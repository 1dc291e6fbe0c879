//! Forward operator: conformal map to boundary flux.
//!
//! For `f` with boundary speed `|f'(e^{i theta})|`, arclength is
//! `s(theta) = int_0^theta |f'|` and the flux is the parametric curve
//! `(s(theta), 1 / (2 pi |f'(e^{i theta})|))`. The curve is resampled onto a
//! uniform arclength grid by inverting `s(theta)` on its spectral primitive.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{check_grid, Error, Result};
use crate::harmonic::{analyze, fft_forward, grid_angles, PeriodicPrimitive, PeriodicSamples, MIN_GRID};
use crate::mapping::{Anchors, ConformalMap};
use crate::par;
use crate::profile::{FluxProfile, DEFAULT_NORMALIZATION_TOL};

/// `|f'|` below this fraction of its maximum counts as a critical point.
pub const DEGENERATE_RTOL: f64 = 1e-12;

/// Concrete encodings of a normalized conformal map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// `f(z) = zeta_c + sum_{k>=1} a_k z^k`; `coeffs[0]` is `a_1`.
    Polynomial {
        zeta_c: Complex64,
        coeffs: Vec<Complex64>,
    },
    /// Samples `f(e^{i theta_j})` on the uniform angle grid.
    SampledBoundary { points: Vec<Complex64> },
}

impl MapSpec {
    pub fn polynomial(zeta_c: Complex64, coeffs: Vec<Complex64>) -> Result<Self> {
        let spec = MapSpec::Polynomial { zeta_c, coeffs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sampled_boundary(points: Vec<Complex64>) -> Result<Self> {
        let spec = MapSpec::SampledBoundary { points };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MapSpec::Polynomial { zeta_c, coeffs } => {
                if coeffs.is_empty() || coeffs[0] == Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidMapSpec("leading coefficient a_1 must be nonzero".into()));
                }
                if !zeta_c.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidMapSpec("coefficients must be finite".into()));
                }
            }
            MapSpec::SampledBoundary { points } => {
                check_grid(points.len(), MIN_GRID)?;
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidMapSpec("boundary samples must be finite".into()));
                }
                let n = points.len();
                if let Some(j) = (0..n).find(|&j| points[j] == points[(j + 1) % n]) {
                    return Err(Error::InvalidMapSpec(format!(
                        "consecutive boundary samples {j} and {} coincide",
                        (j + 1) % n
                    )));
                }
                if signed_area(points) <= 0.0 {
                    return Err(Error::InvalidMapSpec(
                        "boundary samples must run counterclockwise".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Shoelace area; positive for counterclockwise polygons.
pub fn signed_area(points: &[Complex64]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|j| {
            let (a, b) = (points[j], points[(j + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
}

/// Complex trigonometric interpolant of closed-curve samples.
#[derive(Debug, Clone)]
struct CurveInterpolant {
    /// DFT coefficients divided by `N`, in FFT order.
    coeffs: Vec<Complex64>,
}

impl CurveInterpolant {
    fn new(points: &[Complex64]) -> Self {
        let n = points.len() as f64;
        let mut coeffs = points.to_vec();
        fft_forward(&mut coeffs);
        coeffs.iter_mut().for_each(|c| *c /= n);
        Self { coeffs }
    }

    fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Value and `d/d theta` at an arbitrary angle; the Nyquist mode is a
    /// cosine.
    fn eval(&self, theta: f64) -> (Complex64, Complex64) {
        let n = self.coeffs.len();
        let half = n / 2;
        let mut value = self.coeffs[0];
        let mut deriv = Complex64::new(0.0, 0.0);
        for k in 1..half {
            let kf = k as f64;
            let pos = self.coeffs[k] * Complex64::from_polar(1.0, kf * theta);
            let neg = self.coeffs[n - k] * Complex64::from_polar(1.0, -kf * theta);
            value += pos + neg;
            deriv += Complex64::new(0.0, kf) * (pos - neg);
        }
        let arg = half as f64 * theta;
        value += self.coeffs[half] * arg.cos();
        deriv -= self.coeffs[half] * (half as f64 * arg.sin());
        (value, deriv)
    }
}

/// Boundary description able to report `f(e^{i theta})` and
/// `|f'(e^{i theta})|` anywhere on the circle.
enum Boundary<'a> {
    Polynomial {
        zeta_c: Complex64,
        coeffs: &'a [Complex64],
    },
    Sampled(CurveInterpolant),
    Map(&'a ConformalMap),
}

impl Boundary<'_> {
    fn point(&self, theta: f64) -> Result<Complex64> {
        let z = Complex64::from_polar(1.0, theta);
        match self {
            Boundary::Polynomial { zeta_c, coeffs } => {
                Ok(zeta_c + z * crate::harmonic::horner(coeffs, z))
            }
            Boundary::Sampled(curve) => Ok(curve.eval(theta).0),
            Boundary::Map(map) => map.eval_f(z),
        }
    }

    fn modulus(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        match self {
            Boundary::Polynomial { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (k, a)| acc * z + a * (k + 1) as f64)
                .norm(),
            Boundary::Sampled(curve) => curve.eval(theta).1.norm(),
            Boundary::Map(map) => map.boundary_modulus(theta),
        }
    }

    fn anchors(&self) -> Result<Anchors> {
        match self {
            Boundary::Polynomial { zeta_c, coeffs } => {
                let sum = coeffs.iter().fold(Complex64::new(0.0, 0.0), |a, c| a + c);
                Anchors::new(*zeta_c, zeta_c + sum)
            }
            Boundary::Sampled(curve) => Anchors::new(curve.mean(), self.point(0.0)?),
            Boundary::Map(map) => map.anchors(),
        }
    }
}

impl MapSpec {
    fn boundary(&self) -> Result<Boundary<'_>> {
        self.validate()?;
        Ok(match self {
            MapSpec::Polynomial { zeta_c, coeffs } => Boundary::Polynomial {
                zeta_c: *zeta_c,
                coeffs,
            },
            MapSpec::SampledBoundary { points } => Boundary::Sampled(CurveInterpolant::new(points)),
        })
    }

    /// `f(e^{i theta_j})` on `n` grid angles.
    pub fn boundary_points(&self, n: usize) -> Result<Vec<Complex64>> {
        check_grid(n, MIN_GRID)?;
        let boundary = self.boundary()?;
        let theta = grid_angles(n);
        par::try_map_range(n, |j| boundary.point(theta[j]))
    }
}

/// `|f'(e^{i theta_j})|` on `n` grid angles.
pub fn boundary_modulus_of(spec: &MapSpec, n: usize) -> Result<PeriodicSamples> {
    check_grid(n, MIN_GRID)?;
    let boundary = spec.boundary()?;
    let modulus = sample_modulus(&boundary, n)?;
    PeriodicSamples::new(modulus)
}

fn sample_modulus(boundary: &Boundary<'_>, n: usize) -> Result<Vec<f64>> {
    let theta = grid_angles(n);
    let modulus = par::map_range(n, |j| boundary.modulus(theta[j]));
    let max = modulus.iter().fold(0.0f64, |m, &v| m.max(v));
    if let Some((j, &m)) = modulus
        .iter()
        .enumerate()
        .find(|(_, &m)| !(m > DEGENERATE_RTOL * max))
    {
        return Err(Error::DegenerateDerivative {
            theta: theta[j],
            modulus: m,
        });
    }
    Ok(modulus)
}

/// Flux profile together with the boundary angles of its nodes.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub profile: FluxProfile,
    pub anchors: Anchors,
    /// `theta(s_j)` for every arclength node.
    pub theta_nodes: Vec<f64>,
}

/// Applies the forward operator, returning `phi` on `n` uniform arclength
/// nodes and the anchors `(f(0), f(1))`.
pub fn forward_operator(spec: &MapSpec, n: usize) -> Result<(FluxProfile, Anchors)> {
    let result = forward_detailed(spec, n)?;
    Ok((result.profile, result.anchors))
}

pub fn forward_detailed(spec: &MapSpec, n: usize) -> Result<ForwardResult> {
    check_grid(n, MIN_GRID)?;
    forward_boundary(&spec.boundary()?, n)
}

/// Forward operator applied to a map already in spectral form.
pub fn forward_map(map: &ConformalMap, n: usize) -> Result<ForwardResult> {
    check_grid(n, MIN_GRID)?;
    forward_boundary(&Boundary::Map(map), n)
}

/// Spectral form of `spec` on an `n`-point angle grid, with `gamma` fixed by
/// the spec's own anchors.
pub fn spectral_map(spec: &MapSpec, n: usize) -> Result<ConformalMap> {
    let modulus = boundary_modulus_of(spec, n)?;
    let anchors = spec.boundary()?.anchors()?;
    let map = ConformalMap::from_boundary_modulus(&modulus, &anchors)?;
    let gamma = anchors.offset().arg() - map.unit_integral().arg();
    Ok(map.with_gamma(gamma))
}

fn forward_boundary(boundary: &Boundary<'_>, n: usize) -> Result<ForwardResult> {
    let modulus = sample_modulus(boundary, n)?;

    let theta = grid_angles(n);
    let points = par::try_map_range(n, |j| boundary.point(theta[j]))?;
    if let Some((first, second)) = find_self_intersection(&points) {
        return Err(Error::SelfIntersectingBoundary { first, second });
    }

    let arclength = PeriodicPrimitive::new(&analyze(&PeriodicSamples::new(modulus)?));
    let perimeter = arclength.total();
    let h = perimeter / n as f64;
    let theta_nodes = par::try_map_range(n, |i| arclength.invert(i as f64 * h))?;
    let samples = par::map_range(n, |i| 1.0 / (TAU * boundary.modulus(theta_nodes[i])));
    let profile = FluxProfile::validate(samples, perimeter, DEFAULT_NORMALIZATION_TOL)?;

    Ok(ForwardResult {
        profile,
        anchors: boundary.anchors()?,
        theta_nodes,
    })
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Sweep over the closed polygon's edges sorted by their left end; only
/// edges with overlapping x-extent are tested. Adjacent edges are skipped.
/// Returns the first crossing pair found.
pub fn find_self_intersection(points: &[Complex64]) -> Option<(usize, usize)> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let edge = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let left = |i: usize| {
        let (a, b) = edge(i);
        a.re.min(b.re)
    };
    let right = |i: usize| {
        let (a, b) = edge(i);
        a.re.max(b.re)
    };
    order.sort_by(|&i, &j| left(i).total_cmp(&left(j)));

    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let x = left(i);
        active.retain(|&j| right(j) >= x);
        let (a, b) = edge(i);
        for &j in &active {
            let gap = i.abs_diff(j);
            if gap == 1 || gap == n - 1 {
                continue;
            }
            let (c, d) = edge(j);
            if segments_cross(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    None
}
