//! Spectral toolkit on the unit circle.
//!
//! Periodic data live on the uniform grid `theta_j = 2*pi*j/N` with `N` a
//! power of two. A real sample vector is represented by the one-sided
//! coefficients `c_0..c_{N/2}` of its trigonometric interpolant
//!
//! ```text
//! g(theta) = c_0 + sum_{0<k<N/2} 2 Re(c_k e^{ik theta}) + c_{N/2} cos(N theta / 2)
//! ```
//!
//! On top of that representation sit the Schwarz (analytic) completion
//! `G(z) = c_0 + 2 sum c_k z^k`, the conjugate-function (Hilbert) transform
//! with multiplier `-i sign(k)`, spectral differentiation, and the periodic
//! primitive used to turn densities into cumulative maps.
//!
//! The Nyquist mode is treated as a pure cosine: its Hilbert image and its
//! grid derivative both vanish on the sample nodes.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{check_grid, Error, Result};

/// Smallest grid accepted by the toolkit.
pub const MIN_GRID: usize = 8;

/// `|z|` cap for direct interior evaluation of the Schwarz series.
pub const SCHWARZ_RADIUS_CAP: f64 = 1.0 - 1e-9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/N}`.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place unnormalized inverse DFT, `x_j = sum_k X_k e^{2 pi i jk/N}`.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

/// The uniform angle grid `2*pi*j/n`.
pub fn grid_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Real samples on the uniform circle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSamples {
    values: Vec<f64>,
}

impl PeriodicSamples {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_grid(values.len(), MIN_GRID)?;
        Ok(Self { values })
    }

    /// Samples `f` at the `n` grid angles.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n, MIN_GRID)?;
        Ok(Self {
            values: grid_angles(n).into_iter().map(f).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One-sided Fourier coefficients `c_0..c_{N/2}` of a real periodic grid
/// function. `c_0` and `c_{N/2}` are real.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    coeffs: Vec<Complex64>,
}

impl FourierCoefficients {
    /// Builds coefficients for a grid of `n` points. Missing high modes are
    /// zero; the imaginary parts of `c_0` and `c_{N/2}` are discarded.
    pub fn from_modes(n: usize, modes: &[Complex64]) -> Result<Self> {
        check_grid(n, MIN_GRID)?;
        let half = n / 2;
        if modes.len() > half + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} modes do not fit a grid of {n} points",
                modes.len()
            )));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); half + 1];
        coeffs[..modes.len()].copy_from_slice(modes);
        coeffs[0].im = 0.0;
        coeffs[half].im = 0.0;
        Ok(Self { coeffs })
    }

    /// Number of grid points the coefficients describe.
    pub fn grid_len(&self) -> usize {
        2 * (self.coeffs.len() - 1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    fn nyquist(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1].re
    }

    /// Values of the interpolant on the grid.
    pub fn synthesize(&self) -> PeriodicSamples {
        let n = self.grid_len();
        let half = n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = Complex64::new(self.coeffs[0].re, 0.0);
        for k in 1..half {
            buf[k] = self.coeffs[k];
            buf[n - k] = self.coeffs[k].conj();
        }
        buf[half] = Complex64::new(self.nyquist(), 0.0);
        fft_inverse(&mut buf);
        PeriodicSamples {
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Evaluates the trigonometric interpolant at an arbitrary angle.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.evaluate_with_derivative(theta).0
    }

    /// Interpolant and its `theta`-derivative at an arbitrary angle.
    pub fn evaluate_with_derivative(&self, theta: f64) -> (f64, f64) {
        let half = self.coeffs.len() - 1;
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = step;
        let mut value = self.coeffs[0].re;
        let mut deriv = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().take(half).skip(1) {
            let term = c * rot;
            value += 2.0 * term.re;
            deriv -= 2.0 * k as f64 * term.im;
            rot *= step;
        }
        let arg = half as f64 * theta;
        value += self.nyquist() * arg.cos();
        deriv -= half as f64 * self.nyquist() * arg.sin();
        (value, deriv)
    }

    /// Coefficients of `g(theta + delta)`.
    pub fn shifted(&self, delta: f64) -> FourierCoefficients {
        let half = self.coeffs.len() - 1;
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * delta))
            .collect();
        coeffs[half] = Complex64::new(self.nyquist() * (half as f64 * delta).cos(), 0.0);
        FourierCoefficients { coeffs }
    }

    /// Coefficients of `dg/dtheta` (multiplier `ik`, Nyquist dropped).
    pub fn derivative(&self) -> FourierCoefficients {
        let half = self.coeffs.len() - 1;
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::new(0.0, k as f64))
            .collect();
        coeffs[half] = Complex64::new(0.0, 0.0);
        FourierCoefficients { coeffs }
    }

    /// Coefficients of the conjugate function (multiplier `-i sign k`).
    pub fn conjugate(&self) -> FourierCoefficients {
        let half = self.coeffs.len() - 1;
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|c| c * Complex64::new(0.0, -1.0))
            .collect();
        coeffs[0] = Complex64::new(0.0, 0.0);
        coeffs[half] = Complex64::new(0.0, 0.0);
        FourierCoefficients { coeffs }
    }

    /// Power-series coefficients of the analytic completion
    /// `G(z) = c_0 + 2 sum_{0<k<N/2} c_k z^k + c_{N/2} z^{N/2}`.
    pub fn schwarz_series(&self) -> Vec<Complex64> {
        let half = self.coeffs.len() - 1;
        let mut series: Vec<Complex64> = self.coeffs.iter().map(|c| 2.0 * c).collect();
        series[0] = Complex64::new(self.coeffs[0].re, 0.0);
        series[half] = Complex64::new(self.nyquist(), 0.0);
        series
    }
}

/// Fourier analysis of grid samples.
pub fn analyze(samples: &PeriodicSamples) -> FourierCoefficients {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_forward(&mut buf);
    let scale = 1.0 / n as f64;
    let mut coeffs: Vec<Complex64> = buf[..=n / 2].iter().map(|c| c * scale).collect();
    coeffs[0].im = 0.0;
    coeffs[n / 2].im = 0.0;
    FourierCoefficients { coeffs }
}

/// Evaluates a polynomial `sum a_k z^k` by Horner's rule.
pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Schwarz integral `(1/2pi) int (e^{it}+z)/(e^{it}-z) g(t) dt` of the
/// interpolant, summed as a power series in `z`.
pub fn schwarz_extend(coeffs: &FourierCoefficients, z: Complex64) -> Result<Complex64> {
    let radius = z.norm();
    if radius > SCHWARZ_RADIUS_CAP {
        return Err(Error::EvaluationTooCloseToBoundary { radius });
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(coeffs.mean(), 0.0));
    }
    Ok(horner(&coeffs.schwarz_series(), z))
}

/// Circle Hilbert transform of the interpolant, sampled on its grid.
pub fn hilbert(coeffs: &FourierCoefficients) -> PeriodicSamples {
    coeffs.conjugate().synthesize()
}

/// Spectral derivative of the interpolant, sampled on its grid.
pub fn differentiate(coeffs: &FourierCoefficients) -> PeriodicSamples {
    coeffs.derivative().synthesize()
}

/// Root-finding controls shared by every cumulative-map inversion.
pub const INVERSION_RTOL: f64 = 1e-12;
pub const INVERSION_MAX_ITER: usize = 100;

/// Cumulative integral `F(x) = int_0^x w` of a positive periodic density
/// `w` given by its interpolant, split as `slope * x + p(x)` with `p`
/// periodic and `p(0) = 0`.
#[derive(Debug, Clone)]
pub struct PeriodicPrimitive {
    slope: f64,
    /// Primitive of the non-Nyquist modes.
    periodic: FourierCoefficients,
    /// Amplitude of `sin(N x / 2)`, the primitive of the Nyquist cosine.
    nyquist_sine: f64,
    /// `p_raw(0)`, subtracted so that `F(0) = 0`.
    offset: f64,
    nodes: Vec<f64>,
}

impl PeriodicPrimitive {
    /// `F(x) = int_0^x w`.
    pub fn new(density: &FourierCoefficients) -> Self {
        Self::build(density, density.mean(), 1.0)
    }

    /// `F(x) = int_0^x w / mean(w)`, so that `F(2 pi) = 2 pi` exactly.
    pub fn normalized(density: &FourierCoefficients) -> Self {
        Self::build(density, 1.0, 1.0 / density.mean())
    }

    fn build(density: &FourierCoefficients, slope: f64, scale: f64) -> Self {
        let half = density.coeffs.len() - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); half + 1];
        for (k, c) in density.coeffs.iter().enumerate().take(half).skip(1) {
            coeffs[k] = c * scale / Complex64::new(0.0, k as f64);
        }
        let periodic = FourierCoefficients { coeffs };
        let grid = periodic.synthesize();
        let offset = grid.values[0];
        let n = grid.len();
        let mut nodes: Vec<f64> = grid
            .values
            .iter()
            .enumerate()
            .map(|(j, p)| slope * (TAU * j as f64 / n as f64) + (p - offset))
            .collect();
        nodes.push(slope * TAU);
        Self {
            slope,
            periodic,
            nyquist_sine: density.nyquist() * scale / half as f64,
            offset,
            nodes,
        }
    }

    /// `F(2 pi)`.
    pub fn total(&self) -> f64 {
        self.slope * TAU
    }

    /// `F` at the grid nodes `0..N` (inclusive of `x = 2 pi`).
    pub fn node_values(&self) -> &[f64] {
        &self.nodes
    }

    /// `F(x)` and `F'(x)` for any real `x`.
    pub fn value_with_density(&self, x: f64) -> (f64, f64) {
        let half = self.periodic.coeffs.len() - 1;
        let step = Complex64::from_polar(1.0, x);
        let mut rot = step;
        let mut value = self.slope * x - self.offset;
        let mut density = self.slope;
        for (k, c) in self.periodic.coeffs.iter().enumerate().take(half).skip(1) {
            let term = c * rot;
            value += 2.0 * term.re;
            density -= 2.0 * k as f64 * term.im;
            rot *= step;
        }
        let arg = half as f64 * x;
        value += self.nyquist_sine * arg.sin();
        density += self.nyquist_sine * half as f64 * arg.cos();
        (value, density)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_with_density(x).0
    }

    /// Solves `F(x) = y` for `y` in `[0, F(2 pi)]` by Newton's method seeded
    /// from the node table, with bisection inside the bracketing cell.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let total = self.total();
        if !(y.is_finite()) || y < 0.0 || y > total {
            return Err(Error::InvalidArgument(format!(
                "target {y} outside [0, {total}]"
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if y == total {
            return Ok(TAU);
        }
        let n = self.nodes.len() - 1;
        let h = TAU / n as f64;
        let cell = self.nodes.partition_point(|&v| v <= y).clamp(1, n) - 1;
        let (mut lo, mut hi) = (cell as f64 * h, (cell + 1) as f64 * h);
        let (f_lo, f_hi) = (self.nodes[cell], self.nodes[cell + 1]);
        let mut x = if f_hi > f_lo {
            lo + (y - f_lo) / (f_hi - f_lo) * h
        } else {
            0.5 * (lo + hi)
        };
        let tol = INVERSION_RTOL * total;
        for _ in 0..INVERSION_MAX_ITER {
            let (fx, dfx) = self.value_with_density(x);
            let r = fx - y;
            if r.abs() <= tol {
                // one more step costs nothing once converged and lands at round-off
                let polished = x - r / dfx;
                return Ok(if dfx > 0.0 && polished >= lo && polished <= hi { polished } else { x });
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / dfx;
            x = if dfx > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * TAU {
                return Ok(x);
            }
        }
        Err(Error::ConvergenceFailure {
            target: y,
            iterations: INVERSION_MAX_ITER,
        })
    }
}
