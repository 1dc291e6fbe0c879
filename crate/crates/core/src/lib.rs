//! Planar domains from the boundary flux of their Green's function.
//!
//! For a simply connected domain with pole `zeta_c`, the interior normal
//! derivative `phi` of the Green's function along the boundary determines the
//! domain once a boundary reference point `zeta_b` is fixed. This crate
//! computes both directions through the normalized conformal map
//! `f: D -> Omega`, `f(0) = zeta_c`, `f(1) = zeta_b`:
//!
//! * [`forward`]: map to flux, `phi(s(theta)) = 1 / (2 pi |f'(e^{i theta})|)`;
//! * [`inverse`]: flux to map through the Schwarz representation of `log f'`;
//! * [`analysis`]: univalence bound, symmetry residuals, curvature from flux.
//!
//! Everything is spectral on uniform power-of-two grids.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod forward;
pub mod harmonic;
pub mod inverse;
pub mod io;
pub mod mapping;
pub mod par;
pub mod profile;

pub use error::{Error, Result};
pub use num_complex::Complex64;
