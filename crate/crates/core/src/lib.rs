//! Numerical laboratory for zero sets of sums of Laplace eigenfunctions.
//!
//! The crate is split by subject:
//!
//! * [`spectral`] exact eigenfunction sums on the flat torus and the round
//!   sphere, their spectral calculus and the harmonic extension to `M × ℝ`.
//! * [`nodal`] sampling, zero-set extraction, distance fields and density radii.
//! * [`weight`] the radial weight used for the higher-order doubling estimate,
//!   built with exact radial calculus, and the polynomial bump weight.
//! * [`doubling`] ball/annulus/cylinder quadrature, doubling ratios, the
//!   integration-by-parts identity and the sharp examples.
//! * [`gap`] trigonometric polynomials with spectral gaps, zero-density radii
//!   and LP positivity certificates.
//!
//! Calibrated constants live in [`constants`].

pub mod constants;
pub mod doubling;
pub mod error;
pub mod gap;
pub mod nodal;
pub(crate) mod par;
pub mod spectral;
pub mod weight;

pub use error::{Error, Result};
