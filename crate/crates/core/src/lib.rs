//! Numerical laboratory for critical points of random polynomials
//! `P_n(z) = (z - X_1)...(z - X_n)` with i.i.d. complex roots.
//!
//! The crate is split into:
//!
//! * [`measures`]: root distributions, seeded sampling and log-energy integrals.
//! * [`poly_field`]: evaluation of `log|P_n|`, the logarithmic derivative `L_n`
//!   and its circle suprema, always from the roots.
//! * [`critical`]: the critical-point solver, a coefficient/companion-matrix
//!   oracle and the Gauss–Lucas check.
//! * [`diagnostics`]: Poisson kernel and integral, Poisson–Jensen, Green
//!   identities, concentration and tightness statistics.
//! * [`transport`]: empirical measures and Wasserstein-1 / bounded-Lipschitz gauges.
//! * [`lab`]: configuration, deterministic parallel experiments and run manifests.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical;
pub mod diagnostics;
pub mod error;
pub mod lab;
pub mod measures;
pub mod numeric;
pub mod poly_field;
pub mod transport;

pub use num_complex::Complex64;

pub use error::{Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;
