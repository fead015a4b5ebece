//! Critical points of `P_n(z) = prod (z - X_i)`.
//!
//! The production path is a simultaneous Aberth–Ehrlich iteration on the
//! secular form `R(z) = sum m_j / (z - w_j)` over distinct roots, which
//! never touches polynomial coefficients and scales to thousands of
//! roots. A coefficient/companion-matrix reference is available for small
//! degree, together with a Gauss–Lucas containment check and an optimal
//! point-set pairing used to compare the two.

mod hull;
mod oracle;
mod pairing;
mod solver;

pub use hull::{convex_hull, distance_to_hull, hull_diameter, verify_gauss_lucas, GaussLucasReport, HullViolation};
pub use oracle::{coefficient_oracle, companion_roots, monic_coefficients, ORACLE_MAX_DEGREE};
pub use pairing::{hungarian, optimal_pairing_distance};
pub use solver::{critical_points, distinct_reduce, CriticalSet, DistinctRoots, SolverSettings};
