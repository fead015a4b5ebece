//! Numerical checks of the potential-theoretic identities behind the
//! convergence of critical points: the Poisson kernel and Poisson–Jensen
//! representation of `log|L_n|`, distributional-Laplacian (Green)
//! identities against compactly supported test functions, the smallness of
//! `(1/n) log|L_n(z)|`, the concentration function of `sum Re 1/(z - X_k)`,
//! and the second-moment tightness statistic.

mod grid;
mod planar;
mod poisson;
mod stats;
mod test_function;

pub use grid::{CellMask, GridField, GridSpec};
pub use planar::{
    derivative_identity_check, green_identity_check, log_log_slope, log_minus_area_integral, rect_log_integral,
    singular_weighted_integral, IdentityCheck, LogSingularity, NEAR_CELLS,
};
pub use poisson::{
    choose_radii, poisson_integral, poisson_jensen_check, poisson_kernel, poisson_kernel_bounds, PoissonJensenReport,
    CIRCLE_GUARD, POINT_GUARD,
};
pub use stats::{
    certify_off_atom, concentration_estimate, concentration_function, lemma2_statistic, tightness_point_mass_unit,
    tightness_statistic, trial_seed, Component, ConcentrationRow, Lemma2Row,
};
pub use test_function::TestFunction;
