use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::test_function::TestFunction;
use crate::critical::{distinct_reduce, CriticalSet};
use crate::numeric::{log_minus, CompensatedSum};
use crate::poly_field::RootSample;
use crate::{Complex64, ComplexPoint, Error, Result};

/// Cells within this Chebyshev distance of a singularity are integrated
/// with the exact cell integral of the logarithm.
pub const NEAR_CELLS: usize = 16;

/// Antiderivative `F` with `d^2 F / dx dy = ln sqrt(x^2 + y^2)`.
fn log_antiderivative(x: f64, y: f64) -> f64 {
    let mut t = 0.0;
    if x != 0.0 && y != 0.0 {
        t += x * y * ((x * x + y * y).ln() - 3.0);
    }
    if x != 0.0 {
        t += x * x * (y / x).atan();
    }
    if y != 0.0 {
        t += y * y * (x / y).atan();
    }
    0.5 * t
}

/// Exact `int_{[x0,x1] x [y0,y1]} ln|z| dz`.
pub fn rect_log_integral(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    log_antiderivative(x1, y1) - log_antiderivative(x0, y1) - log_antiderivative(x1, y0) + log_antiderivative(x0, y0)
}

/// A logarithmic singularity `order * ln|z - at|` of the integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSingularity {
    pub at: ComplexPoint,
    pub order: f64,
}

/// Midpoint rule for `int f(z) w(z) dz` over a grid, where `f` is a smooth
/// function plus `sum_s order_s ln|z - s|`. For every cell within
/// [`NEAR_CELLS`] of a singularity `s`, the midpoint value of
/// `order_s ln|c - s| w(c)` is replaced by `order_s w(c) int_cell ln|z - s|`.
///
/// `regular(c)` must return the smooth part of `f` at cell centre `c`; the
/// singular terms are added here. Only cells with `w(c) != 0` are visited.
pub fn singular_weighted_integral<W, G>(grid: &GridSpec, singularities: &[LogSingularity], weight: W, regular: G) -> f64
where
    W: Fn(Complex64) -> f64 + Sync,
    G: Fn(Complex64) -> f64 + Sync,
{
    let (hx, hy) = (grid.hx(), grid.hy());
    let area = hx * hy;
    // Cell index of each singularity; unbounded coordinates for those off the grid.
    let index: Vec<(i64, i64)> = singularities
        .iter()
        .map(|s| {
            (
                ((s.at.re - grid.x_range.0) / hx).floor() as i64,
                ((s.at.im - grid.y_range.0) / hy).floor() as i64,
            )
        })
        .collect();
    let near = NEAR_CELLS as i64;
    let rows: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut row = CompensatedSum::new();
            for i in 0..grid.nx {
                let c = grid.cell_center(i, j);
                let w = weight(c);
                if w == 0.0 {
                    continue;
                }
                let (x0, x1, y0, y1) = grid.cell_bounds(i, j);
                let mut f = CompensatedSum::new();
                f.add(regular(c) * area);
                for (s, &(si, sj)) in singularities.iter().zip(&index) {
                    if (si - i as i64).abs() <= near && (sj - j as i64).abs() <= near {
                        let (sx, sy) = (s.at.re, s.at.im);
                        f.add(s.order * rect_log_integral(x0 - sx, x1 - sx, y0 - sy, y1 - sy));
                    } else {
                        f.add(s.order * (c - s.at).norm().ln() * area);
                    }
                }
                row.add(w * f.value());
            }
            row.value()
        })
        .collect();
    rows.into_iter().collect::<CompensatedSum>().value()
}

/// `int_C log_-|z - w| dz` on a `resolution^2` grid over the unit square
/// around `w`; the exact value is `pi / 2` for every `w`.
pub fn log_minus_area_integral(w: ComplexPoint, resolution: usize) -> Result<f64> {
    if resolution < 2 * NEAR_CELLS + 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least {}, got {resolution}",
            2 * NEAR_CELLS + 2
        )));
    }
    let grid = GridSpec::square(w, 1.0, resolution);
    let (hx, hy) = (grid.hx(), grid.hy());
    let near = NEAR_CELLS as i64;
    let (wi, wj) = (
        ((w.re - grid.x_range.0) / hx).floor() as i64,
        ((w.im - grid.y_range.0) / hy).floor() as i64,
    );
    // Cells crossing the unit circle are sub-sampled; the rest use the
    // midpoint rule or, next to w, the exact cell integral.
    let sub = 16;
    let rows: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut row = CompensatedSum::new();
            for i in 0..grid.nx {
                let (x0, x1, y0, y1) = grid.cell_bounds(i, j);
                if (wi - i as i64).abs() <= near && (wj - j as i64).abs() <= near {
                    row.add(-rect_log_integral(x0 - w.re, x1 - w.re, y0 - w.im, y1 - w.im));
                    continue;
                }
                let corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)].map(|(x, y)| Complex64::new(x, y) - w);
                let far = corners.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let closest = Complex64::new((w.re).clamp(x0, x1) - w.re, (w.im).clamp(y0, y1) - w.im).norm();
                if closest >= 1.0 {
                    continue;
                }
                if far <= 1.0 {
                    row.add(log_minus((grid.cell_center(i, j) - w).norm()) * hx * hy);
                } else {
                    let mut acc = 0.0;
                    for a in 0..sub {
                        for b in 0..sub {
                            let z = Complex64::new(
                                x0 + (a as f64 + 0.5) * hx / sub as f64,
                                y0 + (b as f64 + 0.5) * hy / sub as f64,
                            );
                            acc += log_minus((z - w).norm());
                        }
                    }
                    row.add(acc * hx * hy / (sub * sub) as f64);
                }
            }
            row.value()
        })
        .collect();
    Ok(rows.into_iter().collect::<CompensatedSum>().value())
}

/// Both sides of a distributional-Laplacian identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// Quadrature side.
    pub lhs: f64,
    /// Exact side, a finite sum of test-function values.
    pub rhs: f64,
    pub discrepancy: f64,
}

fn check_support(phi: &TestFunction, grid: &GridSpec) -> Result<()> {
    phi.validate()?;
    grid.validate()?;
    if !grid.contains_disk(phi.center(), phi.radius()) {
        return Err(Error::InvalidArgument(format!(
            "grid {grid:?} does not cover the support of {phi:?}"
        )));
    }
    Ok(())
}

/// `(1/2pi) int log|P_n| Laplacian(phi)` against `sum phi(X_i)`.
pub fn green_identity_check(roots: &RootSample, phi: &TestFunction, grid: &GridSpec) -> Result<IdentityCheck> {
    check_support(phi, grid)?;
    let dr = distinct_reduce(roots, 0.0)?;
    let sings: Vec<LogSingularity> = dr
        .centers
        .iter()
        .zip(&dr.multiplicities)
        .map(|(&at, &m)| LogSingularity { at, order: m as f64 })
        .collect();
    let lhs = singular_weighted_integral(grid, &sings, |z| phi.laplacian(z), |_| 0.0) / TAU;
    let rhs = roots
        .points()
        .iter()
        .map(|x| phi.value(*x))
        .collect::<CompensatedSum>()
        .value();
    Ok(IdentityCheck {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}

/// `(1/(2 pi n)) int log|L_n| Laplacian(phi)` against
/// `(1/n) (sum_crit phi - sum_root phi)`.
///
/// `log|L_n| = log n + sum_crit ln|z - y| - sum_root ln|z - x|`, so the
/// critical points and roots are the singularities with orders `+1` and `-1`.
pub fn derivative_identity_check(
    roots: &RootSample,
    crits: &CriticalSet,
    phi: &TestFunction,
    grid: &GridSpec,
) -> Result<IdentityCheck> {
    check_support(phi, grid)?;
    let n = roots.n();
    if crits.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "expected {} critical points, got {}",
            n - 1,
            crits.len()
        )));
    }
    let mut sings: Vec<LogSingularity> = crits
        .points
        .iter()
        .map(|&at| LogSingularity { at, order: 1.0 })
        .collect();
    sings.extend(roots.points().iter().map(|&at| LogSingularity { at, order: -1.0 }));
    let log_n = (n as f64).ln();
    let lhs = singular_weighted_integral(grid, &sings, |z| phi.laplacian(z), |_| log_n) / (TAU * n as f64);
    let mut rhs = CompensatedSum::new();
    for y in &crits.points {
        rhs.add(phi.value(*y));
    }
    for x in roots.points() {
        rhs.add(-phi.value(*x));
    }
    let rhs = rhs.value() / n as f64;
    Ok(IdentityCheck {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::{critical_points, SolverSettings};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rectangle_log_integral_matches_brute_force() {
        for (x0, x1, y0, y1) in [(-0.3, 0.5, -0.2, 0.7), (0.1, 0.4, -0.5, -0.2), (-1.0, 0.0, -1.0, 1.0)] {
            let n = 1000;
            let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += Complex64::new(x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy)
                        .norm()
                        .ln();
                }
            }
            assert_abs_diff_eq!(rect_log_integral(x0, x1, y0, y1), acc * hx * hy, epsilon = 5e-6);
        }
        // Unit square with a corner at the origin.
        assert_abs_diff_eq!(
            rect_log_integral(0.0, 1.0, 0.0, 1.0),
            (2f64.ln() - 3.0 + PI / 2.0) / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn log_minus_area_is_half_pi() {
        for w in [c(0.0, 0.0), c(0.3, -2.1)] {
            let v = log_minus_area_integral(w, 512).unwrap();
            assert!((v - PI / 2.0).abs() < 1e-4, "{v}");
        }
        assert!(log_minus_area_integral(c(0.0, 0.0), 8).is_err());
    }

    #[test]
    fn green_single_root_at_center() {
        let phi = TestFunction::smooth_bump(c(0.2, 0.1), 1.0);
        let roots = RootSample::new(vec![c(0.2, 0.1)]).unwrap();
        let grid = GridSpec::square(c(0.2, 0.1), 1.0, 256);
        let chk = green_identity_check(&roots, &phi, &grid).unwrap();
        assert_eq!(chk.rhs, 1.0);
        assert!(chk.discrepancy < 1e-3, "{chk:?}");
    }

    #[test]
    fn green_roots_outside_support() {
        let phi = TestFunction::cosine_cap(c(0.0, 0.0), 1.0);
        let roots = RootSample::new(vec![c(3.0, 0.0), c(0.0, -2.5)]).unwrap();
        let grid = GridSpec::square(c(0.0, 0.0), 1.0, 128);
        let chk = green_identity_check(&roots, &phi, &grid).unwrap();
        assert_eq!(chk.rhs, 0.0);
        assert!(chk.discrepancy < 1e-6, "{chk:?}");
        let small = GridSpec::square(c(0.0, 0.0), 0.5, 128);
        assert!(green_identity_check(&roots, &phi, &small).is_err());
    }

    #[test]
    fn derivative_two_roots() {
        let roots = RootSample::new(vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let crits = critical_points(&roots, &SolverSettings::default()).unwrap();
        let phi = TestFunction::smooth_bump(c(0.0, 0.0), 1.5);
        let grid = GridSpec::square(c(0.0, 0.0), 1.5, 384);
        let chk = derivative_identity_check(&roots, &crits, &phi, &grid).unwrap();
        let want = (phi.value(c(0.0, 0.0)) - phi.value(c(-1.0, 0.0)) - phi.value(c(1.0, 0.0))) / 2.0;
        assert_abs_diff_eq!(chk.rhs, want, epsilon = 1e-15);
        assert!(chk.discrepancy < 1e-3, "{chk:?}");
    }

    #[test]
    fn slope_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert_abs_diff_eq!(log_log_slope(&h, &e), 2.0, epsilon = 1e-12);
    }
}
