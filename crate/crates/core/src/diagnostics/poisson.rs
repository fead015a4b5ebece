use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::critical::CriticalSet;
use crate::measures::{DistributionSpec, Seed};
use crate::numeric::{integrate_breaks, CompensatedSum, Estimate, QuadratureSettings};
use crate::poly_field::{log_abs_l, RootSample};
use crate::{Complex64, ComplexPoint, Error, Result};

/// Roots closer than this (relative to `R`) to the circle `|w| = R` are rejected.
pub const CIRCLE_GUARD: f64 = 1e-6;
/// Minimum distance (relative to `R`) between `z` and any root or critical point.
pub const POINT_GUARD: f64 = 1e-8;

/// `P_R(rho, phi) = (R^2 - rho^2) / (R^2 + rho^2 - 2 R rho cos phi)`.
pub fn poisson_kernel(r_big: f64, rho: f64, phi: f64) -> Result<f64> {
    if !(r_big > 0.0 && rho >= 0.0 && rho < r_big) {
        return Err(Error::InvalidArgument(format!(
            "Poisson kernel needs 0 <= rho < R, got rho = {rho}, R = {r_big}"
        )));
    }
    // Denominator written as (R - rho)^2 + 4 R rho sin^2(phi/2) to stay accurate near phi = 0.
    let s = (0.5 * phi).sin();
    let den = (r_big - rho) * (r_big - rho) + 4.0 * r_big * rho * s * s;
    Ok((r_big - rho) * (r_big + rho) / den)
}

fn check_circle(roots: &RootSample, r_big: f64) -> Result<()> {
    for x in roots.points() {
        let distance = (x.norm() - r_big).abs();
        if distance <= CIRCLE_GUARD * r_big {
            return Err(Error::RootOnCircle {
                radius: r_big,
                distance,
            });
        }
    }
    Ok(())
}

/// `I_n(z; R) = (1/2pi) int_0^2pi log|L_n(R e^{it})| P_R(|z|, t - arg z) dt`.
///
/// Starts from `max(64, 4n)` equal panels, with extra breakpoints at the
/// arguments of roots and critical points close to the circle, and refines
/// adaptively.
pub fn poisson_integral(
    roots: &RootSample,
    z: ComplexPoint,
    r_big: f64,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    poisson_integral_with(roots, None, z, r_big, quad)
}

fn poisson_integral_with(
    roots: &RootSample,
    crits: Option<&CriticalSet>,
    z: ComplexPoint,
    r_big: f64,
    quad: &QuadratureSettings,
) -> Result<Estimate> {
    if !(r_big.is_finite() && r_big > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r_big}")));
    }
    if !(z.norm() < r_big) {
        return Err(Error::InvalidArgument(format!(
            "|z| = {} is not below R = {r_big}",
            z.norm()
        )));
    }
    check_circle(roots, r_big)?;
    let panels = 64.max(4 * roots.n());
    let mut breaks: Vec<f64> = (0..=panels).map(|k| TAU * k as f64 / panels as f64).collect();
    let near = roots
        .points()
        .iter()
        .chain(crits.map(|c| c.points.as_slice()).unwrap_or(&[]))
        .filter(|w| (w.norm() - r_big).abs() < 0.1 * r_big)
        .map(|w| w.arg().rem_euclid(TAU));
    breaks.extend(near);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (rho, alpha) = (z.norm(), z.arg());
    let settings = QuadratureSettings {
        max_subdivisions: quad.max_subdivisions.max(4 * breaks.len()),
        ..*quad
    };
    let est = integrate_breaks(
        |t| {
            let w = Complex64::from_polar(r_big, t);
            let kernel = poisson_kernel(r_big, rho, t - alpha).unwrap_or(0.0);
            log_abs_l(roots, w) * kernel
        },
        &breaks,
        &settings,
    );
    Ok(Estimate {
        value: est.value / TAU,
        error: est.error / TAU,
    })
}

/// Terms of the Poisson–Jensen representation of `log|L_n(z)|` in `|w| < R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonJensenReport {
    pub z: ComplexPoint,
    pub radius: f64,
    /// `log|L_n(z)|`, evaluated directly.
    pub lhs: f64,
    pub i_n: f64,
    pub i_n_error: f64,
    /// `sum log|R (z - y) / (R^2 - conj(y) z)|` over critical points in the disk.
    pub crit_sum: f64,
    /// The same sum over roots in the disk.
    pub root_sum: f64,
    pub roots_in_disk: Vec<ComplexPoint>,
    pub crits_in_disk: Vec<ComplexPoint>,
    pub residual: f64,
}

impl PoissonJensenReport {
    pub fn k_n(&self) -> usize {
        self.roots_in_disk.len()
    }

    pub fn l_n(&self) -> usize {
        self.crits_in_disk.len()
    }

    /// `|residual| <= max(floor, quadrature error estimate)`.
    pub fn within(&self, floor: f64) -> bool {
        self.residual.abs() <= floor.max(self.i_n_error)
    }
}

fn blaschke_log(z: Complex64, w: Complex64, r_big: f64) -> f64 {
    ((z - w) * r_big / (r_big * r_big - w.conj() * z)).norm().ln()
}

/// Evaluates both sides of the Poisson–Jensen formula for `L_n` at `z`.
pub fn poisson_jensen_check(
    roots: &RootSample,
    crits: &CriticalSet,
    z: ComplexPoint,
    r_big: f64,
    quad: &QuadratureSettings,
) -> Result<PoissonJensenReport> {
    if !(z.norm() < r_big) {
        return Err(Error::InvalidArgument(format!(
            "|z| = {} is not below R = {r_big}",
            z.norm()
        )));
    }
    let guard = POINT_GUARD * r_big;
    if let Some(w) = roots
        .points()
        .iter()
        .chain(&crits.points)
        .find(|w| (*w - z).norm() < guard)
    {
        return Err(Error::InvalidArgument(format!(
            "z = {z} is within {guard:e} of the singular point {w}"
        )));
    }
    let est = poisson_integral_with(roots, Some(crits), z, r_big, quad)?;
    let roots_in_disk: Vec<ComplexPoint> = roots.points().iter().copied().filter(|w| w.norm() < r_big).collect();
    let crits_in_disk: Vec<ComplexPoint> = crits.points.iter().copied().filter(|w| w.norm() < r_big).collect();
    let sum = |pts: &[ComplexPoint]| {
        pts.iter()
            .map(|w| blaschke_log(z, *w, r_big))
            .collect::<CompensatedSum>()
            .value()
    };
    let crit_sum = sum(&crits_in_disk);
    let root_sum = sum(&roots_in_disk);
    let lhs = log_abs_l(roots, z);
    let residual = lhs - (est.value + crit_sum - root_sum);
    Ok(PoissonJensenReport {
        z,
        radius: r_big,
        lhs,
        i_n: est.value,
        i_n_error: est.error,
        crit_sum,
        root_sum,
        roots_in_disk,
        crits_in_disk,
        residual,
    })
}

/// Radii for the disk diagnostics: `r = 1.5 * extent`, and `R = 2.02 r`
/// rescaled by a random factor in `[0.99, 1.01]` until no root is within
/// the circle guard of `|w| = R`.
pub fn choose_radii(spec: &DistributionSpec, roots: &RootSample, seed: Seed) -> Result<(f64, f64)> {
    let r = 1.5 * spec.extent();
    let base = 2.0 * r * 1.01;
    if check_circle(roots, base).is_ok() {
        return Ok((r, base));
    }
    let mut rng = seed.rng();
    for _ in 0..1000 {
        let cand = base * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0));
        if check_circle(roots, cand).is_ok() {
            return Ok((r, cand));
        }
    }
    Err(Error::Degenerate("no admissible outer radius found".into()))
}

/// Closed-form bounds `(R - rho)/(R + rho) <= P_R(rho, .) <= (R + rho)/(R - rho)`.
pub fn poisson_kernel_bounds(r_big: f64, rho: f64) -> (f64, f64) {
    ((r_big - rho) / (r_big + rho), (r_big + rho) / (r_big - rho))
}
