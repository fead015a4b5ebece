use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use rand::Rng;

use critlab::critical::{critical_points, SolverSettings};
use critlab::diagnostics::*;
use critlab::measures::{sample, DistributionSpec, Seed};
use critlab::numeric::{integrate, median, QuadratureSettings};
use critlab::poly_field::{log_abs_l, RootSample};
use critlab::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn poisson_kernel_is_a_probability_density() {
    let mut rng = Seed::new(21).rng();
    let quad = QuadratureSettings::default();
    for _ in 0..20 {
        let big_r = 0.5 + 4.0 * rng.random::<f64>();
        let rho = big_r * 0.95 * rng.random::<f64>();
        let mean = integrate(|phi| poisson_kernel(big_r, rho, phi).unwrap(), 0.0, TAU, &quad).value / TAU;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-10);
        let (lo, hi) = poisson_kernel_bounds(big_r, rho);
        for k in 0..64 {
            let p = poisson_kernel(big_r, rho, TAU * k as f64 / 64.0).unwrap();
            assert!(p > 0.0 && p >= lo * (1.0 - 1e-12) && p <= hi * (1.0 + 1e-12));
        }
    }
}

#[test]
fn kernel_bounds_for_the_inner_disk() {
    // For |z| <= r < R/2 the kernel stays within [1/C, C], C = (R + r)/(R - r).
    let (r, big_r) = (1.0, 2.3);
    let c_bound = (big_r + r) / (big_r - r);
    for k in 0..50 {
        let rho = r * k as f64 / 49.0;
        for j in 0..32 {
            let p = poisson_kernel(big_r, rho, TAU * j as f64 / 32.0).unwrap();
            assert!(p >= 1.0 / c_bound - 1e-12 && p <= c_bound + 1e-12);
        }
    }
}

/// `log|L_n(z)|` through the critical points: `ln n + sum ln|z - y| - sum ln|z - x|`.
fn log_l_from_factors(roots: &RootSample, crits: &[Complex64], z: Complex64) -> f64 {
    let n = roots.n() as f64;
    n.ln() + crits.iter().map(|y| (z - y).norm().ln()).sum::<f64>()
        - roots.points().iter().map(|x| (z - x).norm().ln()).sum::<f64>()
}

#[test]
fn poisson_jensen_three_ways() {
    let quad = QuadratureSettings::default();
    let specs = [
        DistributionSpec::gaussian(c(0.0, 0.0), 1.0),
        DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0),
        DistributionSpec::uniform_disk(c(0.2, -0.1), 0.8),
    ];
    for (s, spec) in specs.iter().enumerate() {
        for n in [3usize, 17, 50] {
            let seed = Seed::new(s as u64).child(n as u64);
            let roots = RootSample::new(sample(spec, n, seed).unwrap()).unwrap();
            let crits = critical_points(&roots, &SolverSettings::default()).unwrap();
            let (r, big_r) = choose_radii(spec, &roots, seed.child(1)).unwrap();
            assert!(big_r > 2.0 * r);
            let mut rng = seed.child(2).rng();
            for _ in 0..20 {
                let z = Complex64::from_polar(0.9 * r * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
                let rep = poisson_jensen_check(&roots, &crits, z, big_r, &quad).unwrap();
                assert!(rep.within(1e-6), "n={n} z={z} residual={:e}", rep.residual);
                let direct = rep.i_n;
                let from_sum = log_abs_l(&roots, z) - rep.crit_sum + rep.root_sum;
                let from_factors = log_l_from_factors(&roots, &crits.points, z) - rep.crit_sum + rep.root_sum;
                let scale = 1.0 + direct.abs();
                assert!((direct - from_sum).abs() <= 1e-7 * scale);
                assert!((direct - from_factors).abs() <= 1e-7 * scale);
                assert!((from_sum - from_factors).abs() <= 1e-9 * (1.0 + from_sum.abs()));
            }
        }
    }
}

#[test]
fn green_identities_converge_at_second_order() {
    let roots =
        RootSample::new(sample(&DistributionSpec::gaussian(c(0.0, 0.0), 1.0), 20, Seed::new(8)).unwrap()).unwrap();
    let crits = critical_points(&roots, &SolverSettings::default()).unwrap();
    let phi = TestFunction::smooth_bump(c(0.0, 0.0), 4.0);
    let mut hs = Vec::new();
    let mut green = Vec::new();
    let mut deriv = Vec::new();
    for res in [128usize, 256, 512] {
        let grid = GridSpec::square(c(0.0, 0.0), 4.0, res);
        hs.push(grid.hx());
        green.push(green_identity_check(&roots, &phi, &grid).unwrap().discrepancy);
        deriv.push(
            derivative_identity_check(&roots, &crits, &phi, &grid)
                .unwrap()
                .discrepancy,
        );
    }
    assert!(log_log_slope(&hs, &green) >= 1.8, "{green:?}");
    assert!(log_log_slope(&hs, &deriv) >= 1.8, "{deriv:?}");
}

#[test]
fn green_identity_with_repeated_roots() {
    let roots = RootSample::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.7, 0.2)]).unwrap();
    let crits = critical_points(&roots, &SolverSettings::default()).unwrap();
    let phi = TestFunction::cosine_cap(c(0.1, 0.0), 2.0);
    let grid = GridSpec::square(c(0.1, 0.0), 2.0, 512);
    let g = green_identity_check(&roots, &phi, &grid).unwrap();
    assert!(g.discrepancy < 1e-4 * (1.0 + g.rhs.abs()), "{g:?}");
    let d = derivative_identity_check(&roots, &crits, &phi, &grid).unwrap();
    assert!(d.discrepancy < 1e-4, "{d:?}");
}

#[test]
fn support_outside_the_grid_is_rejected() {
    let roots = RootSample::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let phi = TestFunction::smooth_bump(c(0.0, 0.0), 2.0);
    assert!(green_identity_check(&roots, &phi, &GridSpec::square(c(0.0, 0.0), 1.0, 64)).is_err());
}

#[test]
fn lemma2_frequencies_fall() {
    let spec = DistributionSpec::uniform_disk(c(0.0, 0.0), 1.0);
    let rows = lemma2_statistic(&spec, c(0.3, 0.1), 0.05, &[16, 64, 256, 1024], 100, Seed::new(2)).unwrap();
    assert!(rows.windows(2).all(|w| w[1].frequency <= w[0].frequency), "{rows:?}");
    assert!(rows.windows(2).all(|w| w[1].median_abs < w[0].median_abs));
    assert!(rows[0].frequency > 0.0);
}

#[test]
fn concentration_scales_like_inverse_root_n() {
    let spec = DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0);
    let rows = concentration_estimate(&spec, c(2.0, 0.0), &[100, 400, 1600], 1.0, 1500, Seed::new(6)).unwrap();
    let base = rows[0].q_sqrt_n;
    assert!(
        rows.iter()
            .all(|r| r.q_sqrt_n <= 2.0 * base && r.q_sqrt_n >= 0.4 * base),
        "{rows:?}"
    );
    assert!(rows.windows(2).all(|w| w[1].q < w[0].q));
}

#[test]
fn tightness_does_not_grow() {
    let spec = DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0);
    let meds: Vec<f64> = [32usize, 128, 512]
        .iter()
        .map(|&n| {
            let v: Vec<f64> = (0..5)
                .map(|t| {
                    let roots = RootSample::new(sample(&spec, n, trial_seed(Seed::new(3), n, t)).unwrap()).unwrap();
                    tightness_statistic(&roots, 1.5, 128).unwrap()
                })
                .collect();
            median(&v)
        })
        .collect();
    assert!(meds.windows(2).all(|w| w[1] <= w[0]), "{meds:?}");
}

#[test]
fn field_export_masks_singular_cells() {
    let roots =
        RootSample::new(sample(&DistributionSpec::gaussian(c(0.0, 0.0), 1.0), 30, Seed::new(1)).unwrap()).unwrap();
    let crits = critical_points(&roots, &SolverSettings::default()).unwrap();
    let field = GridField::scaled_log_field(&roots, Some(&crits), GridSpec::square(c(0.0, 0.0), 3.0, 64)).unwrap();
    let poles = field.mask.iter().filter(|m| **m == CellMask::Pole).count();
    assert!(poles > 0 && poles <= 30);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    let side = field.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 64);
    let empty = text.lines().flat_map(|l| l.split(',')).filter(|v| v.is_empty()).count();
    assert_eq!(empty, field.mask.iter().filter(|m| **m != CellMask::Clear).count());
    assert!(side.exists());
}
