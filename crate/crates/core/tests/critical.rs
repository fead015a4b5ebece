use critlab::critical::{
    coefficient_oracle, critical_points, optimal_pairing_distance, verify_gauss_lucas, SolverSettings,
};
use critlab::measures::{sample, DistributionSpec, Seed};
use critlab::poly_field::RootSample;
use critlab::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn families() -> Vec<(&'static str, DistributionSpec)> {
    vec![
        ("gaussian", DistributionSpec::gaussian(c(0.0, 0.0), 1.0)),
        ("disk", DistributionSpec::uniform_disk(c(0.5, -0.5), 2.0)),
        ("circle", DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0)),
        (
            "atoms",
            DistributionSpec::finite_atoms(vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)], vec![0.5, 0.3, 0.2]),
        ),
        ("cauchy", DistributionSpec::radial_cauchy(c(0.0, 0.0), 1.0)),
    ]
}

#[test]
fn solver_agrees_with_companion_oracle() {
    for (name, spec) in families() {
        for (i, n) in [2usize, 5, 16, 40, 64].into_iter().enumerate() {
            let xs = sample(&spec, n, Seed::new(100 + i as u64)).unwrap();
            let roots = RootSample::new(xs).unwrap();
            let cs = critical_points(&roots, &SolverSettings::default()).unwrap();
            assert!(cs.converged, "{name} n={n}");
            let oracle = coefficient_oracle(&roots).unwrap();
            let gap = optimal_pairing_distance(&cs.points, &oracle).unwrap();
            let scale = 1.0 + roots.max_modulus();
            assert!(gap <= 1e-6 * scale, "{name} n={n}: gap {gap}");
        }
    }
}

#[test]
fn gauss_lucas_and_mean_identity() {
    for (name, spec) in families() {
        let xs = sample(&spec, 300, Seed::new(7)).unwrap();
        let roots = RootSample::new(xs.clone()).unwrap();
        let cs = critical_points(&roots, &SolverSettings::default()).unwrap();
        assert!(cs.converged, "{name}: {} after {}", cs.max_residual(), cs.iterations);
        assert_eq!(cs.len(), 299);
        assert!(verify_gauss_lucas(&xs, &cs.points, 1e-9).passed(), "{name}");
        let gap = (cs.mean() - roots.mean()).norm();
        assert!(gap <= 1e-9 * (1.0 + roots.max_modulus()), "{name}: {gap}");
    }
}

#[test]
fn translation_equivariance() {
    let spec = DistributionSpec::gaussian(c(0.0, 0.0), 1.0);
    let xs = sample(&spec, 200, Seed::new(3)).unwrap();
    let roots = RootSample::new(xs).unwrap();
    let shift = c(0.75, -1.25);
    let a = critical_points(&roots, &SolverSettings::default()).unwrap();
    let b = critical_points(&roots.translated(shift), &SolverSettings::default()).unwrap();
    let moved: Vec<Complex64> = a.points.iter().map(|z| z + shift).collect();
    assert!(optimal_pairing_distance(&moved, &b.points).unwrap() < 1e-9);
}

#[test]
fn repeated_roots_keep_exact_multiplicity() {
    let mut xs = sample(&DistributionSpec::uniform_disk(c(0.0, 0.0), 1.0), 50, Seed::new(9)).unwrap();
    let w = c(0.3, 0.1);
    xs.extend(std::iter::repeat(w).take(5));
    let roots = RootSample::new(xs).unwrap();
    let cs = critical_points(&roots, &SolverSettings::default()).unwrap();
    assert_eq!(cs.points.iter().filter(|z| **z == w).count(), 4);
    assert!(cs.converged);
}

#[test]
fn large_sample_solves() {
    let xs = sample(&DistributionSpec::uniform_disk(c(0.0, 0.0), 1.0), 2048, Seed::new(21)).unwrap();
    let roots = RootSample::new(xs).unwrap();
    let start = std::time::Instant::now();
    let cs = critical_points(&roots, &SolverSettings::default()).unwrap();
    eprintln!("n=2048: {} sweeps, {:?}", cs.iterations, start.elapsed());
    assert!(cs.converged, "max residual {}", cs.max_residual());
    assert_eq!(cs.len(), 2047);
}

#[test]
fn heavy_tails_converge_in_few_sweeps() {
    let spec = DistributionSpec::radial_cauchy(c(0.0, 0.0), 1.0);
    for (k, n) in [256usize, 1024].into_iter().enumerate() {
        let roots = RootSample::new(sample(&spec, n, Seed::new(40 + k as u64)).unwrap()).unwrap();
        let cs = critical_points(&roots, &SolverSettings::default()).unwrap();
        assert!(cs.converged, "n={n}: max residual {}", cs.max_residual());
        assert!(cs.iterations <= 40, "n={n}: {} sweeps", cs.iterations);
        let mean_gap = (cs.mean() - roots.mean()).norm();
        assert!(mean_gap <= 1e-9 * (1.0 + roots.max_modulus()), "{mean_gap:e}");
    }
}
