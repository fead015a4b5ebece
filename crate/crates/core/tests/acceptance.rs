//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use critlab::critical::{
    coefficient_oracle, critical_points, optimal_pairing_distance, verify_gauss_lucas, SolverSettings,
};
use critlab::diagnostics::*;
use critlab::lab::{rerun, run_convergence, run_diagnostic, ExperimentConfig, Metric, RunManifest, MANIFEST_FILE};
use critlab::measures::{line_log_minus_integral, sample, DistributionSpec, Seed};
use critlab::numeric::{median, QuadratureSettings};
use critlab::poly_field::RootSample;
use critlab::transport::{slice_seed, sliced_wasserstein1, wasserstein1_auto, EmpiricalMeasure, DEFAULT_SLICES};
use critlab::Complex64;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome, u64);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ok(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

const DYADIC: [usize; 6] = [64, 128, 256, 512, 1024, 2048];

fn pi_over_two() -> Outcome {
    let v = log_minus_area_integral(c(0.0, 0.0), 512).map_err(fail)?;
    let err = (v - FRAC_PI_2).abs();
    ok(err <= 1e-3, format!("integral {v:.8}, error {err:.1e}"))
}

fn line_constant() -> Outcome {
    let quad = QuadratureSettings::default();
    let mut worst: f64 = 0.0;
    for x in [0.0, 0.37, -2.5, 1e3] {
        worst = worst.max((line_log_minus_integral(x, &quad) - 2.0).abs());
    }
    ok(worst <= 1e-6, format!("worst error {worst:.1e} over 4 offsets"))
}

/// Mixed families for the solver check, including repeated roots.
fn solver_instance(k: usize, rng: &mut impl Rng) -> DistributionSpec {
    let o = c(0.0, 0.0);
    match k % 7 {
        0 => DistributionSpec::gaussian(o, 1.0),
        1 => DistributionSpec::uniform_circle(c(0.5, -0.3), 2.0),
        2 => DistributionSpec::uniform_disk(o, 1.0),
        3 => DistributionSpec::radial_cauchy(o, 1.0),
        4 => DistributionSpec::finite_atoms(vec![o, c(1.0, 0.0)], vec![0.5, 0.5]),
        5 => {
            let atoms: Vec<Complex64> = (0..3)
                .map(|_| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            DistributionSpec::finite_atoms(atoms, vec![0.5, 0.3, 0.2])
        }
        _ => DistributionSpec::mixture(
            vec![
                DistributionSpec::point_mass(c(0.2, 0.1)),
                DistributionSpec::gaussian(o, 1.0),
            ],
            vec![0.4, 0.6],
        ),
    }
}

fn solver_correctness() -> Outcome {
    let mut rng = Seed::new(3).rng();
    let mut worst_pair: f64 = 0.0;
    let mut worst_vieta: f64 = 0.0;
    let mut repeated = 0;
    for k in 0..500 {
        let n = rng.random_range(2..=30);
        let spec = solver_instance(k, &mut rng);
        let roots = RootSample::new(sample(&spec, n, Seed::new(3).child(k as u64)).map_err(fail)?).map_err(fail)?;
        let crits = critical_points(&roots, &SolverSettings::default()).map_err(fail)?;
        if crits.len() != n - 1 {
            return Err(format!("instance {k}: {} critical points for n = {n}", crits.len()));
        }
        let oracle = coefficient_oracle(&roots).map_err(fail)?;
        let pair = optimal_pairing_distance(&crits.points, &oracle).map_err(fail)?;
        let vieta = (crits.mean() - roots.mean()).norm() / (1.0 + roots.max_modulus());
        let hull = verify_gauss_lucas(roots.points(), &crits.points, 1e-8);
        if pair > 1e-6 || vieta > 1e-9 || !hull.passed() {
            return Err(format!(
                "instance {k} (n = {n}, {spec:?}): pairing {pair:.1e}, vieta {vieta:.1e}, hull violators {}",
                hull.violations.len()
            ));
        }
        let mut pts = roots.points().to_vec();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        repeated += usize::from(pts.windows(2).any(|w| w[0] == w[1]));
        worst_pair = worst_pair.max(pair);
        worst_vieta = worst_vieta.max(vieta);
    }
    ok(
        true,
        format!("500 instances ({repeated} with repeated roots), worst pairing {worst_pair:.1e}, worst vieta {worst_vieta:.1e}, no hull violators"),
    )
}

fn poisson_jensen() -> Outcome {
    let quad = QuadratureSettings::default();
    let specs = [
        DistributionSpec::gaussian(c(0.0, 0.0), 1.0),
        DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0),
        DistributionSpec::uniform_disk(c(0.3, 0.2), 1.0),
        DistributionSpec::finite_atoms(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![0.5, 0.5]),
    ];
    let mut rng = Seed::new(4).rng();
    let (mut points, mut worst): (usize, f64) = (0, 0.0);
    for k in 0..40 {
        let spec = &specs[k % specs.len()];
        let n = rng.random_range(2..=50);
        let seed = Seed::new(4).child(k as u64);
        let roots = RootSample::new(sample(spec, n, seed).map_err(fail)?).map_err(fail)?;
        let crits = critical_points(&roots, &SolverSettings::default()).map_err(fail)?;
        let (r, big_r) = choose_radii(spec, &roots, seed.child(1)).map_err(fail)?;
        for _ in 0..20 {
            let z = Complex64::from_polar(r * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            let rep = poisson_jensen_check(&roots, &crits, z, big_r, &quad).map_err(fail)?;
            if !rep.within(1e-6) {
                return Err(format!(
                    "n = {n}, z = {z}: residual {:.1e}, error estimate {:.1e}",
                    rep.residual, rep.i_n_error
                ));
            }
            worst = worst.max(rep.residual.abs());
            points += 1;
        }
    }
    ok(
        true,
        format!("{points} points over 40 instances, worst residual {worst:.1e}"),
    )
}

fn green_identities() -> Outcome {
    let roots = RootSample::new(sample(&DistributionSpec::gaussian(c(0.0, 0.0), 1.0), 50, Seed::new(5)).map_err(fail)?)
        .map_err(fail)?;
    let crits = critical_points(&roots, &SolverSettings::default()).map_err(fail)?;
    let phi = TestFunction::smooth_bump(c(0.0, 0.0), 5.0);
    let (mut hs, mut green, mut deriv) = (Vec::new(), Vec::new(), Vec::new());
    for res in [256, 512, 1024] {
        let grid = GridSpec::square(c(0.0, 0.0), 5.0, res);
        hs.push(grid.hx());
        green.push(green_identity_check(&roots, &phi, &grid).map_err(fail)?.discrepancy);
        deriv.push(
            derivative_identity_check(&roots, &crits, &phi, &grid)
                .map_err(fail)?
                .discrepancy,
        );
    }
    let (sg, sd) = (log_log_slope(&hs, &green), log_log_slope(&hs, &deriv));
    ok(
        sg >= 1.8 && sd >= 1.8 && green[2] < 1e-2 && deriv[2] < 1e-2,
        format!(
            "green {} slope {sg:.2}, derivative {} slope {sd:.2}",
            sci(&green),
            sci(&deriv)
        ),
    )
}

struct LadderMedians {
    auto: Vec<f64>,
    sliced: Vec<f64>,
    exact_at: Vec<bool>,
}

/// Median W1 between critical points and roots, with the convergence runner's
/// seeding, alongside the sliced estimate for every `n`.
fn w1_ladder(spec: &DistributionSpec, trials: usize) -> Result<LadderMedians, String> {
    let mut cfg = ExperimentConfig::new(spec.clone());
    cfg.n_ladder = DYADIC.to_vec();
    let master = cfg.master_seed();
    let mut out = LadderMedians {
        auto: Vec::new(),
        sliced: Vec::new(),
        exact_at: Vec::new(),
    };
    for &n in &DYADIC {
        let rows: Vec<(f64, f64, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64, bool), String> {
                let seed = trial_seed(master, n, t);
                let roots = RootSample::new(sample(spec, n, seed).map_err(fail)?).map_err(fail)?;
                let crits = critical_points(&roots, &SolverSettings::default()).map_err(fail)?;
                let a = EmpiricalMeasure::from_points(&crits.points).map_err(fail)?;
                let b = EmpiricalMeasure::from_points(roots.points()).map_err(fail)?;
                let s = slice_seed(seed.stream, n);
                let (w, exact) = wasserstein1_auto(&a, &b, s).map_err(fail)?;
                let sliced = sliced_wasserstein1(&a.merged(), &b.merged(), DEFAULT_SLICES, s)
                    .map_err(fail)?
                    .0;
                Ok((w, sliced, exact))
            })
            .collect::<Result<_, _>>()?;
        out.auto.push(median(&rows.iter().map(|r| r.0).collect::<Vec<_>>()));
        out.sliced.push(median(&rows.iter().map(|r| r.1).collect::<Vec<_>>()));
        out.exact_at.push(rows.iter().all(|r| r.2));
    }
    Ok(out)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn weak_convergence() -> Outcome {
    let o = c(0.0, 0.0);
    let families = [
        ("uniform_circle", DistributionSpec::uniform_circle(o, 1.0)),
        ("gaussian", DistributionSpec::gaussian(o, 1.0)),
        (
            "finite_atoms",
            DistributionSpec::finite_atoms(vec![o, c(1.0, 0.0)], vec![0.5, 0.5]),
        ),
        ("radial_cauchy", DistributionSpec::radial_cauchy(o, 1.0)),
    ];
    let mut lines = Vec::new();
    let mut good = true;
    for (name, spec) in &families {
        let m = w1_ladder(spec, 50)?;
        let ratio = m.auto[5] / m.auto[0];
        let this = strictly_decreasing(&m.auto) && ratio < 0.35 && strictly_decreasing(&m.sliced);
        good &= this;
        let exact = m.exact_at.iter().filter(|e| **e).count();
        lines.push(format!(
            "{name}: medians {} ratio {ratio:.3} (exact at {exact}/6 sizes), sliced {}",
            sci(&m.auto),
            sci(&m.sliced)
        ));
    }
    ok(good, lines.join("; "))
}

fn lemma2() -> Outcome {
    let spec = DistributionSpec::uniform_disk(c(0.0, 0.0), 1.0);
    let z = c(0.0, 0.0);
    certify_off_atom(&spec, z).map_err(fail)?;
    let rows = lemma2_statistic(&spec, z, 0.05, &DYADIC, 200, Seed::new(7)).map_err(fail)?;
    let freq: Vec<f64> = rows.iter().map(|r| r.frequency).collect();
    ok(freq.windows(2).all(|w| w[1] <= w[0]), format!("frequencies {freq:?}"))
}

fn concentration() -> Outcome {
    let spec = DistributionSpec::uniform_circle(c(0.0, 0.0), 1.0);
    let rows =
        concentration_estimate(&spec, c(2.0, 0.0), &[100, 1000, 10000], 1.0, 4000, Seed::new(8)).map_err(fail)?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.q_sqrt_n).collect();
    ok(
        scaled.iter().all(|&v| v <= 2.0 * scaled[0]),
        format!("Q*sqrt(n) = {} ({:?} part)", sci(&scaled), rows[0].component),
    )
}

fn tightness() -> Outcome {
    let spec = DistributionSpec::gaussian(c(0.0, 0.0), 1.0);
    let ladder = DYADIC;
    let mut meds = Vec::new();
    for &n in &ladder {
        let v: Vec<f64> = (0..20)
            .into_par_iter()
            .map(|t| -> Result<f64, String> {
                let roots =
                    RootSample::new(sample(&spec, n, trial_seed(Seed::new(9), n, t)).map_err(fail)?).map_err(fail)?;
                tightness_statistic(&roots, 1.5, 256).map_err(fail)
            })
            .collect::<Result<_, _>>()?;
        meds.push(median(&v));
    }
    ok(meds[meds.len() - 1] <= 1.5 * meds[0], format!("medians {}", sci(&meds)))
}

fn same_bodies(a: &RunManifest, b: &RunManifest) -> Result<(), String> {
    if a.outputs.is_empty() || a.outputs != b.outputs {
        return Err(format!("{:?} vs {:?}", a.outputs, b.outputs));
    }
    for o in &a.outputs {
        let x = std::fs::read(a.config.output_dir.join(&o.file)).map_err(fail)?;
        let y = std::fs::read(b.config.output_dir.join(&o.file)).map_err(fail)?;
        if x != y {
            return Err(format!("{} differs", o.file));
        }
    }
    Ok(())
}

/// Runs at one worker, then replays the manifest from disk at eight.
fn replay(dir: &Path, cfg: &ExperimentConfig, diagnostic: Option<&str>) -> Result<usize, String> {
    let mut cfg = cfg.clone();
    cfg.output_dir = dir.join("w1");
    cfg.workers = 1;
    let first = match diagnostic {
        Some(name) => run_diagnostic(name, &cfg),
        None => run_convergence(&cfg),
    }
    .map_err(fail)?;
    let mut manifest = RunManifest::read(&cfg.output_dir.join(MANIFEST_FILE)).map_err(fail)?;
    manifest.config.output_dir = dir.join("w8");
    manifest.config.workers = 8;
    let second = rerun(&manifest).map_err(fail)?;
    same_bodies(&first.manifest, &second.manifest)?;
    Ok(first.manifest.outputs.len())
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(fail)?;
    let mut cfg = ExperimentConfig::new(DistributionSpec::gaussian(c(0.0, 0.0), 1.0));
    cfg.n_ladder = vec![16, 64, 256];
    cfg.trials = 8;
    cfg.seed = 10;
    cfg.metrics = Metric::ALL.to_vec();
    cfg.reference_atoms = 512;
    cfg.params.resolution = 64;
    cfg.params.points_per_instance = 4;
    let mut files = replay(&tmp.path().join("converge"), &cfg, None)?;
    let mut small = cfg.clone();
    small.n_ladder = vec![8, 32];
    small.trials = 4;
    for name in [
        "lemma2",
        "concentration",
        "tightness",
        "poisson-jensen",
        "green",
        "derivative-identity",
    ] {
        files += replay(&tmp.path().join(name), &small, Some(name))?;
    }
    ok(
        true,
        format!("{files} files identical at 1 and 8 workers (convergence and six diagnostics)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pi/2 constant of the planar log_- integral", pi_over_two, 1),
        ("constant 2 of the line log_- integral", line_constant, 1),
        ("solver against the coefficient oracle", solver_correctness, 30),
        ("Poisson-Jensen identity", poisson_jensen, 60),
        ("Green and derivative identities", green_identities, 300),
        ("W1 between critical points and roots", weak_convergence, 900),
        ("deviation frequency of (1/n) log|L_n(z)|", lemma2, 300),
        ("concentration function", concentration, 300),
        ("tightness statistic", tightness, 300),
        ("manifest reruns", reproducibility, 300),
    ];
    let mut failures = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let result = check();
        let elapsed = clock.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let timing = format!("{:.2}s of {budget}s", elapsed.as_secs_f64());
        failures += usize::from(!pass);
        println!(
            "{} criterion {}: {name}: {detail} ({timing}{})",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
