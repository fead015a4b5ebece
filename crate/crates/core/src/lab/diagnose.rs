use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rayon::ThreadPool;

use crate::critical::{critical_points, SolverSettings};
use crate::diagnostics::{
    choose_radii, concentration_estimate, derivative_identity_check, green_identity_check, lemma2_statistic,
    log_log_slope, poisson_jensen_check, tightness_statistic, trial_seed, GridSpec,
};
use crate::measures::sample;
use crate::poly_field::RootSample;
use crate::{Complex64, Error, Result};

use super::config::{DiagnosticKind, ExperimentConfig};
use super::manifest::{RunCommand, RunManifest};
use super::runner::{num, pool, run_ordered, summarize, CsvSink};
use super::RunOutcome;

/// Residual floor of the Poisson–Jensen table.
pub const PJ_FLOOR: f64 = 1e-6;

/// Main CSV of a diagnostic, e.g. `poisson_jensen.csv`.
pub fn diagnostic_file(kind: DiagnosticKind) -> String {
    format!("{}.csv", kind.name().replace('-', "_"))
}

/// Secondary CSV (slopes or per-`n` summary), if the diagnostic has one.
pub fn diagnostic_summary_file(kind: DiagnosticKind) -> Option<String> {
    let stem = kind.name().replace('-', "_");
    match kind {
        DiagnosticKind::Green | DiagnosticKind::DerivativeIdentity => Some(format!("{stem}_slopes.csv")),
        DiagnosticKind::Tightness | DiagnosticKind::PoissonJensen => Some(format!("{stem}_summary.csv")),
        DiagnosticKind::Lemma2 | DiagnosticKind::Concentration => None,
    }
}

fn trial_tasks(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config
        .n_ladder
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |t| (n, t)))
        .collect()
}

fn roots_for(config: &ExperimentConfig, n: usize, t: usize) -> Result<(u64, RootSample)> {
    let seed = trial_seed(config.master_seed(), n, t);
    Ok((seed.stream, RootSample::new(sample(&config.spec, n, seed)?)?))
}

/// Runs diagnostic `name` (command-line or snake_case spelling) over the
/// config's ladder and trials and writes its CSV tables and manifest into
/// `config.output_dir`.
///
/// | name | main CSV columns |
/// |------|------------------|
/// | `lemma2` | `n, trials, exceedances, frequency, median_abs` |
/// | `concentration` | `n, trials, component, delta, q, q_sqrt_n` |
/// | `tightness` | `n, trial, seed, radius, t_n` (+ per-`n` summary) |
/// | `poisson-jensen` | `n, trial, seed, point, z_re, z_im, r, big_r, lhs, i_n, i_n_error, crit_sum, root_sum, roots_in_disk, crits_in_disk, residual, within` (+ per-`n` summary) |
/// | `green`, `derivative-identity` | `n, trial, seed, resolution, h, lhs, rhs, discrepancy` (+ fitted slopes) |
pub fn run_diagnostic(name: &str, config: &ExperimentConfig) -> Result<RunOutcome> {
    let kind: DiagnosticKind = name.parse()?;
    config.validate()?;
    if !config.diagnostics.is_empty() && !config.diagnostics.contains(&kind) {
        let enabled: Vec<&str> = config.diagnostics.iter().map(|k| k.name()).collect();
        return Err(Error::Config(format!(
            "diagnostic {} is not enabled by this config (enabled: {})",
            kind.name(),
            enabled.join(", ")
        )));
    }
    std::fs::create_dir_all(&config.output_dir)?;
    let mut manifest = RunManifest::start(RunCommand::Diagnose { name: kind }, config, true);
    manifest.write()?;
    let result = (|| -> Result<usize> {
        let workers = pool(config.workers)?;
        match kind {
            DiagnosticKind::Lemma2 => lemma2_table(config, &workers).map(|_| 0),
            DiagnosticKind::Concentration => concentration_table(config, &workers).map(|_| 0),
            DiagnosticKind::Tightness => tightness_table(config, &workers).map(|_| 0),
            DiagnosticKind::PoissonJensen => poisson_jensen_table(config, &workers),
            DiagnosticKind::Green | DiagnosticKind::DerivativeIdentity => identity_table(config, kind, &workers),
        }
    })();
    match result {
        Ok(nonconverged) => {
            let mut files = vec![diagnostic_file(kind)];
            files.extend(diagnostic_summary_file(kind));
            let refs: Vec<&str> = files.iter().map(String::as_str).collect();
            manifest.finish(&refs)?;
            Ok(RunOutcome {
                manifest,
                nonconverged,
                records: Vec::new(),
            })
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}

fn lemma2_table(config: &ExperimentConfig, workers: &ThreadPool) -> Result<()> {
    let z = config.params.point(&config.spec);
    let mut out = CsvSink::create(
        &config.output_dir.join(diagnostic_file(DiagnosticKind::Lemma2)),
        &["n", "trials", "exceedances", "frequency", "median_abs"],
    )?;
    run_ordered(
        workers,
        &config.n_ladder,
        |&n| {
            let rows = lemma2_statistic(
                &config.spec,
                z,
                config.params.eps,
                &[n],
                config.trials,
                config.master_seed(),
            )?;
            Ok(rows.into_iter().next().expect("one row per n"))
        },
        |_, r| {
            out.row([
                r.n.to_string(),
                r.trials.to_string(),
                r.exceedances.to_string(),
                num(r.frequency),
                num(r.median_abs),
            ])
        },
    )
}

fn concentration_table(config: &ExperimentConfig, workers: &ThreadPool) -> Result<()> {
    let z = config.params.point(&config.spec);
    let mut out = CsvSink::create(
        &config.output_dir.join(diagnostic_file(DiagnosticKind::Concentration)),
        &["n", "trials", "component", "delta", "q", "q_sqrt_n"],
    )?;
    run_ordered(
        workers,
        &config.n_ladder,
        |&n| {
            let rows = concentration_estimate(
                &config.spec,
                z,
                &[n],
                config.params.delta,
                config.trials,
                config.master_seed(),
            )?;
            Ok(rows.into_iter().next().expect("one row per n"))
        },
        |_, r| {
            let component = serde_json::to_value(r.component)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            out.row([
                r.n.to_string(),
                r.trials.to_string(),
                component,
                num(r.delta),
                num(r.q),
                num(r.q_sqrt_n),
            ])
        },
    )
}

fn write_summary(path: &std::path::Path, by_n: &BTreeMap<usize, Vec<f64>>) -> Result<()> {
    let mut out = CsvSink::create(path, &["n", "count", "median", "q1", "q3"])?;
    for (n, values) in by_n {
        let (count, q) = summarize(values);
        let [q1, med, q3] = q.map(|q| q.map(num)).unwrap_or_default();
        out.row([n.to_string(), count.to_string(), med, q1, q3])?;
    }
    Ok(())
}

fn tightness_table(config: &ExperimentConfig, workers: &ThreadPool) -> Result<()> {
    let kind = DiagnosticKind::Tightness;
    let radius = config.params.tightness_radius(&config.spec);
    let mut out = CsvSink::create(
        &config.output_dir.join(diagnostic_file(kind)),
        &["n", "trial", "seed", "radius", "t_n"],
    )?;
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    run_ordered(
        workers,
        &trial_tasks(config),
        |&(n, t)| {
            let (seed, roots) = roots_for(config, n, t)?;
            Ok((
                n,
                t,
                seed,
                tightness_statistic(&roots, radius, config.params.resolution)?,
            ))
        },
        |_, (n, t, seed, value)| {
            by_n.entry(n).or_default().push(value);
            out.row([n.to_string(), t.to_string(), seed.to_string(), num(radius), num(value)])
        },
    )?;
    write_summary(
        &config
            .output_dir
            .join(diagnostic_summary_file(kind).expect("tightness has a summary")),
        &by_n,
    )
}

fn poisson_jensen_table(config: &ExperimentConfig, workers: &ThreadPool) -> Result<usize> {
    let kind = DiagnosticKind::PoissonJensen;
    let p = &config.params;
    let mut out = CsvSink::create(
        &config.output_dir.join(diagnostic_file(kind)),
        &[
            "n",
            "trial",
            "seed",
            "point",
            "z_re",
            "z_im",
            "r",
            "big_r",
            "lhs",
            "i_n",
            "i_n_error",
            "crit_sum",
            "root_sum",
            "roots_in_disk",
            "crits_in_disk",
            "residual",
            "within",
        ],
    )?;
    let mut worst: BTreeMap<usize, (usize, f64, f64, usize)> = BTreeMap::new();
    let mut nonconverged = 0;
    run_ordered(
        workers,
        &trial_tasks(config),
        |&(n, t)| {
            let seed = trial_seed(config.master_seed(), n, t);
            let roots = RootSample::new(sample(&config.spec, n, seed)?)?;
            let crits = critical_points(&roots, &SolverSettings::default())?;
            let (r, big_r) = choose_radii(&config.spec, &roots, seed.child(1))?;
            let mut rng = seed.child(2).rng();
            let mut reports = Vec::with_capacity(p.points_per_instance);
            for _ in 0..p.points_per_instance {
                let rho = p.interior_fraction * r * rng.random::<f64>().sqrt();
                let z = Complex64::from_polar(rho, TAU * rng.random::<f64>());
                reports.push(poisson_jensen_check(&roots, &crits, z, big_r, &p.quadrature)?);
            }
            Ok((n, t, seed.stream, crits.converged, r, reports))
        },
        |_, (n, t, seed, converged, r, reports)| {
            if !converged {
                nonconverged += 1;
            }
            let entry = worst.entry(n).or_insert((0, 0.0, 0.0, 0));
            for (k, rep) in reports.iter().enumerate() {
                let within = rep.within(PJ_FLOOR);
                entry.0 += 1;
                entry.1 = entry.1.max(rep.residual.abs());
                entry.2 = entry.2.max(rep.i_n_error);
                entry.3 += within as usize;
                out.row([
                    n.to_string(),
                    t.to_string(),
                    seed.to_string(),
                    k.to_string(),
                    num(rep.z.re),
                    num(rep.z.im),
                    num(r),
                    num(rep.radius),
                    num(rep.lhs),
                    num(rep.i_n),
                    num(rep.i_n_error),
                    num(rep.crit_sum),
                    num(rep.root_sum),
                    rep.k_n().to_string(),
                    rep.l_n().to_string(),
                    num(rep.residual),
                    within.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    let mut summary = CsvSink::create(
        &config
            .output_dir
            .join(diagnostic_summary_file(kind).expect("poisson-jensen has a summary")),
        &["n", "points", "max_abs_residual", "max_error_estimate", "within"],
    )?;
    for (n, (points, res, err, within)) in worst {
        summary.row([
            n.to_string(),
            points.to_string(),
            num(res),
            num(err),
            within.to_string(),
        ])?;
    }
    Ok(nonconverged)
}

fn identity_table(config: &ExperimentConfig, kind: DiagnosticKind, workers: &ThreadPool) -> Result<usize> {
    let phi = config.params.phi(&config.spec);
    let resolutions = &config.params.grid_resolutions;
    let mut out = CsvSink::create(
        &config.output_dir.join(diagnostic_file(kind)),
        &["n", "trial", "seed", "resolution", "h", "lhs", "rhs", "discrepancy"],
    )?;
    let mut slopes = CsvSink::create(
        &config
            .output_dir
            .join(diagnostic_summary_file(kind).expect("identities have slopes")),
        &["n", "trial", "slope", "finest_discrepancy"],
    )?;
    let mut nonconverged = 0;
    run_ordered(
        workers,
        &trial_tasks(config),
        |&(n, t)| {
            let (seed, roots) = roots_for(config, n, t)?;
            let crits = match kind {
                DiagnosticKind::DerivativeIdentity => Some(critical_points(&roots, &SolverSettings::default())?),
                _ => None,
            };
            let checks = resolutions
                .iter()
                .map(|&res| {
                    let grid = GridSpec::square(phi.center(), phi.radius(), res);
                    let check = match &crits {
                        Some(c) => derivative_identity_check(&roots, c, &phi, &grid)?,
                        None => green_identity_check(&roots, &phi, &grid)?,
                    };
                    Ok((res, grid.hx(), check))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((n, t, seed, crits.as_ref().map_or(true, |c| c.converged), checks))
        },
        |_, (n, t, seed, converged, checks)| {
            if !converged {
                nonconverged += 1;
            }
            for (res, h, c) in &checks {
                out.row([
                    n.to_string(),
                    t.to_string(),
                    seed.to_string(),
                    res.to_string(),
                    num(*h),
                    num(c.lhs),
                    num(c.rhs),
                    num(c.discrepancy),
                ])?;
            }
            let hs: Vec<f64> = checks.iter().map(|c| c.1).collect();
            let ds: Vec<f64> = checks.iter().map(|c| c.2.discrepancy).collect();
            let slope = if ds.iter().all(|d| *d > 0.0) {
                log_log_slope(&hs, &ds)
            } else {
                f64::NAN
            };
            slopes.row([
                n.to_string(),
                t.to_string(),
                num(slope),
                num(*ds.last().unwrap_or(&f64::NAN)),
            ])
        },
    )?;
    Ok(nonconverged)
}
