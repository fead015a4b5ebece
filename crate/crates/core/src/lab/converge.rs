use std::collections::BTreeMap;
use std::time::Instant;

use crate::critical::{critical_points, verify_gauss_lucas, SolverSettings};
use crate::diagnostics::trial_seed;
use crate::measures::{discretize, sample};
use crate::poly_field::RootSample;
use crate::transport::{slice_seed, wasserstein1_auto, EmpiricalMeasure};
use crate::Result;

use super::config::{ExperimentConfig, Metric};
use super::manifest::{RunCommand, RunManifest};
use super::runner::{num, opt, pool, run_ordered, summarize, CsvSink};
use super::RunOutcome;

pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
/// Wall-clock times per trial; not part of the reproducible outputs.
pub const TIMINGS_FILE: &str = "timings.csv";

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "n",
    "trial",
    "seed",
    "solver_converged",
    "w1_crit_root",
    "w1_crit_ref",
    "w1_root_ref",
    "vieta_gap",
    "hull_violations",
    "w1_exact",
];

/// Gauss–Lucas tolerance, relative to the hull diameter.
const HULL_TOL: f64 = 1e-8;

/// One line of `convergence.csv`; metrics not requested are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub solver_converged: bool,
    pub w1_crit_root: Option<f64>,
    pub w1_crit_ref: Option<f64>,
    pub w1_root_ref: Option<f64>,
    pub vieta_gap: Option<f64>,
    pub hull_violations: Option<usize>,
    /// Every distance in the row came from the exact solver.
    pub w1_exact: bool,
    pub runtime_ms: f64,
}

impl TrialRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.solver_converged.to_string(),
            opt(self.w1_crit_root),
            opt(self.w1_crit_ref),
            opt(self.w1_root_ref),
            opt(self.vieta_gap),
            self.hull_violations.map(|v| v.to_string()).unwrap_or_default(),
            self.w1_exact.to_string(),
        ]
    }

    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::W1CritRoot => self.w1_crit_root,
            Metric::W1CritRef => self.w1_crit_ref,
            Metric::W1RootRef => self.w1_root_ref,
            Metric::VietaGap => self.vieta_gap,
            Metric::HullViolations => self.hull_violations.map(|v| v as f64),
        }
    }
}

/// Runs one `(n, trial)` cell of the experiment.
pub fn convergence_trial(
    config: &ExperimentConfig,
    reference: Option<&EmpiricalMeasure>,
    n: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let clock = Instant::now();
    let seed = trial_seed(config.master_seed(), n, trial);
    let roots = RootSample::new(sample(&config.spec, n, seed)?)?;
    let crits = critical_points(&roots, &SolverSettings::default())?;
    let want = |m: Metric| config.metrics.contains(&m);
    let slices = slice_seed(seed.stream, n);
    let mut exact = true;
    let mut w1 = |a: &EmpiricalMeasure, b: &EmpiricalMeasure| -> Result<f64> {
        let (v, e) = wasserstein1_auto(a, b, slices)?;
        exact &= e;
        Ok(v)
    };

    let crit_measure = EmpiricalMeasure::from_points(&crits.points)?;
    let root_measure = EmpiricalMeasure::from_points(roots.points())?;
    let w1_crit_root = if want(Metric::W1CritRoot) {
        Some(w1(&crit_measure, &root_measure)?)
    } else {
        None
    };
    let (w1_crit_ref, w1_root_ref) = match reference {
        Some(r) => (
            if want(Metric::W1CritRef) {
                Some(w1(&crit_measure, r)?)
            } else {
                None
            },
            if want(Metric::W1RootRef) {
                Some(w1(&root_measure, r)?)
            } else {
                None
            },
        ),
        None => (None, None),
    };
    let vieta_gap = want(Metric::VietaGap).then(|| (crits.mean() - roots.mean()).norm());
    let hull_violations = want(Metric::HullViolations).then(|| {
        verify_gauss_lucas(roots.points(), &crits.points, HULL_TOL)
            .violations
            .len()
    });
    Ok(TrialRecord {
        n,
        trial,
        seed: seed.stream,
        solver_converged: crits.converged,
        w1_crit_root,
        w1_crit_ref,
        w1_root_ref,
        vieta_gap,
        hull_violations,
        w1_exact: exact,
        runtime_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

/// The reference law as a weighted point cloud, when a metric needs it.
pub fn reference_measure(config: &ExperimentConfig) -> Result<Option<EmpiricalMeasure>> {
    if !(config.metrics.contains(&Metric::W1CritRef) || config.metrics.contains(&Metric::W1RootRef)) {
        return Ok(None);
    }
    let (atoms, weights) = discretize(&config.spec, config.reference_atoms)?;
    Ok(Some(EmpiricalMeasure::new(atoms, weights)?.merged()))
}

/// Per-`n` median and quartiles of every requested metric, plus the number
/// of trials whose solver did not converge.
pub fn summary_rows(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<Vec<String>> {
    let mut by_n: BTreeMap<usize, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    let mut rows = Vec::new();
    for (n, recs) in by_n {
        let nonconverged = recs.iter().filter(|r| !r.solver_converged).count();
        for m in Metric::ALL.into_iter().filter(|m| config.metrics.contains(m)) {
            let values: Vec<f64> = recs.iter().filter_map(|r| r.metric(m)).collect();
            let (count, q) = summarize(&values);
            let [q1, med, q3] = q.map(|q| q.map(num)).unwrap_or_default();
            rows.push(vec![
                n.to_string(),
                m.as_str().to_string(),
                count.to_string(),
                med,
                q1,
                q3,
                nonconverged.to_string(),
            ]);
        }
    }
    rows
}

/// The convergence experiment: for each `n` in the ladder and each trial,
/// sample roots, solve for the critical points and record the requested
/// metrics. Writes `convergence.csv`, `summary.csv`, `timings.csv` and
/// `manifest.json` into `config.output_dir`.
///
/// Solver non-convergence is recorded per row and does not stop the run.
pub fn run_convergence(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut manifest = RunManifest::start(RunCommand::Converge, config, true);
    manifest.write()?;
    let result = (|| -> Result<Vec<TrialRecord>> {
        let reference = reference_measure(config)?;
        let workers = pool(config.workers)?;
        let tasks: Vec<(usize, usize)> = config
            .n_ladder
            .iter()
            .flat_map(|&n| (0..config.trials).map(move |t| (n, t)))
            .collect();
        let dir = &config.output_dir;
        let mut rows = CsvSink::create(&dir.join(CONVERGENCE_FILE), &CONVERGENCE_HEADER)?;
        let mut timings = CsvSink::create(&dir.join(TIMINGS_FILE), &["n", "trial", "runtime_ms"])?;
        let mut records = Vec::with_capacity(tasks.len());
        run_ordered(
            &workers,
            &tasks,
            |&(n, t)| convergence_trial(config, reference.as_ref(), n, t),
            |_, rec| {
                rows.row(rec.fields())?;
                timings.row([
                    rec.n.to_string(),
                    rec.trial.to_string(),
                    format!("{:.3}", rec.runtime_ms),
                ])?;
                records.push(rec);
                Ok(())
            },
        )?;
        let mut summary = CsvSink::create(
            &dir.join(SUMMARY_FILE),
            &["n", "metric", "count", "median", "q1", "q3", "nonconverged"],
        )?;
        for row in summary_rows(config, &records) {
            summary.row(row)?;
        }
        Ok(records)
    })();
    match result {
        Ok(records) => {
            manifest.finish(&[CONVERGENCE_FILE, SUMMARY_FILE])?;
            let nonconverged = records.iter().filter(|r| !r.solver_converged).count();
            Ok(RunOutcome {
                manifest,
                nonconverged,
                records,
            })
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}
