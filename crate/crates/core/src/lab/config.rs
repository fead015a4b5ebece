use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::TestFunction;
use crate::measures::{DistributionSpec, Seed};
use crate::numeric::QuadratureSettings;
use crate::{Complex64, Error, Result};

use super::manifest::RunManifest;

/// Per-trial quantities of the convergence experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// W1 between the critical-point measure and the root measure.
    W1CritRoot,
    /// W1 between the critical-point measure and a discretized reference law.
    W1CritRef,
    W1RootRef,
    /// `|mean(critical points) - mean(roots)|`, zero in exact arithmetic.
    VietaGap,
    /// Critical points outside the convex hull of the roots.
    HullViolations,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::W1CritRoot,
        Metric::W1CritRef,
        Metric::W1RootRef,
        Metric::VietaGap,
        Metric::HullViolations,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::W1CritRoot => "w1_crit_root",
            Metric::W1CritRef => "w1_crit_ref",
            Metric::W1RootRef => "w1_root_ref",
            Metric::VietaGap => "vieta_gap",
            Metric::HullViolations => "hull_violations",
        }
    }
}

/// The diagnostic tables `run_diagnostic` can produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Lemma2,
    PoissonJensen,
    Green,
    DerivativeIdentity,
    Tightness,
    Concentration,
}

impl DiagnosticKind {
    pub const ALL: [DiagnosticKind; 6] = [
        DiagnosticKind::Lemma2,
        DiagnosticKind::PoissonJensen,
        DiagnosticKind::Green,
        DiagnosticKind::DerivativeIdentity,
        DiagnosticKind::Tightness,
        DiagnosticKind::Concentration,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::Lemma2 => "lemma2",
            DiagnosticKind::PoissonJensen => "poisson-jensen",
            DiagnosticKind::Green => "green",
            DiagnosticKind::DerivativeIdentity => "derivative-identity",
            DiagnosticKind::Tightness => "tightness",
            DiagnosticKind::Concentration => "concentration",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiagnosticKind {
    type Err = Error;

    /// Accepts the command-line name or its snake_case form.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::UnknownDiagnostic {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Knobs of the diagnostic tables. Unset points and radii are derived from
/// the distribution's extent `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticParams {
    /// Evaluation point of `lemma2` and `concentration`; default `(0.31 + 0.17i) E`.
    pub z: Option<Complex64>,
    pub eps: f64,
    pub delta: f64,
    /// Tightness disk radius; default `1.5 E`.
    pub radius: Option<f64>,
    /// Cells per axis of the tightness grid.
    pub resolution: usize,
    /// Grid refinements for `green` and `derivative-identity`.
    pub grid_resolutions: Vec<usize>,
    /// Test function of the Green identities; default a smooth bump of
    /// radius `3 E` at the origin. The grid is the square circumscribing its support.
    pub test_function: Option<TestFunction>,
    /// Random interior points per instance for `poisson-jensen`.
    pub points_per_instance: usize,
    /// Interior points are drawn from the disk `|z| < fraction * r`.
    pub interior_fraction: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for DiagnosticParams {
    fn default() -> Self {
        Self {
            z: None,
            eps: 0.05,
            delta: 1.0,
            radius: None,
            resolution: 256,
            grid_resolutions: vec![128, 256, 512],
            test_function: None,
            points_per_instance: 20,
            interior_fraction: 0.9,
            quadrature: QuadratureSettings::default(),
        }
    }
}

impl DiagnosticParams {
    pub fn point(&self, spec: &DistributionSpec) -> Complex64 {
        self.z.unwrap_or_else(|| Complex64::new(0.31, 0.17) * spec.extent())
    }

    pub fn tightness_radius(&self, spec: &DistributionSpec) -> f64 {
        self.radius.unwrap_or_else(|| 1.5 * spec.extent())
    }

    pub fn phi(&self, spec: &DistributionSpec) -> TestFunction {
        self.test_function
            .unwrap_or_else(|| TestFunction::smooth_bump(Complex64::new(0.0, 0.0), 3.0 * spec.extent()))
    }
}

fn default_ladder() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024, 2048]
}

fn default_trials() -> usize {
    50
}

fn default_metrics() -> Vec<Metric> {
    vec![
        Metric::W1CritRoot,
        Metric::W1CritRef,
        Metric::VietaGap,
        Metric::HullViolations,
    ]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/latest")
}

fn default_workers() -> usize {
    1
}

fn default_reference_atoms() -> usize {
    4096
}

/// One experiment, as read from a JSON file. Only `spec` is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    #[serde(default = "default_ladder")]
    pub n_ladder: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Master seed; trial `t` at size `n` uses `trial_seed(seed, n, t)`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticKind>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; never changes any output byte.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Size of the quasi-random discretization of the reference law.
    #[serde(default = "default_reference_atoms")]
    pub reference_atoms: usize,
    #[serde(default)]
    pub params: DiagnosticParams,
}

impl ExperimentConfig {
    pub fn new(spec: DistributionSpec) -> Self {
        Self {
            spec,
            n_ladder: default_ladder(),
            trials: default_trials(),
            seed: 0,
            metrics: default_metrics(),
            diagnostics: Vec::new(),
            output_dir: default_output_dir(),
            workers: default_workers(),
            reference_atoms: default_reference_atoms(),
            params: DiagnosticParams::default(),
        }
    }

    pub fn master_seed(&self) -> Seed {
        Seed::new(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate().map_err(|e| Error::Config(format!("spec: {e}")))?;
        if self.n_ladder.is_empty() {
            return Err(Error::Config("n_ladder is empty".into()));
        }
        if let Some(n) = self.n_ladder.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("n_ladder entries must be at least 2, got {n}")));
        }
        if self.n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "n_ladder must be strictly increasing, got {:?}",
                self.n_ladder
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.reference_atoms == 0 {
            return Err(Error::Config("reference_atoms must be at least 1".into()));
        }
        let p = &self.params;
        if !(p.eps > 0.0 && p.delta > 0.0) {
            return Err(Error::Config("params.eps and params.delta must be positive".into()));
        }
        if p.resolution == 0 || p.points_per_instance == 0 {
            return Err(Error::Config(
                "params.resolution and params.points_per_instance must be positive".into(),
            ));
        }
        if p.grid_resolutions.len() < 2 || p.grid_resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "params.grid_resolutions needs at least two strictly increasing entries".into(),
            ));
        }
        if !(p.interior_fraction > 0.0 && p.interior_fraction < 1.0) {
            return Err(Error::Config("params.interior_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// What a `--config` file turned out to hold.
#[derive(Clone, Debug)]
pub enum ConfigSource {
    Config(Box<ExperimentConfig>),
    /// A previous run's manifest; re-running it replays the same config.
    Manifest(Box<RunManifest>),
}

impl ConfigSource {
    pub fn config(&self) -> &ExperimentConfig {
        match self {
            ConfigSource::Config(c) => c,
            ConfigSource::Manifest(m) => &m.config,
        }
    }

    pub fn into_config(self) -> ExperimentConfig {
        match self {
            ConfigSource::Config(c) => *c,
            ConfigSource::Manifest(m) => m.config,
        }
    }
}

/// Reads a config or a run manifest. Parse errors carry line and column.
pub fn load_config(path: &Path) -> Result<ConfigSource> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ConfigSource> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("manifest_version").is_some() {
        Ok(ConfigSource::Manifest(Box::new(serde_json::from_value(value)?)))
    } else {
        // Re-parse from text so errors keep their position.
        Ok(ConfigSource::Config(Box::new(ExperimentConfig::from_json(text)?)))
    }
}
