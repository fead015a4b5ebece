use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{DiagnosticKind, ExperimentConfig};
use crate::diagnostics::trial_seed;
use crate::Result;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Which harness entry point produced a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunCommand {
    Converge,
    Diagnose { name: DiagnosticKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeed {
    pub n: usize,
    pub trial: usize,
    pub master: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the run directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to replay a run and check its outputs.
///
/// Timestamps live here and nowhere else, so CSV bodies depend only on
/// the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub command: RunCommand,
    pub config: ExperimentConfig,
    pub code_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: Option<u64>,
    /// `false` until every output has been written and digested.
    pub complete: bool,
    pub error: Option<String>,
    pub trial_seeds: Vec<TrialSeed>,
    pub outputs: Vec<OutputFile>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Lower-case hex SHA-256 of a file.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    /// An incomplete manifest; `with_seeds` records the per-trial seeds of
    /// the `(n, trial)` grid.
    pub fn start(command: RunCommand, config: &ExperimentConfig, with_seeds: bool) -> Self {
        let master = config.master_seed();
        let trial_seeds = if with_seeds {
            config
                .n_ladder
                .iter()
                .flat_map(|&n| {
                    (0..config.trials).map(move |t| TrialSeed {
                        n,
                        trial: t,
                        master: master.master,
                        stream: trial_seed(master, n, t).stream,
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            manifest_version: MANIFEST_VERSION,
            command,
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
            complete: false,
            error: None,
            trial_seeds,
            outputs: Vec::new(),
        }
    }

    pub fn path(&self) -> PathBuf {
        self.config.output_dir.join(MANIFEST_FILE)
    }

    pub fn write(&self) -> Result<()> {
        std::fs::create_dir_all(&self.config.output_dir)?;
        std::fs::write(self.path(), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Digests `files` (relative to the run directory) and marks the run complete.
    pub fn finish(&mut self, files: &[&str]) -> Result<()> {
        self.outputs = files
            .iter()
            .map(|f| {
                let p = self.config.output_dir.join(f);
                Ok(OutputFile {
                    file: f.to_string(),
                    sha256: file_sha256(&p)?,
                    bytes: std::fs::metadata(&p)?.len(),
                })
            })
            .collect::<Result<_>>()?;
        self.finished_unix_ms = Some(now_ms());
        self.complete = true;
        self.error = None;
        self.write()
    }

    /// Records a failure; the manifest stays incomplete.
    pub fn fail(&mut self, err: &crate::Error) -> Result<()> {
        self.finished_unix_ms = Some(now_ms());
        self.complete = false;
        self.error = Some(err.to_string());
        self.write()
    }

    /// Re-digests the listed outputs and returns the files whose content changed.
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut changed = Vec::new();
        for o in &self.outputs {
            let p = self.config.output_dir.join(&o.file);
            if !p.exists() || file_sha256(&p)? != o.sha256 {
                changed.push(o.file.clone());
            }
        }
        Ok(changed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DistributionSpec;
    use crate::Complex64;

    #[test]
    fn lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(DistributionSpec::uniform_circle(Complex64::new(0.0, 0.0), 1.0));
        cfg.n_ladder = vec![4, 8];
        cfg.trials = 3;
        cfg.output_dir = dir.path().to_path_buf();
        let mut m = RunManifest::start(RunCommand::Converge, &cfg, true);
        assert_eq!(m.trial_seeds.len(), 6);
        assert_eq!(m.trial_seeds[4].n, 8);
        m.write().unwrap();
        assert!(!RunManifest::read(&m.path()).unwrap().complete);

        std::fs::write(dir.path().join("a.csv"), "x\n1\n").unwrap();
        m.finish(&["a.csv"]).unwrap();
        let back = RunManifest::read(&m.path()).unwrap();
        assert!(back.complete);
        assert_eq!(back.outputs[0].bytes, 4);
        assert_eq!(back.outputs[0].sha256.len(), 64);
        assert!(back.verify().unwrap().is_empty());
        std::fs::write(dir.path().join("a.csv"), "x\n2\n").unwrap();
        assert_eq!(back.verify().unwrap(), vec!["a.csv".to_string()]);
    }

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, "abc").unwrap();
        assert_eq!(
            file_sha256(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
