use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use critlab::critical::{critical_points, SolverSettings};
use critlab::lab::{load_config, run_convergence, run_diagnostic, ExperimentConfig, RunOutcome};
use critlab::measures::{sample, DistributionSpec, Seed};
use critlab::poly_field::RootSample;
use critlab::{Complex64, Error};

#[derive(Parser)]
#[command(
    name = "critlab",
    version,
    about = "Critical points of random polynomials: solver, diagnostics and convergence runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw i.i.d. roots and print them as JSON.
    Sample(Common),
    /// Read roots as JSON (stdin or --input) and print the critical points.
    Crits {
        /// JSON file with `{"points": [[re, im], ...]}` or a bare array; `-` or absent reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 3 if the solver hits its sweep cap.
        #[arg(long)]
        strict: bool,
    },
    /// Run the convergence experiment over the n ladder.
    Converge(Common),
    /// Run one diagnostic table.
    Diagnose {
        /// lemma2, poisson-jensen, green, derivative-identity, tightness or concentration.
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment config or a run manifest (JSON); flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Distribution: a family name (gaussian, uniform_circle, uniform_disk,
    /// radial_cauchy, point_mass, finite_atoms), inline JSON or a JSON file.
    #[arg(long)]
    dist: Option<String>,
    /// Sample size, or a comma-separated ladder.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (file for `sample`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with status 3 if any critical-point solve did not converge.
    #[arg(long)]
    strict: bool,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::InvalidDistribution(_)
        | Error::InvalidArgument(_)
        | Error::UnknownDiagnostic { .. }
        | Error::AtomicPoint(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn named_spec(name: &str) -> Option<DistributionSpec> {
    let o = Complex64::new(0.0, 0.0);
    Some(match name {
        "gaussian" => DistributionSpec::gaussian(o, 1.0),
        "uniform_circle" => DistributionSpec::uniform_circle(o, 1.0),
        "uniform_disk" => DistributionSpec::uniform_disk(o, 1.0),
        "radial_cauchy" => DistributionSpec::radial_cauchy(o, 1.0),
        "point_mass" => DistributionSpec::point_mass(o),
        "finite_atoms" => DistributionSpec::finite_atoms(vec![o, Complex64::new(1.0, 0.0)], vec![0.5, 0.5]),
        _ => return None,
    })
}

fn parse_dist(arg: &str) -> Result<DistributionSpec, Error> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    if let Some(spec) = named_spec(trimmed) {
        return Ok(spec);
    }
    let path = Path::new(trimmed);
    if path.is_file() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    Err(Error::Config(format!(
        "unknown distribution {trimmed:?}: use a family name, inline JSON or a JSON file"
    )))
}

fn parse_ladder(arg: &str) -> Result<Vec<usize>, Error> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("--n expects integers, got {s:?}")))
        })
        .collect()
}

/// Config file (or manifest) first, then flags.
fn build_config(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&c.config, &c.dist) {
        (Some(path), _) => load_config(path)?.into_config(),
        (None, Some(_)) => ExperimentConfig::new(DistributionSpec::point_mass(Complex64::new(0.0, 0.0))),
        (None, None) => return Err(Error::Config("give --config or --dist".into())),
    };
    if let Some(d) = &c.dist {
        cfg.spec = parse_dist(d)?;
    }
    if let Some(n) = &c.n {
        cfg.n_ladder = parse_ladder(n)?;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize, Deserialize)]
struct SampleOutput {
    spec: DistributionSpec,
    n: usize,
    seed: u64,
    points: Vec<Complex64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RootsInput {
    Object { points: Vec<Complex64> },
    Bare(Vec<Complex64>),
}

fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string(value)? + "\n";
    match out {
        Some(p) if p != Path::new("-") => std::fs::write(p, text)?,
        _ => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_sample(c: &Common) -> Result<u8, Error> {
    let cfg = build_config(&Common { out: None, ..c.clone() })?;
    let n = match cfg.n_ladder.as_slice() {
        [n] => *n,
        _ if c.n.is_none() => cfg.n_ladder[0],
        _ => return Err(Error::Config("sample takes a single --n".into())),
    };
    let points = sample(&cfg.spec, n, Seed::new(cfg.seed))?;
    let out = SampleOutput {
        spec: cfg.spec,
        n,
        seed: cfg.seed,
        points,
    };
    emit(c.out.as_deref(), &serde_json::to_value(out)?)?;
    Ok(0)
}

fn cmd_crits(input: Option<&Path>, out: Option<&Path>, strict: bool) -> Result<u8, Error> {
    let text = match input {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    if text.trim().is_empty() {
        return Err(Error::Config("no input: pipe roots as JSON or pass --input".into()));
    }
    let points = match serde_json::from_str::<RootsInput>(&text) {
        Ok(RootsInput::Object { points }) | Ok(RootsInput::Bare(points)) => points,
        // The untagged error has no position; re-parse for one.
        Err(_) => {
            serde_json::from_str::<serde_json::Value>(&text)?;
            return Err(Error::Config(
                "expected {\"points\": [[re, im], ...]} or [[re, im], ...]".into(),
            ));
        }
    };
    let roots = RootSample::new(points)?;
    let crits = critical_points(&roots, &SolverSettings::default())?;
    emit(out, &crits.to_json())?;
    Ok(if strict && !crits.converged {
        EXIT_NONCONVERGED
    } else {
        0
    })
}

fn report(outcome: &RunOutcome, strict: bool) -> u8 {
    let dir = outcome.manifest.config.output_dir.display();
    for o in &outcome.manifest.outputs {
        println!("{dir}/{}  sha256 {}", o.file, o.sha256);
    }
    if outcome.nonconverged > 0 {
        eprintln!("warning: {} trial(s) did not converge", outcome.nonconverged);
        if strict {
            return EXIT_NONCONVERGED;
        }
    }
    0
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Sample(c) => cmd_sample(&c),
        Command::Crits { input, out, strict } => cmd_crits(input.as_deref(), out.as_deref(), strict),
        Command::Converge(c) => {
            let cfg = build_config(&c)?;
            Ok(report(&run_convergence(&cfg)?, c.strict))
        }
        Command::Diagnose { name, common } => {
            // Reject unknown names before touching the config.
            name.parse::<critlab::lab::DiagnosticKind>()?;
            let cfg = build_config(&common)?;
            Ok(report(&run_diagnostic(&name, &cfg)?, common.strict))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
