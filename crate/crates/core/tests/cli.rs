use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use critlab::critical::{critical_points, SolverSettings};
use critlab::measures::{sample, DistributionSpec, Seed};
use critlab::poly_field::RootSample;
use critlab::Complex64;

fn critlab(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_critlab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn crits_of_zero_and_one() {
    let v = json(&critlab(&["crits"], Some("[[0, 0], [1, 0]]")));
    assert_eq!(v["points"], serde_json::json!([[0.5, 0.0]]));
    assert_eq!(v["converged"], true);
}

#[test]
fn sample_pipes_into_crits() {
    let sampled = critlab(&["sample", "--dist", "uniform_disk", "--n", "100", "--seed", "5"], None);
    let roots_json = String::from_utf8(sampled.stdout.clone()).unwrap();
    let from_cli = json(&critlab(&["crits"], Some(&roots_json)));

    let spec = DistributionSpec::uniform_disk(Complex64::new(0.0, 0.0), 1.0);
    let roots = sample(&spec, 100, Seed::new(5)).unwrap();
    assert_eq!(json(&sampled)["points"], serde_json::to_value(&roots).unwrap());
    let lib = critical_points(&RootSample::new(roots).unwrap(), &SolverSettings::default()).unwrap();
    assert_eq!(from_cli["points"], serde_json::to_value(&lib.points).unwrap());
    assert_eq!(from_cli["points"].as_array().unwrap().len(), 99);
}

#[test]
fn bad_input_is_a_usage_error() {
    let empty = critlab(&["crits"], Some(""));
    assert_eq!(empty.status.code(), Some(2));
    assert!(stderr(&empty).contains("no input"));

    let broken = critlab(&["crits"], Some("{\"points\": [[0, 0],\n [1, 0]"));
    assert_eq!(broken.status.code(), Some(2));
    assert!(stderr(&broken).contains("line 2"), "{}", stderr(&broken));

    let unknown = critlab(&["diagnose", "lemma5", "--dist", "gaussian"], None);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("poisson-jensen"));

    let ladder = critlab(&["converge", "--dist", "gaussian", "--n", "64,32"], None);
    assert_eq!(ladder.status.code(), Some(2));

    let missing = critlab(&["converge"], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"spec\": {\"family\": \"gaussian\",\n  \"trials\": 3\n").unwrap();
    let out = critlab(&["converge", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

fn body(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap()
}

#[test]
fn manifest_replays_through_config_flag() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"spec": {"family": "uniform_circle", "params": {"center": [0, 0], "radius": 1}},
            "n_ladder": [8, 16], "trials": 3, "seed": 4, "reference_atoms": 128}"#,
    )
    .unwrap();
    let run = critlab(
        &[
            "converge",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            first.to_str().unwrap(),
            "--strict",
        ],
        None,
    );
    assert!(run.status.success(), "{}", stderr(&run));
    let manifest = first.join("manifest.json");
    let again = critlab(
        &[
            "converge",
            "--config",
            manifest.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
            "--workers",
            "8",
        ],
        None,
    );
    assert!(again.status.success(), "{}", stderr(&again));
    for f in ["convergence.csv", "summary.csv"] {
        assert_eq!(body(&first, f), body(&second, f), "{f}");
    }
    let m: serde_json::Value = serde_json::from_slice(&body(&second, "manifest.json")).unwrap();
    assert_eq!(m["complete"], true);
    assert_eq!(m["config"]["workers"], 8);
}

#[test]
fn diagnose_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(
        &[
            "diagnose",
            "concentration",
            "--dist",
            "uniform_circle",
            "--n",
            "10,100",
            "--trials",
            "200",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = String::from_utf8(body(dir.path(), "concentration.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("n,trials,component,delta,q,q_sqrt_n"));
    assert_eq!(lines.count(), 2);
}
