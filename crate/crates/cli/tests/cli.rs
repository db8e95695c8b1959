use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minsurf"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(cfg).arg("--out").arg(out).args(extra).output().unwrap()
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn every_sample_config_passes() {
    for entry in fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let dir = TempDir::new().unwrap();
        let o = run(&path, dir.path(), &[]);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        let s = summary(dir.path());
        assert_eq!(s["passed"], true);
        assert!(!s["assertions"].as_array().unwrap().is_empty(), "{}", path.display());
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(csv.lines().count() >= 1);
    }
}

#[test]
fn halfspace_points_are_harmonic() {
    let dir = TempDir::new().unwrap();
    assert!(run(&config("halfspace-roundtrip.conf"), dir.path(), &[]).status.success());
    let mut rd = csv::Reader::from_path(dir.path().join("results.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[2] == "generalized_harmonic"));
}

#[test]
fn sphere_diverges() {
    let dir = TempDir::new().unwrap();
    let o = run(&config("sphere-roundtrip.conf"), dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(dir.path())["metrics"]["points"][0]["verdict"], "not_harmonic");
}

#[test]
fn reruns_and_manifests_reproduce_results() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = config("paraboloid-lemma2.conf");
    assert!(run(&cfg, a.path(), &["--budget", "100000"]).status.success());
    assert!(run(&cfg, b.path(), &["--budget", "100000"]).status.success());
    let first = fs::read(a.path().join("results.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("results.csv")).unwrap());
    assert!(run(&a.path().join("manifest.conf"), c.path(), &[]).status.success());
    assert_eq!(first, fs::read(c.path().join("results.csv")).unwrap());
    let manifest = fs::read_to_string(a.path().join("manifest.conf")).unwrap();
    assert!(manifest.contains("sampler.samples = 100000"));
    assert!(manifest.contains("assert.h_rel_tol = 0.03"));
}

#[test]
fn sequential_and_parallel_runs_match() {
    let text = fs::read_to_string(config("paraboloid-lemma2.conf")).unwrap();
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (dir, mode) in [(&a, "sequential"), (&b, "parallel")] {
        let p = dir.path().join("in.conf");
        fs::write(&p, format!("{text}sampler.execution = {mode}\n")).unwrap();
        assert!(run(&p, &dir.path().join("out"), &["--budget", "100000"]).status.success());
    }
    let read = |d: &TempDir| fs::read(d.path().join("out/results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn seed_override_changes_samples() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = config("paraboloid-lemma2.conf");
    run(&cfg, a.path(), &["--budget", "20000", "--seed", "1"]);
    run(&cfg, b.path(), &["--budget", "20000", "--seed", "2"]);
    assert_ne!(fs::read(a.path().join("results.csv")).unwrap(), fs::read(b.path().join("results.csv")).unwrap());
    assert!(fs::read_to_string(b.path().join("manifest.conf")).unwrap().contains("sampler.seed = 2"));
}

#[test]
fn failed_assertion_exits_one() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("wrong.conf");
    fs::write(&p, "experiment = theorem-roundtrip\nsurface = sphere\nexpect = harmonic\nsampler.samples = 200000\n").unwrap();
    let o = run(&p, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("assertion failed"));
    assert_eq!(summary(&dir.path().join("out"))["passed"], false);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for (k, text) in [
        "experiment = lemma2\nsurface = paraboloid\nsampler.seeds = 3\n",
        "experiment = lemma2\n",
        "experiment = lemma2\nsurface = scherk\npoints = 1.5, 0\n",
    ]
    .iter()
    .enumerate()
    {
        let p = dir.path().join(format!("{k}.conf"));
        fs::write(&p, text).unwrap();
        let o = run(&p, &dir.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&dir.path().join("missing.conf"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&config("paraboloid-lemma2.conf"), dir.path(), &["--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn listing() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        ["genlap-convergence", "lemma2", "mse-solve", "taylor-check", "theorem-roundtrip", "viscosity-audit"]
    );
    let o = bin().args(["list", "mse-solve"]).output().unwrap();
    assert!(String::from_utf8(o.stdout).unwrap().contains("residual"));
    assert_eq!(bin().args(["list", "nope"]).output().unwrap().status.code(), Some(2));
}
