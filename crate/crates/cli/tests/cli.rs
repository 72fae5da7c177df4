//! End-to-end runs of the `heron` binary against a temporary store.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn heron(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heron"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env("RUST_BACKTRACE", "0")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn orbits_classification_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store.tsv");

    let o = heron(&store, &["orbits", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 36);
    assert!(out.lines().nth(18).unwrap().starts_with("18\t12,13,14,123,124,134\t"));
    assert!(stderr(&o).contains("35 orbits, 462 subsets"));

    let o = heron(&store, &["matroid", "3", "--explain"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("35 orbits: 28 bases, 7 non-bases"));
    assert!(out.contains("non-basis orbits: 2,5,6,10,13,20,26"));

    let o = heron(&store, &["degree", "3", "--orbit", "3"]);
    assert!(stdout(&o).contains("degree 2"), "{}", stderr(&o));

    let o = heron(&store, &["monodromy", "3", "--orbit", "9", "--loops", "40", "--radius-sweep"]);
    assert!(stdout(&o).contains("group V of order 4 (solvable)"), "{}{}", stdout(&o), stderr(&o));

    let svg = dir.path().join("b18.svg");
    let o = heron(&store, &["symmetry", "3", "--orbit", "18", "--svg", svg.to_str().unwrap()]);
    assert!(stdout(&o).contains("of order 8"), "{}", stderr(&o));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let o = heron(&store, &["experiment", "3", "--orbit", "3", "--samples", "300", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("real {0, 2}"));

    let o = heron(&store, &["report", "3"]);
    let out = stdout(&o);
    let row3 = out.lines().find(|l| l.starts_with("3\t")).unwrap();
    assert!(row3.contains("\tbasis\t2\t"), "{row3}");
    let row9 = out.lines().find(|l| l.starts_with("9\t")).unwrap();
    assert!(row9.contains("\tV\t4\ttrue\t"), "{row9}");
    assert!(out.contains("mean realizable points per fibre"));

    // Re-running orbits does not duplicate orbit records.
    heron(&store, &["orbits", "3"]);
    let text = fs::read_to_string(&store).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("orbit\t")).count(), 35);
}

#[test]
fn unknown_orbit_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = heron(&dir.path().join("s.tsv"), &["degree", "3", "--orbit", "36"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no orbit 36 for n = 3"), "{}", stderr(&o));
}

#[test]
fn version_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("old.tsv");
    fs::write(&store, "heron-store\tv0\n").unwrap();
    let o = heron(&store, &["report", "3"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "seed = 3\n[tracker]\nstep = 0.1\n").unwrap();
    let o = heron(&dir.path().join("s.tsv"), &["--config", cfg.to_str().unwrap(), "orbits", "2"]);
    assert!(!o.status.success());

    fs::write(&cfg, "seed = 3\nreality_tolerance = 1e-7\n").unwrap();
    let o = heron(&dir.path().join("s.tsv"), &["--config", cfg.to_str().unwrap(), "orbits", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
}
