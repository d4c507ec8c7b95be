use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bunching(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bunching"))
        .current_dir(dir)
        .env_remove("BUNCHING_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn drury_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["drury-check"][..], &["drury-check", "--naive-oracle"]] {
        let o = bunching(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("1.07378472222"));
    }
    let o = bunching(dir.path(), &["--json", "drury-check"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["ratio"].as_f64().unwrap() - 1237.0 / 1152.0).abs() < 1e-10);
}

#[test]
fn ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = bunching(dir.path(), &["ratio", "--n-min", "4", "--n-max", "14", "--out", "r.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "n,P_bos,P_star,R,bound");
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().any(|l| l.starts_with("7,") && l.contains("1.07378472222")));
    assert!(!csv.contains('\r'));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["ratio", "--n-min", "3"][..],
        &["perturb", "--target", "states", "--eps-grid", "0.2:0:0.1"],
        &["distribution", "--input", "nope"],
        &["distribution", "--n", "12", "--input", "star"],
        &["bogus"],
    ] {
        assert_eq!(bunching(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn distribution_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let rows = |input: &str| -> Vec<Vec<f64>> {
        let o = bunching(dir.path(), &["distribution", "--n", "7", "--input", input]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
            .collect()
    };
    let bos = rows("bos");
    assert_eq!(bos.len(), 8);
    let nonzero: Vec<f64> = bos.iter().filter(|r| r[1] > 1e-12).map(|r| r[0]).collect();
    assert_eq!(nonzero, vec![1.0, 6.0]);
    let star = rows("star");
    let total: f64 = star.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(star.iter().filter(|r| r[1] > 1e-12).count(), 6);

    let o = bunching(dir.path(), &["distribution", "--input", "dist", "--format", "json", "--out", "d.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn perturb_zero_noise() {
    let dir = tempfile::tempdir().unwrap();
    let o = bunching(dir.path(), &["perturb", "--target", "unitary", "--eps-grid", "0:0:1", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "0,1.07378472222,0,1"), "{out}");
}

#[test]
fn search_is_deterministic_and_flags_the_planted_instance() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["search", "--samples", "300", "--seed", "5", "--plant-drury"];
    let a = bunching(dir.path(), &args);
    let b = bunching(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("300"));
}

#[test]
fn ternary_and_stability() {
    let dir = tempfile::tempdir().unwrap();
    let o = bunching(dir.path(), &["ternary", "--grid-step", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("0,0,1.07378472222,0.0309172205419"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 1 + 15);

    let o = bunching(dir.path(), &["stability", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = bunching(
        dir.path(),
        &["--manifest", "m.json", "perturb", "--target", "states", "--eps-grid", "0:0.1:0.05", "--samples", "50", "--seed", "3", "--out", "p.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let before = fs::read(dir.path().join("p.csv")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    let r = bunching(dir.path(), &["replay", "m.json"]);
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    assert_eq!(fs::read(dir.path().join("p.csv")).unwrap(), before);

    let mut bad = manifest.clone();
    bad["checksums"]["p.csv"] = serde_json::Value::from("0".repeat(64));
    fs::write(dir.path().join("bad.json"), bad.to_string()).unwrap();
    let r = bunching(dir.path(), &["replay", "bad.json"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("DIFFERS"));
    assert_eq!(bunching(dir.path(), &["replay", "missing.json"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let o = bunching(
            dir.path(),
            &["--threads", threads, "perturb", "--target", "unitary", "--eps-grid", "0.01:0.03:0.01", "--samples", "64", "--seed", "11"],
        );
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(run("1"), run("2"));
    assert_eq!(run("1"), run("4"));
}
