use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lepage(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lepage"))
        .current_dir(dir)
        .env_remove("LEPAGE_SEED")
        .env_remove("LEPAGE_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn column(path: &Path, name: &str) -> usize {
    csv::Reader::from_path(path).unwrap().headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn sample_writes_one_row_per_realization() {
    let dir = TempDir::new().unwrap();
    let o = lepage(dir.path(), &["sample", "--dim", "2", "--n", "3", "--out", "a"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("a/samples.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    let header = text.lines().next().unwrap();
    for col in ["version", "config_hash", "seed", "stream", "x0", "x1"] {
        assert!(header.split(',').any(|h| h == col), "missing {col} in {header}");
    }
    assert!(dir.path().join("a/config.toml").exists());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    for out in ["a", "b"] {
        assert_eq!(code(&lepage(dir.path(), &["sample", "--dim", "2", "--n", "50", "--seed", "9", "--out", out])), 0);
    }
    let a = fs::read(dir.path().join("a/samples.csv")).unwrap();
    let b = fs::read(dir.path().join("b/samples.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(code(&lepage(dir.path(), &["sample", "--dim", "2", "--n", "50", "--seed", "10", "--out", "c"])), 0);
    assert_ne!(a, fs::read(dir.path().join("c/samples.csv")).unwrap());
}

#[test]
fn seed_and_output_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lepage"))
        .current_dir(dir.path())
        .env("LEPAGE_SEED", "77")
        .env("LEPAGE_OUT", "envout")
        .args(["sample", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("envout/samples.csv");
    let seed = column(&path, "seed");
    assert!(rows(&path).iter().all(|r| &r[seed] == "77"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 3\n[cone]\ndim = 3\n[lepage]\nn = 4\n").unwrap();
    let o = lepage(dir.path(), &["sample", "--config", "run.toml", "--n", "2", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("o/samples.csv");
    assert_eq!(rows(&path).len(), 2);
    column(&path, "x2");
    let resolved = fs::read_to_string(dir.path().join("o/config.toml")).unwrap();
    assert!(resolved.contains("seed = 3"));
}

#[test]
fn inadmissible_alpha_names_the_gate() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.toml"), "[lepage]\nsymmetric = false\n").unwrap();
    let o = lepage(dir.path(), &["sample", "--config", "run.toml", "--alpha", "1.5", "--out", "o"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("admissibility gate"), "{}", stderr(&o));
}

#[test]
fn config_and_usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.toml"), "[lepage]\nbeta = 2\n").unwrap();
    assert_eq!(code(&lepage(dir.path(), &["sample", "--config", "bad.toml"])), 1);
    assert_eq!(code(&lepage(dir.path(), &["sample", "--bogus"])), 1);
    assert_eq!(code(&lepage(dir.path(), &["sample", "--cone", "banach"])), 1);
    assert_eq!(code(&lepage(dir.path(), &["--help"])), 0);
}

#[test]
fn default_verification_passes() {
    let dir = TempDir::new().unwrap();
    let o = lepage(dir.path(), &["verify", "--out", "v"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = dir.path().join("v/verify_summary.csv");
    let passed = column(&summary, "passed");
    let all = rows(&summary);
    assert!(all.len() >= 5);
    assert!(all.iter().all(|r| &r[passed] == "true"));
    let report = fs::read_to_string(dir.path().join("v/stability.report")).unwrap();
    assert!(report.contains("note=config_hash="));
    assert!(report.contains("passed=true"));
}

#[test]
fn mutated_stability_fails_with_exit_three() {
    let dir = TempDir::new().unwrap();
    let o = lepage(dir.path(), &["verify", "--suite", "stability", "--mutate", "--out", "v"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("v/stability.report")).unwrap();
    assert!(report.contains("passed=false"));
}

#[test]
fn unknown_suite_exits_one() {
    let dir = TempDir::new().unwrap();
    let o = lepage(dir.path(), &["verify", "--suite", "everything"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn decompose_normalizes_and_rejects_the_origin() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("in.csv"), "x0,x1\n3,4\n0,0\n").unwrap();
    let o = lepage(dir.path(), &["decompose", "--dim", "2", "--input", "in.csv", "--out", "d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("d/decomposed.csv");
    let (x0, x1, radial) = (column(&out, "x0"), column(&out, "x1"), column(&out, "radial"));
    let got = rows(&out);
    assert_eq!(got.len(), 1);
    let num = |s: &str| s.parse::<f64>().unwrap();
    assert!((num(&got[0][x0]) - 0.6).abs() < 1e-12);
    assert!((num(&got[0][x1]) - 0.8).abs() < 1e-12);
    assert!((num(&got[0][radial]) - 5.0).abs() < 1e-12);
    let rejects = rows(&dir.path().join("d/decompose_rejects.csv"));
    assert_eq!(rejects.len(), 1);
    assert_eq!(&rejects[0][2], "2");
}

#[test]
fn compose_inverts_decompose() {
    let dir = TempDir::new().unwrap();
    let o = lepage(dir.path(), &["sample", "--dim", "2", "--n", "20", "--out", "s"]);
    assert_eq!(code(&o), 0);
    let o = lepage(dir.path(), &["decompose", "--dim", "2", "--input", "s/samples.csv", "--out", "d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = lepage(dir.path(), &["decompose", "--dim", "2", "--compose", "--input", "d/decomposed.csv", "--out", "c"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let original = dir.path().join("s/samples.csv");
    let composed = dir.path().join("c/composed.csv");
    let (a, b) = (rows(&original), rows(&composed));
    assert_eq!(a.len(), b.len());
    for col in ["x0", "x1"] {
        let (i, k) = (column(&original, col), column(&composed, col));
        for (ra, rb) in a.iter().zip(&b) {
            let (x, y) = (ra[i].parse::<f64>().unwrap(), rb[k].parse::<f64>().unwrap());
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn time_stable_rows_round_trip_through_decompose() {
    let dir = TempDir::new().unwrap();
    let args = ["--cone", "time-stable", "--alpha", "1", "--grid", "0,1,2,3"];
    let o = lepage(dir.path(), &[&["sample", "--n", "5", "--r", "50", "--out", "s"], &args[..]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = lepage(dir.path(), &[&["decompose", "--input", "s/samples.csv", "--out", "d"], &args[..]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(rows(&dir.path().join("d/decomposed.csv")).len(), 5);
}

#[test]
fn unparseable_rows_are_listed_by_line() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("in.csv"), "x0,x1\n1,2\nfoo,3\n4,bar\n").unwrap();
    let o = lepage(dir.path(), &["decompose", "--dim", "2", "--input", "in.csv", "--out", "d"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("line 4") && !err.contains("line 2"), "{err}");
}

#[test]
fn io_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&lepage(dir.path(), &["decompose", "--input", "missing.csv"])), 2);
    assert_eq!(code(&lepage(dir.path(), &["sample", "--config", "missing.toml"])), 2);
    fs::write(dir.path().join("blocker"), "").unwrap();
    assert_eq!(code(&lepage(dir.path(), &["sample", "--n", "2", "--out", "blocker/sub"])), 2);
}
