mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kronlev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronlev")).args(args).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn packaged(name: &str) -> String {
    common::packaged(name).to_string_lossy().into_owned()
}

/// A copy of a packaged config with some keys replaced.
fn patched(dir: &Path, name: &str, patch: &[(&str, Value)]) -> String {
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(common::packaged(name)).unwrap()).unwrap();
    for (k, v) in patch {
        cfg[*k] = v.clone();
    }
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn version_is_semantic() {
    let out = kronlev(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), format!("kronlev {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = kronlev(&["indexset", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = kronlev(&["solve", "--config", "/nonexistent/config.json", "--method", "uniform"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_keys_and_bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "ishigami-g7.json", &[("colour", Value::from("blue"))]);
    assert_eq!(kronlev(&["indexset", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(kronlev(&["solve", "--config", &packaged("ishigami-g7.json"), "--method", "nope"]).status.code(), Some(2));
    assert_eq!(kronlev(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn indexset_reports_size_and_box() {
    let v = json_stdout(&kronlev(&["indexset", "--config", &packaged("ishigami-hc15.json")]));
    assert_eq!(v["N"], 110);
    assert_eq!(v["monotone_lower"], true);
    assert_eq!(v["bounding_box"], serde_json::json!([16, 16, 16]));

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("set.json");
    std::fs::write(&spec, r#"{"family": "explicit-list", "indices": [[1, 1], [2, 1], [2, 2]]}"#).unwrap();
    let v = json_stdout(&kronlev(&["indexset", "--config", spec.to_str().unwrap(), "--list"]));
    assert_eq!(v["N"], 3);
    assert_eq!(v["monotone_lower"], false);
    assert_eq!(v["indices"].as_array().unwrap().len(), 3);
}

#[test]
fn solve_prints_a_summary() {
    let cfg = packaged("ishigami-g7.json");
    let v = json_stdout(&kronlev(&["solve", "--config", &cfg, "--method", "leverage-lower", "--K", "480", "--seed", "5"]));
    for key in ["relative_error", "optimal_relative_error", "K", "N", "rank_flag"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert_eq!(v["K"], 480);
    assert_eq!(v["N"], 120);
    let err = v["relative_error"].as_f64().unwrap();
    let opt = v["optimal_relative_error"].as_f64().unwrap();
    assert!(err >= opt - 1e-10 && err < 3.0 * opt);
    let again = json_stdout(&kronlev(&["solve", "--config", &cfg, "--method", "leverage-lower", "--K", "480", "--seed", "5"]));
    assert_eq!(v, again);
}

#[test]
fn sample_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pts.csv");
    let cfg = packaged("duffing-hc15.json");
    let status = kronlev(&["sample", "--config", &cfg, "--method", "tensor-product", "--count", "50", "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..6], ["m1", "m2", "m3", "y1", "y2", "y3"]);
    assert!(header.contains(&"point_mass".to_string()));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 50);
    for r in &rows {
        for d in 0..3 {
            let m: usize = r[d].parse().unwrap();
            let y: f64 = r[3 + d].parse().unwrap();
            assert!(m < 20 && (-1.0..=1.0).contains(&y));
        }
    }
    let stdout = kronlev(&["sample", "--config", &cfg, "--method", "tensor-product", "--count", "50"]);
    assert_eq!(std::fs::read(&out).unwrap(), stdout.stdout);
}

#[test]
fn oracle_dump_holds_a_probability_vector() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.json");
    std::fs::write(&set, r#"{"family": "wlp-ball", "dimension": 3, "p": 1, "order": 3}"#).unwrap();
    let cfg = patched(
        dir.path(),
        "ishigami-g7.json",
        &[
            ("index_set", serde_json::from_str(&std::fs::read_to_string(&set).unwrap()).unwrap()),
            ("grid", serde_json::json!({"grid": "gauss-legendre", "M": 6})),
        ],
    );
    let dump = dir.path().join("lev.csv");
    let v = json_stdout(&kronlev(&["oracle", "--config", &cfg, "--dump", dump.to_str().unwrap()]));
    assert_eq!(v["rows"], 216);
    assert_eq!(v["N"], 20);
    assert!((v["leverage_sum"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let mut reader = csv::Reader::from_path(&dump).unwrap();
    let total: f64 = reader.records().map(|r| r.unwrap()[4].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn bound_matches_the_library() {
    let v = json_stdout(&kronlev(&["bound", "--bound", "instance-vb", "--N", "3", "--epsilon", "0.25", "--delta", "0.5"]));
    assert_eq!(v["K"], 666);
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = patched(dir.path(), "ishigami-g7.json", &[("trials", Value::from(5))]);
    let run = |tag: &str, threads: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let v = json_stdout(&kronlev(&[
            "--threads", threads, "experiment", "--config", &cfg,
            "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
        ]));
        (v, std::fs::read(csv).unwrap(), std::fs::read_to_string(svg).unwrap())
    };
    let (v1, csv1, svg1) = run("a", "1");
    let (v2, csv2, _) = run("b", "3");
    assert_eq!(v1, v2);
    assert_eq!(csv1, csv2);
    assert_eq!(v1["trials"], 5);
    assert!(svg1.starts_with("<svg"));
    let text = String::from_utf8(csv1).unwrap();
    assert_eq!(text.lines().next().unwrap(), "method,sorted_error,cdf_level");
    assert_eq!(text.lines().count(), 1 + 15);
}
