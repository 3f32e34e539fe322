use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hermite(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermite"))
        .args(args)
        .current_dir(dir)
        .env_remove("HERMITE_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const DECOMPOSE: &str = "kind = \"decompose\"\nseed = 7\n\n[decompose]\nk = 4\nm = 1\n";

const FUNCTIONAL: &str = r#"
kind = "functional"
seed = 11
replicas = 48
eps = [0.2, 0.1, 0.05, 0.025]
t_grid = [0.5, 1.0]

[params]
h = 0.7
m = 1

[kernel]
type = "exponential"
lambda = 1.0

[sim]
dt = 0.1

[functional]
lag_cutoff = 5.0
lambda_replicas = 16
calibration_samples = 1000

[[series]]
id = "h2"
coefficients = [-1.0, 0.0, 1.0]

[[series]]
id = "y"
coefficients = [0.0, 1.0]
"#;

#[test]
fn decompose_k4_m1_profile() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "d.toml", DECOMPOSE);
    let out = hermite(&["decompose", "--config", &cfg, "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&tmp.path().join("run/profile.json"));
    assert_eq!(doc["profile"], serde_json::json!({"0": "3", "2": "6", "4": "1"}));
    assert_eq!(doc["k"], 4);
    for v in doc["vectors"].as_array().unwrap() {
        assert!(v["c1"].is_string());
        assert_eq!(v["r"].as_array().unwrap().len(), 3);
    }
    let manifest = json(&tmp.path().join("run/manifest.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_s"].is_number());
    assert!(manifest["version"].is_string());
}

#[test]
fn functional_with_empty_ladder_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let body = FUNCTIONAL.replace("eps = [0.2, 0.1, 0.05, 0.025]", "eps = []");
    let cfg = write(tmp.path(), "f.toml", &body);
    let out = hermite(&["functional", "--config", &cfg, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn unknown_key_and_missing_seed_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let typo = write(tmp.path(), "t.toml", &DECOMPOSE.replace("k = 4", "k = 4\nkk = 1"));
    let out = hermite(&["decompose", "--config", &typo, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));
    let noseed = write(tmp.path(), "s.toml", &DECOMPOSE.replace("seed = 7\n", ""));
    let out = hermite(&["decompose", "--config", &noseed, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn kind_must_match_subcommand() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "d.toml", DECOMPOSE);
    let out = hermite(&["simulate", "--config", &cfg, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_only_filters_and_rejects_unknown_names() {
    let tmp = TempDir::new().unwrap();
    let out = hermite(&["verify", "--only=nonsense"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let start = std::time::Instant::now();
    let out = hermite(&["verify", "--only=combinatorics"], tmp.path());
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with("PASS 1 combinatorics"));
}

#[test]
fn functional_rerun_is_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "f.toml", FUNCTIONAL);
    let a = hermite(&["functional", "--config", &cfg, "--out", "a", "--threads", "1"], tmp.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = hermite(&["functional", "--config", &cfg, "--out", "b", "--threads", "4"], tmp.path());
    assert!(b.status.success());
    for f in ["functional.csv", "scaling.csv", "histogram.csv", "summary.json"] {
        let x = fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let csv = fs::read_to_string(tmp.path().join("a/functional.csv")).unwrap();
    // header + eps × series × replicas × times
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 48 * 2);
    let summary = json(&tmp.path().join("a/summary.json"));
    assert_eq!(summary["series"]["h2"]["rank"], 2);
    assert_eq!(summary["series"]["y"]["rank"], 1);
    assert!(summary["series"]["h2"]["scaling"]["slope"].is_number());
    assert!(summary["series"]["h2"]["limit"]["lambda"]["value"].is_number());
    assert!(summary["series"]["y"]["limit"]["kappa"]["value"].is_number());
}

#[test]
fn threads_flag_beats_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "d.toml", DECOMPOSE);
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hermite"));
        c.args(args).current_dir(tmp.path()).env_remove("HERMITE_THREADS");
        if let Some(v) = env {
            c.env("HERMITE_THREADS", v);
        }
        assert!(c.output().unwrap().status.success());
    };
    run(&["decompose", "--config", &cfg, "--out", "e"], Some("3"));
    run(&["decompose", "--config", &cfg, "--out", "f", "--threads", "2"], Some("3"));
    assert_eq!(json(&tmp.path().join("e/manifest.json"))["threads"], 3);
    assert_eq!(json(&tmp.path().join("f/manifest.json"))["threads"], 2);
}

#[test]
fn failed_run_leaves_no_output() {
    let tmp = TempDir::new().unwrap();
    // history far below the kernel support fails only once simulation starts
    let body = FUNCTIONAL.replace("dt = 0.1", "dt = 0.1\nhistory = 0.5");
    let cfg = write(tmp.path(), "f.toml", &body);
    let out = hermite(&["functional", "--config", &cfg, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let left: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left.len(), 1, "{left:?}");
}

#[test]
fn simulate_writes_one_file_per_path() {
    let tmp = TempDir::new().unwrap();
    let body = "kind = \"simulate\"\nseed = 3\nreplicas = 2\n\n[params]\nh = 0.7\nm = 2\n\n[sim]\ndt = 0.015625\n\n[simulate]\nprocess = \"hermite\"\nn_steps = 64\n";
    let cfg = write(tmp.path(), "s.toml", body);
    let out = hermite(&["simulate", "--config", &cfg, "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p0 = fs::read_to_string(tmp.path().join("run/path_0000.csv")).unwrap();
    let p1 = fs::read_to_string(tmp.path().join("run/path_0001.csv")).unwrap();
    assert_ne!(p0, p1);
    let summary = json(&tmp.path().join("run/summary.json"));
    assert_eq!(summary["paths"].as_array().unwrap().len(), 2);
}

#[test]
fn report_merges_experiments() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = hermite(&["report", "--out", "empty"], tmp.path());
    assert_ne!(out.status.code(), Some(0));

    let cfg = write(tmp.path(), "d.toml", DECOMPOSE);
    let cfg2 = write(tmp.path(), "d2.toml", &DECOMPOSE.replace("m = 1", "m = 2"));
    assert!(hermite(&["decompose", "--config", &cfg, "--out", "runs/b"], tmp.path()).status.success());
    assert!(hermite(&["decompose", "--config", &cfg2, "--out", "runs/a"], tmp.path()).status.success());

    let single = hermite(&["report", "--out", "runs/b"], tmp.path());
    assert!(single.status.success());
    let report = json(&tmp.path().join("runs/b/report.json"));
    let mut expected = json(&tmp.path().join("runs/b/summary.json"));
    expected["manifest"] = json(&tmp.path().join("runs/b/manifest.json"));
    assert_eq!(report, expected);

    assert!(hermite(&["report", "--out", "runs"], tmp.path()).status.success());
    let text = fs::read_to_string(tmp.path().join("runs/report.json")).unwrap();
    let merged: Value = serde_json::from_str(&text).unwrap();
    let names: Vec<&String> = merged["experiments"].as_object().unwrap().keys().collect();
    assert_eq!(names, ["a", "b"]);
    assert_eq!(merged["experiments"]["a"]["m"], 2);
    assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
}
