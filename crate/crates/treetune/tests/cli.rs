use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use treetune::{io, synth};

fn treetune(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treetune"))
        .current_dir(dir)
        .env_remove("TREETUNE_OUT_DIR")
        .env_remove("TREETUNE_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(dir: &Path) {
    std::fs::write(dir.join("data.csv"), io::dataset_csv(&synth::friedman1(50, 5, 1.0, 1))).unwrap();
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    assert_eq!(treetune(d, &[]).status.code(), Some(1));
    assert_eq!(treetune(d, &["evaluate", "--algo", "svm", "data.csv"]).status.code(), Some(1));
    assert_eq!(treetune(d, &["evaluate", "missing.csv"]).status.code(), Some(2));
    std::fs::write(d.join("bad.csv"), "y,x\n1,2\n3,oops\n").unwrap();
    let out = treetune(d, &["evaluate", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv"));
    assert_eq!(treetune(d, &["recommend", "--meta", "data.csv", "data.csv"]).status.code(), Some(2));
    assert_eq!(treetune(d, &["build-metadb", "data.csv"]).status.code(), Some(1));
    let out = treetune(d, &["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = treetune(dir.path(), &["--help"]);
    let help = String::from_utf8_lossy(&out.stdout);
    for cmd in ["clean", "evaluate", "search", "build-metadb", "train-meta", "recommend", "optimal-defaults", "bench-time", "bench-power", "report"] {
        assert!(help.contains(cmd), "{cmd}");
        assert_eq!(treetune(dir.path(), &[cmd, "--help"]).status.code(), Some(0));
    }
    assert!(help.contains("[default: 20240917]"));
    assert!(help.contains("TREETUNE_OUT_DIR") && help.contains("TREETUNE_THREADS"));
}

#[test]
fn evaluate_writes_scores_model_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let out = treetune(d, &["--out-dir", "out", "--seed", "3", "evaluate", "--algo", "rf", "--strategy", "default", "--folds", "5", "data.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eval = json(&d.join("out/evaluation.json"));
    assert!(eval.to_string().contains("cv_mean_nse"));
    assert!(d.join("out/model.json").exists());
    let manifest = json(&d.join("out/evaluate.manifest.json"));
    assert_eq!(manifest["command"], "evaluate");
    assert_eq!(manifest["seed"], 3);
    let sha = io::sha256_hex(&std::fs::read(d.join("data.csv")).unwrap());
    assert_eq!(manifest["inputs"][0]["sha256"], Value::String(sha));
    assert_eq!(manifest["settings"]["folds"], 5);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let out = Command::new(env!("CARGO_BIN_EXE_treetune"))
        .current_dir(d)
        .env("TREETUNE_OUT_DIR", "from-env")
        .env("TREETUNE_THREADS", "2")
        .args(["search", "--algo", "gbt", "--iters", "2", "--folds", "3", "data.csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trials = std::fs::read_to_string(d.join("from-env/trials.ndjson")).unwrap();
    assert_eq!(trials.lines().count(), 2);
    let best = json(&d.join("from-env/best.json"));
    assert_eq!(best["params"]["algorithm"], "gbt");
}
