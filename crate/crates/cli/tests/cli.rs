//! End-to-end runs of the `hyperlap` binary.

use std::path::Path;
use std::process::{Command, Output};

use hyperlap::dynamics::Method;
use hyperlap::repro::{Builtin, ExperimentConfig};
use hyperlap::LaplacianSpec;
use serde_json::Value;

fn hyperlap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlap"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HYPERLAP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn repro_all_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["repro", "all", "--out", "nested/out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for name in ["fig-a", "fig-b", "fig-c", "fig-d", "fig-np"] {
        assert!(text.contains(&format!("{name} PASS")), "{text}");
        for ext in ["csv", "gp", "summary.json"] {
            assert!(dir.path().join(format!("nested/out/{name}.{ext}")).exists());
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("nested/out/fig-a.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,x3,x4,Vm,spread\n"));
}

#[test]
fn summaries_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out = hyperlap(&["repro", "fig-d", "--seed", "7", "--out", run], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |run: &str| std::fs::read(dir.path().join(run).join("fig-d.summary.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    let summary: Value = serde_json::from_slice(&read("a")).unwrap();
    assert_eq!(summary["seed"], 7);
    assert_eq!(summary["sigma"], serde_json::json!([1, 1, -1, -1]));
    assert_eq!(summary["consensus"], "pass");
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hyperlap"))
        .args(["simulate", "--graph", "fig-a", "--seed", "1", "--out", "o"])
        .current_dir(dir.path())
        .env("HYPERLAP_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["seed"], 42);
}

#[test]
fn laplacian_of_fig_a() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["laplacian", "--graph", "fig-a", "--spec", "def3", "--out", "l"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diagonal [63.0, 63.0, 63.0, 63.0]"));
    let path = dir.path().join("l/laplacian-def3-k4.json");
    let tensor: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(tensor["order"], 4);

    let eig = hyperlap(&["eig", path.to_str().unwrap(), "--negate"], dir.path());
    assert_eq!(eig.status.code(), Some(0));
    let pair: Value = serde_json::from_str(&stdout(&eig)).unwrap();
    assert!(pair["lambda"].as_f64().unwrap().abs() < 1e-10);
    assert!(pair["x"].as_array().unwrap().iter().all(|v| (v.as_f64().unwrap() - 1.0).abs() < 1e-10));
}

#[test]
fn laplacian_rejects_signed_graph_under_def3() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["laplacian", "--graph", "fig-c", "--spec", "def3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative weight"));
}

#[test]
fn eig_of_all_ones_and_reducible_input() {
    let dir = tempfile::tempdir().unwrap();
    let ones: Vec<Value> = (0..8)
        .map(|c| serde_json::json!([c / 4 % 2 + 1, c / 2 % 2 + 1, c % 2 + 1, 1.0]))
        .collect();
    std::fs::write(
        dir.path().join("ones.json"),
        serde_json::json!({"order": 3, "dim": 2, "entries": ones}).to_string(),
    )
    .unwrap();
    let out = hyperlap(&["eig", "ones.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let pair: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((pair["lambda"].as_f64().unwrap() - 4.0).abs() < 1e-10);

    // node 2 never influences node 1, and the dominant eigenvector vanishes on node 1
    std::fs::write(
        dir.path().join("red.json"),
        r#"{"order": 2, "dim": 2, "entries": [[1, 1, 1.0], [2, 1, 1.0], [2, 2, 2.0]]}"#,
    )
    .unwrap();
    let out = hyperlap(&["eig", "red.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("irreducible"));
}

#[test]
fn balance_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["balance", "--graph", "fig-c"], dir.path());
    let cert: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["balanced"], true);
    assert_eq!(cert["sigma"], serde_json::json!([1, 1, -1, -1]));

    std::fs::write(
        dir.path().join("frustrated.json"),
        r#"{"n": 3, "directed": false, "edges": [
            {"members": [1, 2], "weight": 1.0},
            {"members": [2, 3], "weight": 1.0},
            {"members": [1, 3], "weight": -1.0}]}"#,
    )
    .unwrap();
    let out = hyperlap(&["balance", "--graph", "frustrated.json"], dir.path());
    let cert: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["balanced"], false);
    assert_eq!(cert["conflict"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_from_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tri.json"),
        r#"{"n": 4, "directed": false, "edges": [
            {"members": [1, 2, 3], "weight": 1.0},
            {"members": [2, 3, 4], "weight": 1.0},
            {"members": [1, 3, 4], "weight": 1.0}]}"#,
    )
    .unwrap();
    let out = hyperlap(
        &["simulate", "--graph", "tri.json", "--spec", "def1", "--t-end", "50", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["consensus_mode"], "identical");

    let def2 = hyperlap(
        &["simulate", "--graph", "tri.json", "--spec", "def2", "--t-end", "50", "--out", "o"],
        dir.path(),
    );
    let summary: Value = serde_json::from_str(&stdout(&def2)).unwrap();
    assert_eq!(summary["consensus_mode"], "cluster");
    assert_eq!(def2.status.code(), Some(0), "{summary}");

    let mut adaptive = ExperimentConfig::from_file(dir.path().join("tri.json"), LaplacianSpec::UnweightedSymmetric);
    adaptive.integrator = Method::rk45();
    // the consensus window counts accepted steps, which grow long near equilibrium
    adaptive.t_end = 500.0;
    std::fs::write(dir.path().join("adaptive.json"), adaptive.to_json_string()).unwrap();
    let out = hyperlap(&["simulate", "--config", "adaptive.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let cfg = ExperimentConfig::builtin(Builtin::FigNp);
    std::fs::write(dir.path().join("np.json"), cfg.to_json_string()).unwrap();
    let out = hyperlap(&["simulate", "--config", "np.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["interaction"], "arctan");
}

#[test]
fn corrupted_weight_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"n": 2, "directed": true, "edges": [{"tail": 1, "members": [2], "weight": "heavy"}]}"#,
    )
    .unwrap();
    let out = hyperlap(&["simulate", "--graph", "bad.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("heavy"));
}

#[test]
fn failing_verdict_exits_with_one() {
    // a horizon too short to reach consensus
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["repro", "fig-a", "--t-end", "0.01", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("fig-a FAIL"));
}

#[test]
fn unknown_builtin_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlap(&["repro", "fig-z"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
