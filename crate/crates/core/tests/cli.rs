use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_edge-slicer"));
    cmd.current_dir(env!("CARGO_MANIFEST_DIR"));
    cmd.env_remove("EDGE_SLICER_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &tempfile::TempDir, epsilon: f64) -> PathBuf {
    let text = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/two_sp_edge_node.json"),
    )
    .unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["epsilon"] = serde_json::json!(epsilon);
    let path = dir.path().join("node.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

#[test]
fn solve_prints_solution_json() {
    let out = run(&["solve", "--config", "configs/two_sp_edge_node.json", "--algo", "prop"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], serde_json::json!([76, 4]));
    assert!(v["f"].as_f64().unwrap() > 0.99);

    let out = run(&["solve", "--algo", "exact"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["proven_optimal"], true);
    assert_eq!(v["n"], serde_json::json!([56, 10]));

    let out = run(&["solve", "--algo", "stream", "--order", "seeded:3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["threshold_used"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_csv_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&["solve", "--algo", "greedy", "--alpha", "0.5", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().contains(",greedy,"));
}

#[test]
fn sweep_row_count() {
    let out = run(&[
        "sweep", "--param", "sps[0].lambda", "--values", "5,10", "--param2", "sps[1].lambda",
        "--values2", "5,10", "--algo", "stream,prop",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 4 * 2);
}

#[test]
fn config_errors_exit_with_two() {
    let out = run(&["sweep", "--param", "sps[0].lamda", "--values", "1", "--algo", "stream"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lamda"));

    let out = run(&["sweep", "--param", "sps[0].lambda", "--values", "1", "--algo", ""]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(&dir, 0.3);
    let out = run(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon"));

    let out = run(&["solve", "--config", "does/not/exist.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bin().env("EDGE_SLICER_THREADS", "zero").args(["solve"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_and_budget_errors_exit_with_three() {
    let out = run(&["simulate", "--n", "96,1", "--horizon", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["verify", "--scale", "1", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["solve", "--algo", "exact", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passes_at_quarter_scale() {
    let out = run(&["verify", "--scale", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("OPT"));
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn erlang_and_simulate_outputs() {
    let out = run(&["erlang", "--load", "2", "--n", "0:2:1"]);
    assert_eq!(stdout(&out), "a,n,blocking\n2,0,1\n2,1,0.666666666667\n2,2,0.4\n");
    let out = run(&["erlang", "--lambda", "1", "--mu", "2", "--n", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v[0]["blocking"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);

    let args = ["simulate", "--n", "76,4", "--horizon", "2000", "--seed", "42"];
    let a = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = bin().env("EDGE_SLICER_THREADS", "3").args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["per_sp"].as_array().unwrap().len(), 2);
}

#[test]
fn goldens_check_passes_on_checked_in_files() {
    let out = run(&["goldens", "--check"]);
    assert!(out.status.success(), "{}", stderr(&out));
}
