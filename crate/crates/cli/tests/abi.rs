//! Runs the built binary and checks its output and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn losscape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_losscape"))
        .args(args)
        .env_remove("LOSSCAPE_MAX_N")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr holds one JSON error")
}

fn analyze_json(builtin: &str) -> Value {
    let o = losscape(&["analyze", "--builtin", builtin]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn golden_reports() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (builtin, file) in [
        ("traffic", "traffic.json"),
        ("xor", "xor.json"),
        ("hole", "hole.json"),
        ("appendix-b1", "appendix-b1.json"),
        ("mnist-add:3,2", "mnist-add-3-2.json"),
    ] {
        let mut got = analyze_json(builtin);
        got.as_object_mut().unwrap().remove("elapsed_us");
        let want: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap();
        assert_eq!(got, want, "{builtin}");
    }
}

#[test]
fn report_round_trips() {
    let o = losscape(&["analyze", "!r | !g", "--seed", "11"]);
    let text = stdout(&o);
    let v: losscape_cli::AnalysisReport = serde_json::from_str(&text).unwrap();
    assert_eq!(v.seed, 11);
    assert_eq!(v.schema, 1);
    assert_eq!(serde_json::to_string(&v).unwrap(), text.trim_end());
}

#[test]
fn skip_homology_omits_betti() {
    let o = losscape(&["analyze", "--builtin", "hole", "--skip-homology"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["betti"].is_null());
    assert_eq!(v["connected_components"]["count"], 1);
}

#[test]
fn analyze_exit_codes() {
    let o = losscape(&["analyze", "a & (b |"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "syntax");
    assert!(e["message"].as_str().unwrap().contains('8'));

    let o = losscape(&["analyze", "a & !a"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "unsatisfiable");

    let o = Command::new(env!("CARGO_BIN_EXE_losscape"))
        .args(["analyze", "--builtin", "hole"])
        .env("LOSSCAPE_MAX_N", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "limit");
}

#[test]
fn landscape_grid() {
    let o = losscape(&["landscape", "--builtin", "traffic", "--resolution", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu_0,mu_1,loss"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 121);
    for r in &rows {
        let on_axis = r[0] == 0.0 || r[1] == 0.0;
        assert_eq!(r[2] == 0.0, on_axis, "{r:?}");
    }
    let o = losscape(&["landscape", "a | !a"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn experiment_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let args = [
        "experiment", "--builtin", "traffic", "--model", "independent,expressive", "--runs", "4", "--iters", "300",
        "--seed", "5", "--trajectories", "--out-dir", out_s,
    ];
    let o = losscape(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("independent"));
    let first = std::fs::read_to_string(out.join("endpoints.csv")).unwrap();
    assert_eq!(first.lines().count(), 9);
    assert!(first.starts_with("run_id,model,loss_kind,alpha,seed,final_loss,dist_Cphi,nearest_facet,p_00,p_10,p_01,p_11"));
    let traj = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert!(traj.starts_with("run_id,step,loss,p_00"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["models"].as_array().unwrap().len(), 2);

    assert_eq!(losscape(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out.join("endpoints.csv")).unwrap(), first);
}

#[test]
fn experiment_errors() {
    let o = losscape(&["experiment", "--builtin", "traffic", "--runs", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = losscape(&[
        "experiment", "--builtin", "traffic", "--runs", "1", "--iters", "5", "--out-dir",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn verify_smoke_and_injected_failure() {
    let o = losscape(&["verify", "--max-n", "3", "--cases", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("7 suites, 0 failures"));

    let o = losscape(&["verify", "--max-n", "3", "--cases", "10", "--inject-bug"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"));
}
