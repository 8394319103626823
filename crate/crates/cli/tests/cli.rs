use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monocone"))
        .args(args)
        .current_dir(dir)
        .env_remove("MONOCONE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON value")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(text.trim_end().lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim_end()).expect("stderr reason is JSON")
}

fn lattice_with_ball(dir: &Path) {
    let ok = |o: Output| assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    ok(run(dir, &["space", "build", "lattice", "--n", "3", "--extent", "3", "--h", "0.5", "--out", "l.json"]));
    ok(run(dir, &["space", "select", "--space", "l.json", "--center", "0,0,0", "--radius", "1", "--out", "ball.json"]));
    ok(run(dir, &["solve", "exterior", "--space", "l.json", "--omega-c", "ball.json", "--rout", "2.8", "--out", "u.csv"]));
}

#[test]
fn kato_small_search_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["kato", "--n", "3", "--trials", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert!(rep["worstRatio"].as_f64().unwrap() >= 1.0);
    assert_eq!(rep["violations"], 0);
    assert_eq!(rep["seed"], 0);
}

#[test]
fn missing_space_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["space", "info", "--space", "absent.json"]);
    assert_eq!(out.status.code(), Some(1));
    let reason = stderr_json(&out);
    assert_eq!(reason["exit"], 1);
    assert_eq!(reason["kind"], "missing-input");
}

#[test]
fn coarse_level_grid_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    lattice_with_ball(dir.path());
    let out = run(
        dir.path(),
        &["monotone", "--space", "l.json", "--field", "u.csv", "--beta", "1", "--tgrid", "0.3:0.6:2", "--out", "m.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["kind"], "precondition");
    assert!(!dir.path().join("m.csv").exists());
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["kato", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["kind"], "config");
    let out = run(dir.path(), &["kato", "--n", "3", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn obstacle_result_points_at_potential() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["space", "build", "path", "--vertices", "5", "--out", "p.json"]).status.success());
    std::fs::write(d.join("e.json"), "[2]").unwrap();
    std::fs::write(d.join("b.json"), "[0,1,2,3,4]").unwrap();
    let out = run(d, &["solve", "obstacle", "--space", "p.json", "--e", "e.json", "--b", "b.json", "--out", "cap.json"]);
    assert!(out.status.success());
    let res: Value = serde_json::from_str(&std::fs::read_to_string(d.join("cap.json")).unwrap()).unwrap();
    assert!((res["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let potential = d.join(res["potentialFile"].as_str().unwrap());
    assert!(std::fs::read_to_string(potential).unwrap().starts_with("id,value\n"));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("cap.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve obstacle");
    assert!(manifest["versions"]["monocone"].is_string());
    assert!(manifest["wallTimeSeconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn rerunning_a_manifest_reproduces_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    lattice_with_ball(d);
    let info = stdout_json(&run(d, &["space", "info", "--space", "l.json", "--nearest", "0,0.5,1.5"]));
    let start = info["nearestVertex"].to_string();
    let first = run(d, &["flow", "--space", "l.json", "--field", "u.csv", "--start", &start, "--tend", "0.4", "--out", "a.csv"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a.csv.manifest.json")).unwrap()).unwrap();
    let argv: Vec<String> = manifest["argv"]
        .as_array()
        .unwrap()
        .iter()
        .skip(1)
        .map(|v| v.as_str().unwrap().replace("a.csv", "b.csv"))
        .collect();
    let args: Vec<&str> = argv.iter().map(String::as_str).collect();
    assert!(run(d, &args).status.success());
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("t,x0,x1,x2,u\n"));
}

#[test]
fn cylinder_pipeline_stops_at_parabolicity_gate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let build = ["space", "build", "cylinder", "--circumference", "6", "--length", "40", "--h", "0.5", "--out", "c.json"];
    assert!(run(d, &build).status.success());
    let select = ["space", "select", "--space", "c.json", "--center", "0,0", "--radius", "0.5", "--out", "s.json"];
    assert!(run(d, &select).status.success());
    let out = run(d, &["pipeline", "--space", "c.json", "--omega-c", "s.json", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["stage"], "nonparabolicity");
}

#[test]
fn radial_pipeline_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(d, &["space", "build", "radial", "--n", "3", "--out", "r.json"]).status.success());
    let out = run(d, &["--seed", "5", "pipeline", "--space", "r.json", "--pairs", "40", "--out", "rep.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(d.join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["verdict"], "cone");
    for m in rep["monotone"].as_array().unwrap() {
        let u = m["U"].as_array().unwrap();
        let first = u[0].as_f64().unwrap();
        assert!(u.iter().all(|v| (v.as_f64().unwrap() / first - 1.0).abs() < 1e-9));
    }
    assert!(rep["cosine"]["maxResidual"].as_f64().unwrap() < 1e-8);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("rep.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
}
