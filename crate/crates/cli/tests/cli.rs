use std::path::PathBuf;
use std::process::{Command, Output};

fn setreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setreg")).args(args).output().expect("run setreg")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("setreg-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn list_prints_every_check() {
    let out = setreg(&["verify-paper", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), setreg::checks::CHECKS.len());
    assert!(text.contains("dual_certificate"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(setreg(&["estimate", "--scene", "/nonexistent/scene.json"]).status.code(), Some(2));
    assert_eq!(setreg(&["estimate", "--example", "no_such_scene"]).status.code(), Some(2));
    assert_eq!(setreg(&["--no-such-flag", "estimate"]).status.code(), Some(2));
    assert_eq!(setreg(&["--workers", "0", "estimate", "--example", "ex3_1"]).status.code(), Some(2));
    assert_eq!(setreg(&["--rho-min", "-1", "estimate", "--example", "ex3_1"]).status.code(), Some(2));
}

#[test]
fn estimate_writes_json_and_table() {
    let dir = scratch("estimate");
    let out = setreg(&["--out", dir.to_str().unwrap(), "estimate", "--example", "orthogonal_lines"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("estimate.json")).unwrap()).unwrap();
    let t = v["estimates"]["theta"]["value"].as_f64().unwrap();
    assert!((t - 1.0 / 2f64.sqrt()).abs() < 0.01, "{t}");
    let csv = std::fs::read_to_string(dir.join("per_rho.csv")).unwrap();
    assert!(csv.starts_with("kind,rho,ratio,samples,excluded"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn project_writes_one_trajectory_per_start() {
    let dir = scratch("project");
    let out = setreg(&[
        "--out",
        dir.to_str().unwrap(),
        "project",
        "--example",
        "lines_pi6",
        "--start",
        "1,0.3",
        "--start",
        "-0.5,0.5",
        "--iters",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..2 {
        let csv = std::fs::read_to_string(dir.join(format!("trajectory_{k}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 52);
    }
    assert!(dir.join("rates.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bridge_expect_mismatch_exits_with_one() {
    let dir = scratch("bridge");
    let args = ["--out", dir.to_str().unwrap(), "bridge", "--example-mapping", "linear_2x"];
    assert_eq!(setreg(&args).status.code(), Some(0));
    let path = dir.join("bridge.json");
    let text = std::fs::read_to_string(&path).unwrap();

    let good = dir.join("good.json");
    std::fs::write(&good, &text).unwrap();
    let mut with_expect = args.to_vec();
    with_expect.extend(["--expect", good.to_str().unwrap()]);
    assert_eq!(setreg(&with_expect).status.code(), Some(0));

    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["rhs"]["theta"]["value"] = serde_json::json!(7.5);
    let bad = dir.join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let mut with_bad = args.to_vec();
    with_bad.extend(["--expect", bad.to_str().unwrap()]);
    assert_eq!(setreg(&with_bad).status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn dual_certificate_failure_exits_with_one() {
    assert_eq!(setreg(&["dual", "--example", "ex3_1"]).status.code(), Some(0));
    assert_eq!(setreg(&["dual", "--example", "ex3_2"]).status.code(), Some(1));
}
