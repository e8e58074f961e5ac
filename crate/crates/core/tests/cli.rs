use std::path::Path;
use std::process::{Command, Output};

fn plkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plkg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_validate_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("s.csv");
    let report = dir.path().join("r.json");
    let out = plkg(&["simulate", "--set", "duration_s=0.5", "--out", path(&trace)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = plkg(&["validate", path(&trace)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("probes=50"), "{text}");

    let out = plkg(&["run", "--trace", path(&trace), "--out", path(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["counts"]["probes"], 50);
    assert!(json.get("debug_streams").is_none());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.conf");
    std::fs::write(&cfg, "# short run\nduration_s = 0.5\nlevels = 7\nsnr_db = 30\n").unwrap();
    let out = plkg(&["run", "--config", path(&cfg), "--set", "levels=4", "--insecure-debug"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["config"]["levels"], 4);
    assert_eq!(json["config"]["session"]["impairments"]["snr_db"], 30.0);
    assert!(json["debug_streams"]["alice"].is_string());
}

#[test]
fn warnings_do_not_fail_the_run() {
    let out = plkg(&["run", "--set", "duration_s=0.5", "--set", "doppler_mode=static"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn exit_codes_distinguish_failures() {
    // Config errors.
    assert_eq!(code(&plkg(&["run", "--set", "no_such_key=1"])), 2);
    assert_eq!(code(&plkg(&["run", "--set", "levels=1"])), 2);
    // I/O and trace format errors.
    assert_eq!(code(&plkg(&["run", "--trace", "/nonexistent/trace.csv"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "format_version=9\n").unwrap();
    let out = plkg(&["validate", path(&bad)]);
    assert_eq!(code(&out), 3);
    // Pipeline errors: a DC window wider than the grid.
    let out = plkg(&["run", "--set", "duration_s=0.2", "--set", "dc_window=400"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("clean stage"));
}

#[test]
fn sweep_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = plkg(&[
        "sweep",
        "--set",
        "duration_s=0.5",
        "--levels",
        "4,7",
        "--bits",
        "3,5,7,9",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 9);
    assert_eq!(String::from_utf8_lossy(&out.stdout), summary);
}
