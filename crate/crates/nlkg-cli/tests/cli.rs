use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn nlkg() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nlkg"));
    c.env_remove("NLKG_OUT_DIR");
    c
}

/// The single timestamped run directory under `root/exp`.
fn run_dir(root: &Path, exp: &str) -> PathBuf {
    let dirs: Vec<_> = fs::read_dir(root.join(exp)).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

#[test]
fn local_decay_writes_layout_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlkg().args(["local-decay", "--out-dir"]).arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let dir = run_dir(tmp.path(), "local-decay");
    for f in ["report.json", "summary.txt", "local_decay.csv"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: PASS"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlkg().arg("local-decay").env("NLKG_OUT_DIR", tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    run_dir(tmp.path(), "local-decay");
}

#[test]
fn failing_rule_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlkg()
        .args(["local-decay", "--override", "sweep.times=[0.5,0.6,0.7,0.8]", "--out-dir"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));
}

#[test]
fn bad_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlkg().args(["local-decay", "--override", "grid.nope=3"]).current_dir(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.nope"));

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nn = \"many\"\n").unwrap();
    let out = nlkg().args(["local-decay", "--config"]).arg(&cfg).current_dir(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn config_file_and_overrides_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[grid]\nn = 2048\n").unwrap();
    let out = nlkg()
        .args(["interior-decay", "--print-config", "--override", "run.dt=0.04", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n = 2048"), "{text}");
    assert!(text.contains("dt = 0.04"), "{text}");
    assert!(text.contains("experiment = \"interior-decay\""));
}
