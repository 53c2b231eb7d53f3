use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-noma"))
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("--version").output().unwrap().status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(bin().arg("bogus").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["preset", "fig99"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["simulate", "--schemes", "nope"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.toml");
    let status = bin().args(["simulate", "--config"]).arg(&path).output().unwrap().status;
    assert_eq!(status.code(), Some(3));
}

#[test]
fn invalid_config_value_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "U_r = 0\n").unwrap();
    let status = bin().args(["simulate", "--config"]).arg(&path).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_manifest_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "U = 6\nA = 4\nR = 2\nU_r = 2\nK = 64\narea_side = 180\ntrials = 3\nseed = 11\n").unwrap();
    let first = dir.path().join("a");
    let out = bin().args(["simulate", "--schemes", "proposed,traditional", "--config"]).arg(&cfg).arg("--out").arg(&first).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(first.join("results.csv")).unwrap();
    assert!(csv.starts_with("sweep_param,sweep_value,scheme,"));
    assert_eq!(csv.lines().count(), 3);

    let second = dir.path().join("b");
    let out = bin().arg("rerun").arg(first.join("manifest.txt")).arg("--out").arg(&second).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv, fs::read_to_string(second.join("results.csv")).unwrap());
}

#[test]
fn validate_passes() {
    let out = bin().arg("validate").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
