use std::path::PathBuf;
use std::process::{Command, Output};

fn tubecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubecert")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "config", name].iter().collect();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn default_suite_passes() {
    let out = tubecert(&["verify", &config("default_suite.cfg")]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().count() > 40);
    assert!(text.lines().all(|l| l.contains("\"status\":\"pass\"")));
}

#[test]
fn builtin_default_matches_shipped_file() {
    let a = tubecert(&["verify", "default", "--no-timing"]);
    let b = tubecert(&["verify", &config("default_suite.cfg"), "--no-timing"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn negative_control_exits_one() {
    let out = tubecert(&["verify", &config("negative_control.cfg"), "--format", "md"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("| p-plus-d5 | invariance | `P_plus` | fail |"));
    assert!(text.contains("| p-plus-d4 | invariance | `P_plus` | pass |"));
}

#[test]
fn empty_config_is_an_empty_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cfg");
    std::fs::write(&path, "# nothing here\n").unwrap();
    let out = tubecert(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "[check]\nid = lost\nkind = levi\ntarget = nowhere\n").unwrap();
    let out = tubecert(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lost"));
    let out = tubecert(&["verify", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fail_fast_stops_after_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ff.cfg");
    std::fs::write(
        &path,
        "[check]\nid = a\nkind = invariance\ntarget = P_plus\nd = 5\n\n[check]\nid = b\nkind = rank\ntarget = P_minus\n",
    )
    .unwrap();
    let out = tubecert(&["verify", path.to_str().unwrap(), "--fail-fast"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn reports_are_deterministic_across_runs_and_job_counts() {
    let cfg = config("default_suite.cfg");
    let a = tubecert(&["verify", &cfg, "--no-timing", "--jobs", "1"]);
    let b = tubecert(&["verify", &cfg, "--no-timing", "--jobs", "4"]);
    let c = tubecert(&["verify", &cfg, "--no-timing"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn seed_override_changes_draws_but_not_outcomes() {
    let cfg = config("default_suite.cfg");
    let a = tubecert(&["verify", &cfg, "--no-timing"]);
    let b = tubecert(&["verify", &cfg, "--no-timing", "--seed-override", "99"]);
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn describe_and_list() {
    let out = tubecert(&["describe", "M_plus"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("z1^2*zb1^2"));
    let out = tubecert(&["describe", "sigma(σ=1)"]);
    assert_eq!(out.status.code(), Some(0));
    let out = tubecert(&["describe", "cayley"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(tubecert(&["describe", "unknown"]).status.code(), Some(2));
    let out = tubecert(&["list"]);
    for id in stdout(&out).lines() {
        assert_eq!(tubecert(&["describe", id]).status.code(), Some(0), "{id}");
    }
}
