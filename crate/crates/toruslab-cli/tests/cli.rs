//! Exit-code contract of the binary: 0 success, 1 numerical failure,
//! 2 configuration error.

use std::process::Command;

fn run(case: &str, args: &[&str], config: Option<&str>) -> std::process::Output {
    let exe = env!("CARGO_BIN_EXE_toruslab");
    let dir = std::env::temp_dir()
        .join(format!("toruslab-cli-{}", std::process::id()))
        .join(case);
    std::fs::create_dir_all(&dir).unwrap();
    let mut cmd = Command::new(exe);
    if let Some(text) = config {
        let path = dir.join("case.conf");
        std::fs::write(&path, text).unwrap();
        cmd.args(args).arg("--config").arg(&path);
    } else {
        cmd.args(args);
    }
    cmd.arg("--out").arg(dir.join("out"));
    cmd.output().expect("binary spawns")
}

#[test]
fn malformed_region_exits_2_with_diagnostic() {
    let out = run("malformed", &["certify"], Some("[regions]\ntime = [0, )\nspace = [0, pi)\n"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "missing line diagnostic: {err}");
}

#[test]
fn missing_key_exits_2() {
    let out = run("missing-key", &["certify"], Some("[regions]\nspace = [0, pi)\n"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run("unknown", &["frobnicate"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_defaults_exit_0() {
    let out = run("verify", &["verify", "--seed", "9", "--nmax", "8"], None);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn certify_full_cell_reports_trivial_threshold() {
    let out = run(
        "full-cell",
        &["certify", "--nmax", "8"],
        Some("[regions]\ntime = [0, 2pi)\nspace = [0, 2pi)\n"),
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("N = 0"), "expected N = 0 for the full cell: {stdout}");
    // full-cell Gram is 4π²·I, so the constant is 1/4π² ≈ 2.533e-2
    assert!(stdout.contains("constant = 2.533030e-2"), "{stdout}");
}

#[test]
fn nonpositive_tolerance_is_a_config_error() {
    let out = run(
        "bad-tol",
        &["control-linear"],
        Some(
            "[regions]\ntime_period = 2\ntime = [0, 1)\nspace = [0, pi)\n\
             [control]\ntol = -1e-8\ndata = random 0.1\n",
        ),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_time_region_is_a_config_error() {
    let out = run(
        "empty-time",
        &["control-linear"],
        Some("[regions]\ntime_period = 2\ntime = [1, 1)\nspace = [0, pi)\n"),
    );
    assert_eq!(out.status.code(), Some(2));
}
