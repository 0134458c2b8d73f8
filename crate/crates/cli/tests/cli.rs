//! End-to-end tests of the `hcnet` binary: output contents, exit codes, and
//! byte-level determinism of generated files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hcnet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcnet"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_square_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("square.toml");
    fs::write(
        &path,
        r#"
[network]
tx_count = 4
rx_count = 4
tx_cache = 2
rx_cache = 2
library = 4
"#,
    )
    .unwrap();
    path
}

#[test]
fn analyze_square_network() {
    let dir = tempfile::tempdir().unwrap();
    write_square_config(dir.path());
    let out = hcnet(&["analyze", "--config", "square.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("f_hcb=16"), "{text}");
    assert!(text.contains("f_nma=72"), "{text}");
    assert!(text.contains("g=2/9"), "{text}");
    assert!(text.contains("dof=4"), "{text}");
}

#[test]
fn analyze_routes_fractional_params_to_planner() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("frac.toml"),
        r#"
[network]
tx_count = 3
rx_count = 4
tx_cache = 2
rx_cache = 2
library = 4
"#,
    )
    .unwrap();
    let out = hcnet(&["analyze", "--config", "frac.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("memory-sharing plan"), "{text}");
    assert!(text.contains("dof=7/2"), "{text}");
}

#[test]
fn analyze_caps_oversized_step() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("big.toml"),
        r#"
[network]
tx_count = 4
rx_count = 4
tx_cache = 4
rx_cache = 2
library = 4
"#,
    )
    .unwrap();
    let out = hcnet(&["analyze", "--config", "big.toml"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("capped memories"), "{text}");
    assert!(text.contains("dof=4"), "{text}");
}

#[test]
fn analyze_rejects_uncovered_library() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        r#"
[network]
tx_count = 2
rx_count = 4
tx_cache = 1
rx_cache = 1
library = 4
"#,
    )
    .unwrap();
    let out = hcnet(&["analyze", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_field_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("incomplete.toml"),
        "[network]\ntx_count = 4\n",
    )
    .unwrap();
    let out = hcnet(&["analyze", "--config", "incomplete.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn schedule_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_square_config(dir.path());
    let run = |out_dir: &str| {
        let out = hcnet(
            &[
                "schedule",
                "--config",
                "square.toml",
                "--out",
                out_dir,
                "--manifests",
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(stdout(&out).contains("steps=8"));
        (
            fs::read(dir.path().join(out_dir).join("schedule.txt")).unwrap(),
            fs::read(dir.path().join(out_dir).join("coverage.txt")).unwrap(),
            fs::read(dir.path().join(out_dir).join("manifests.txt")).unwrap(),
        )
    };
    let first = run("a");
    let second = run("b");
    assert_eq!(first, second);
    let coverage = String::from_utf8(first.1).unwrap();
    assert!(coverage.starts_with("pass: true\nscheduled_total: 32\n"));
}

#[test]
fn simulate_square_network() {
    let dir = tempfile::tempdir().unwrap();
    write_square_config(dir.path());
    let out = hcnet(
        &[
            "simulate",
            "--config",
            "square.toml",
            "--seed",
            "1",
            "--out",
            "sim",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("all_decoded=true"));
    let csv = fs::read_to_string(dir.path().join("sim/simulate.csv")).unwrap();
    assert!(csv.starts_with("step,worst_residual,condition,max_zf_coeff,all_decoded,decoded\n"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn simulate_fails_cleanly_on_impossible_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    write_square_config(dir.path());
    let out = hcnet(
        &[
            "simulate",
            "--config",
            "square.toml",
            "--tol",
            "1e-18",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(12), "{}", stdout(&out));
}

#[test]
fn simulate_reports_solver_failure_after_retries() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("strict.toml"),
        r#"
[network]
tx_count = 4
rx_count = 4
tx_cache = 2
rx_cache = 2
library = 4

[run]
condition_limit = 0.5
resample_retries = 0
"#,
    )
    .unwrap();
    let out = hcnet(&["simulate", "--config", "strict.toml"], dir.path());
    assert_eq!(out.status.code(), Some(13));
}

#[test]
fn sweep_writes_rows_and_skips_invalid_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = hcnet(
        &["sweep", "--grid", "d=3,4;t=1:4;delta=1,2", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17); // header + 16 valid points
    // All points invalid: header-only file.
    let out = hcnet(
        &["sweep", "--grid", "d=2;t=1:3;delta=3", "--out", "empty"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("empty/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn sweep_accepts_explicit_configs() {
    let dir = tempfile::tempdir().unwrap();
    write_square_config(dir.path());
    let out = hcnet(
        &["sweep", "--config", "square.toml", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("4,4,2,2,4,"));
}

#[test]
fn sweep_rejects_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = hcnet(&["sweep", "--grid", "q=1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn explicit_and_random_demands_work() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.toml"),
        r#"
[network]
tx_count = 4
rx_count = 4
tx_cache = 2
rx_cache = 2
library = 4

[run]
demand = [3, 3, 0, 1]
"#,
    )
    .unwrap();
    let out = hcnet(
        &["schedule", "--config", "cfg.toml", "--out", "x"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let schedule = fs::read_to_string(dir.path().join("x/schedule.txt")).unwrap();
    assert!(schedule.starts_with("demand: [3, 3, 0, 1]\n"));
}
