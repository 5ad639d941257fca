//! Black-box tests of the command-line binary: exit-code contract, artifact
//! layout, seeding, and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semibiharm"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn generate_then_residual_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate", "--family", "s3-general", "--delta1", "0.3", "--delta2", "1",
            "--kg", "0.7", "--nodes", "513", "--out", "s3.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for artifact in ["s3.csv", "s3.meta.json", "s3.family.json", "s3.manifest.json"] {
        assert!(dir.path().join(artifact).exists(), "missing {artifact}");
    }

    let out = run_in(
        dir.path(),
        &["residual", "--input", "s3.csv", "--delta1", "0.3", "--delta2", "1"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    // the family descriptor triggers the variant-resolution check
    assert!(report["checks"].as_array().unwrap().len() >= 2);
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // d2^2 < 0 for this coupling: the family constructor must refuse
    let out = run_in(
        dir.path(),
        &[
            "generate", "--family", "s3-general", "--delta1", "1", "--delta2", "0.7",
            "--kg", "0.3", "--out", "x.csv",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("d2²"));

    // unknown flag is also a validation failure
    let out = run_in(dir.path(), &["residual", "--bogus"]);
    assert_eq!(code(&out), 1);

    // missing required family parameter
    let out = run_in(
        dir.path(),
        &["generate", "--family", "s3-general", "--out", "x.csv"],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn failed_residual_check_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "generate", "--family", "s1-mode", "--delta1", "-4", "--delta2", "1",
            "--k", "2", "--amp", "0.4", "--nodes", "128", "--out", "m.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    // grading against a coupling the curve does not solve
    let out = run_in(
        dir.path(),
        &["residual", "--input", "m.csv", "--delta1", "1", "--delta2", "1"],
    );
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // flow reads the curve file directly, so a missing path surfaces as I/O
    let out = run_in(dir.path(), &["flow", "--input", "nope.csv", "--out", "f.csv"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["check", "--suite", "bessel"])
        .env("SEMIBIHARM_SEED", "99")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], 99);

    let out = bin()
        .current_dir(dir.path())
        .args(["--seed", "7", "check", "--suite", "bessel"])
        .env("SEMIBIHARM_SEED", "99")
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], 7);
}

#[test]
fn jobs_do_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let serial = run_in(dir.path(), &["--jobs", "1", "check", "--suite", "all"]);
    let parallel = run_in(dir.path(), &["--jobs", "3", "check", "--suite", "all"]);
    assert_eq!(code(&serial), 0);
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn gnuplot_flag_emits_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "--gnuplot", "radial", "--dim", "3", "--closed-form", "--out", "r.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let script = std::fs::read_to_string(dir.path().join("r.gp")).unwrap();
    assert!(script.contains("plot 'r.csv'"));
}

#[test]
fn flow_writes_trajectory_and_final_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["flow", "--random-seed", "7", "--nodes", "24", "--out", "traj.csv"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Converged"));
    let traj = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    assert!(traj.starts_with("iteration,energy,residual_norm"));
    assert!(dir.path().join("traj.final.csv").exists());
    assert!(dir.path().join("traj.final.meta.json").exists());
}
