//! End-to-end tests of the command line binary: pipeline wiring,
//! determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calderon"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_success(&run(
        &[
            "generate", "--dim", "3", "--n", "2", "--dist", "1,2", "--seed", "7", "-o",
            "problem.json",
        ],
        d,
    ));
    let problem = std::fs::read_to_string(d.join("problem.json")).unwrap();
    assert_eq!(problem.matches("\"gamma\"").count(), 36);

    assert_success(&run(&["dtn", "-i", "problem.json", "-o", "dtn.json"], d));
    assert_success(&run(
        &["reconstruct", "-i", "dtn.json", "-o", "recon.json"],
        d,
    ));
    let verify = run(
        &[
            "verify", "-i", "problem.json", "--recon", "recon.json", "-o", "report.csv",
        ],
        d,
    );
    assert_success(&verify);
    let stdout = String::from_utf8_lossy(&verify.stdout);
    assert!(stdout.contains("covered 36/36"), "stdout: {stdout}");

    let report = std::fs::read_to_string(d.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 37, "header plus one row per edge");
    assert!(report.starts_with("p,q,midpoint,depth,gamma_true,gamma_est,abs_err,log10_err,corner"));
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "generate", "--dim", "2", "--n", "3", "--dist", "0.5,2", "--seed", "11", "-o",
    ];
    assert_success(&run(&[&args[..], &["a.json"]].concat(), d));
    assert_success(&run(&[&args[..], &["b.json"]].concat(), d));
    let a = std::fs::read(d.join("a.json")).unwrap();
    let b = std::fs::read(d.join("b.json")).unwrap();
    assert_eq!(a, b, "same flags must give byte-identical output");

    // The whole pipeline stays deterministic, not just generation.
    assert_success(&run(&["dtn", "-i", "a.json", "-o", "da.json"], d));
    assert_success(&run(&["dtn", "-i", "a.json", "-o", "db.json"], d));
    assert_eq!(
        std::fs::read(d.join("da.json")).unwrap(),
        std::fs::read(d.join("db.json")).unwrap()
    );
    assert_success(&run(&["reconstruct", "-i", "da.json", "-o", "ra.json"], d));
    assert_success(&run(&["reconstruct", "-i", "da.json", "-o", "rb.json"], d));
    assert_eq!(
        std::fs::read(d.join("ra.json")).unwrap(),
        std::fs::read(d.join("rb.json")).unwrap()
    );
}

#[test]
fn origin_corner_covers_fewer_edges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_success(&run(
        &["generate", "--dim", "2", "--n", "2", "-o", "problem.json"],
        d,
    ));
    assert_success(&run(&["dtn", "-i", "problem.json", "-o", "dtn.json"], d));
    let out = run(
        &[
            "reconstruct", "-i", "dtn.json", "--corners", "origin", "-o", "recon.json",
        ],
        d,
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    // The two ports at the far corner are out of reach from the origin.
    assert!(stdout.contains("reconstructed 10/12"), "stdout: {stdout}");
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad_dist = run(
        &["generate", "--dim", "2", "--n", "2", "--dist", "0,1", "-o", "x.json"],
        d,
    );
    assert_eq!(exit_code(&bad_dist), 1);
    assert!(String::from_utf8_lossy(&bad_dist.stderr).contains("0 < lo < hi"));

    // Mismatched lattice shapes between problem and reconstruction.
    assert_success(&run(
        &["generate", "--dim", "2", "--n", "2", "-o", "p2.json"],
        d,
    ));
    assert_success(&run(
        &["generate", "--dim", "2", "--n", "3", "-o", "p3.json"],
        d,
    ));
    assert_success(&run(&["dtn", "-i", "p2.json", "-o", "d2.json"], d));
    assert_success(&run(&["reconstruct", "-i", "d2.json", "-o", "r2.json"], d));
    let mismatch = run(
        &["verify", "-i", "p3.json", "--recon", "r2.json", "-o", "r.csv"],
        d,
    );
    assert_eq!(exit_code(&mismatch), 1);
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("lattice mismatch"));
}

#[test]
fn file_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = run(&["dtn", "-i", "missing.json", "-o", "out.json"], d);
    assert_eq!(exit_code(&missing), 2);

    std::fs::write(d.join("garbage.json"), "{ not json").unwrap();
    let garbage = run(&["dtn", "-i", "garbage.json", "-o", "out.json"], d);
    assert_eq!(exit_code(&garbage), 2);

    // Structurally valid JSON that violates the schema: edges out of
    // canonical order.
    assert_success(&run(
        &["generate", "--dim", "2", "--n", "1", "-o", "p.json"],
        d,
    ));
    let text = std::fs::read_to_string(d.join("p.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let edges = value["edges"].as_array_mut().unwrap();
    edges.swap(0, 1);
    std::fs::write(d.join("swapped.json"), serde_json::to_string(&value).unwrap()).unwrap();
    let swapped = run(&["dtn", "-i", "swapped.json", "-o", "out.json"], d);
    assert_eq!(exit_code(&swapped), 2);
    assert!(String::from_utf8_lossy(&swapped.stderr).contains("canonical order"));
}

#[test]
fn selftest_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest", "--dim", "2", "--n", "2", "--seed", "0"], dir.path());
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all "), "stdout: {stdout}");
    assert!(stdout.contains("checks passed"));
    assert!(stdout.lines().filter(|l| l.starts_with("pass")).count() >= 20);
}

#[test]
fn study_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &[
            "study", "--dim", "2", "--n-list", "2..4", "--dist", "1,2", "--seed", "0", "-o",
            "study.csv",
        ],
        d,
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("growth"), "stdout: {stdout}");
    let csv = std::fs::read_to_string(d.join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus three sizes");

    let bad = run(&["study", "--dim", "2", "--n-list", "5..2", "-o", "s.csv"], d);
    assert_eq!(exit_code(&bad), 1);
}
