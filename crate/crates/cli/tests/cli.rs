//! Command-line behavior: exit codes, CSV shapes, sidecars.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mhg")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn mhg")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mhg_cli_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_errors_exit_one() {
    let dir = tmpdir("usage");
    let out = run_in(&dir, &["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(&dir, &["simulate", "--mode", "sideways", "--s", "1", "--x0", "1,0"]);
    assert_eq!(out.status.code(), Some(1));
    // bad model params surface as an error, not a panic
    let out = run_in(
        &dir,
        &[
            "simulate", "--alpha", "0.3", "--mode", "mixed", "--s", "1", "--x0", "1,0",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("alpha"), "stderr: {stderr}");
    let out = run_in(&dir, &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tmpdir("simulate");
    let out = run_in(
        &dir,
        &[
            "simulate", "--alpha", "0.75", "--beta", "0.5", "--nu", "1", "--n", "100",
            "--mode", "mixed", "--s", "0.2", "--x0", "8.0,0.4", "--trajectories", "200",
            "--seed", "5", "--out", "point.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("point.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "s,p_hat,ci_lo,ci_hi,trajectories");
    assert_eq!(lines.count(), 1);
    let sidecar = std::fs::read_to_string(dir.join("point.csv.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(json["command"], "simulate");
    assert_eq!(json["seed"], 5);
    assert_eq!(json["config"]["params"]["alpha"], 0.75);
    assert!(json["git_describe"].as_str().unwrap().len() > 3);
}

#[test]
fn tail_curve_then_fit_via_sidecar() {
    let dir = tmpdir("curvefit");
    let out = run_in(
        &dir,
        &[
            "tail-curve", "--alpha", "0.75", "--beta", "0.5", "--nu", "1", "--n", "100",
            "--mode", "mixed", "--s-list", "0.2,0.4,0.8", "--grid-r", "8", "--grid-theta", "12",
            "--trajectories", "50", "--dt", "5e-3", "--seed", "3", "--out", "curve.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("curve.csv")).unwrap();
    assert!(csv.starts_with("s,p_hat,ci_lo,ci_hi,n_effective"));
    assert_eq!(csv.lines().count(), 5); // header + s=0 + three horizons

    // fit pulls alpha/beta from the sidecar; too few points is an error
    let out = run_in(
        &dir,
        &["fit", "--curve", "curve.csv", "--model", "sqrt_s", "--out", "fit.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("5 usable"), "stderr: {stderr}");

    // unknown model is a usage error
    let out = run_in(&dir, &["fit", "--curve", "curve.csv", "--model", "cubic"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_recovers_synthetic_slope_end_to_end() {
    let dir = tmpdir("fitsynth");
    // hand-written curve following exp(-0.4 sqrt(s))
    let mut rows = String::from("s,p_hat,ci_lo,ci_hi,n_effective\n");
    for i in 0..7 {
        let s = 2f64.powi(i);
        let p = (-0.4 * s.sqrt()).exp();
        rows.push_str(&format!("{s},{p},{p},{p},1000\n"));
    }
    std::fs::write(dir.join("syn.csv"), rows).unwrap();
    let out = run_in(
        &dir,
        &[
            "fit", "--curve", "syn.csv", "--model", "sqrt_s", "--alpha", "0.75", "--beta",
            "0.5", "--nu", "1", "--n", "100", "--out", "fit.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = std::fs::read_to_string(dir.join("fit.csv")).unwrap();
    let data = fit.lines().nth(1).unwrap();
    let slope: f64 = data.split(',').nth(1).unwrap().parse().unwrap();
    assert!((slope - 1.0).abs() < 1e-6, "slope {slope}");
}

#[test]
fn sample_and_trace_outputs() {
    let dir = tmpdir("sample");
    let out = run_in(&dir, &["sample", "--n", "150", "--seed", "4", "--out", "cfg.csv"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("cfg.csv")).unwrap();
    assert!(csv.starts_with("index,r,theta"));
    assert!(csv.lines().count() > 100);
    let out = run_in(
        &dir,
        &[
            "simulate", "--alpha", "0.75", "--beta", "0.5", "--nu", "1", "--n", "100",
            "--mode", "mixed", "--s", "0.1", "--x0", "8.0,0.5", "--trajectories", "150",
            "--seed", "5", "--out", "sim.csv", "--trace", "trace.csv",
        ],
    );
    assert!(out.status.success());
    let trace = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,r,theta,variance_integral"));
    assert_eq!(trace.lines().count(), 102); // header + t=0 + 100 steps
}

#[test]
fn region_boundary_and_measure() {
    let dir = tmpdir("region");
    let out = run_in(
        &dir,
        &[
            "region", "--alpha", "0.75", "--beta", "0.5", "--nu", "1", "--n", "1000",
            "--mode", "angular", "--kappa", "2", "--s", "1.5", "--boundary", "--points", "32",
            "--out", "boundary.csv",
        ],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("boundary.csv")).unwrap();
    assert!(csv.starts_with("r,theta_boundary"));
    assert_eq!(csv.lines().count(), 33);

    // mixed without a regime is an error
    let out = run_in(
        &dir,
        &[
            "region", "--mode", "mixed", "--kappa", "2", "--s", "4", "--measure",
            "--out", "m.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    let out = run_in(
        &dir,
        &[
            "region", "--alpha", "0.75", "--beta", "0.5", "--nu", "1", "--n", "1000",
            "--mode", "mixed", "--regime", "large", "--kappa", "1.5", "--s", "9",
            "--measure", "--out", "mixed.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("mixed.csv")).unwrap();
    assert!(csv.starts_with("mode,kappa,s,mu,quad_error"));
}

#[test]
fn verify_analytics_fast_suite_passes() {
    let dir = tmpdir("verify");
    let out = run_in(
        &dir,
        &[
            "verify-analytics", "--suite", "exit", "--paths", "2000", "--seed", "7",
            "--out", "verify.csv",
        ],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "stdout: {stdout}");
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
    let csv = std::fs::read_to_string(dir.join("verify.csv")).unwrap();
    assert!(csv.starts_with("suite,check,status,detail"));
    let out = run_in(&dir, &["verify-analytics", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pareto_row_shape_and_low_level_error() {
    let dir = tmpdir("pareto");
    let out = run_in(
        &dir,
        &[
            "pareto", "--gamma", "0.5", "--m", "50", "--l", "40", "--replicas", "20000",
            "--seed", "2", "--out", "p.csv",
        ],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("p.csv")).unwrap();
    assert!(csv.starts_with("m,gamma,L,threshold,mc_estimate,ci_lo,ci_hi,bound"));
    // below the calibrated floor: rejected, names the floor
    let out = run_in(
        &dir,
        &["pareto", "--gamma", "0.5", "--m", "50", "--l", "2", "--replicas", "20000"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("calibrated"), "stderr: {stderr}");
}
