use std::path::Path;
use std::process::{Command, Output};

fn sns(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sns"))
        .args(args)
        .current_dir(dir)
        .env("SNS_THREADS", "2")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SMALL: &str = "n = 16\nseed = 4\ndt = 0.001\nt_end = 0.05\ncadence = 5\nout_dir = out\n";

#[test]
fn simulate_writes_artifacts_and_report_reads_them() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.cfg", SMALL);
    let out = sns(&["simulate", "--config", "run.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "energy_report.csv", "crossings.csv", "calibration.json", "manifest.json"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
    let traj = std::fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(
        traj.lines().next().unwrap(),
        "t,norm_w_L2,norm_wL_L2,norm_wL_H1,norm_wH,lambda,segment,N_kappa"
    );
    assert_eq!(traj.lines().count(), 1 + 11);

    let rep = sns(&["report", "out"], tmp.path());
    assert_eq!(rep.status.code(), Some(0));
    let text = String::from_utf8_lossy(&rep.stdout);
    for needle in ["status: COMPLETED", "crossings:", "fitted constants:", "envelope status:", "suites:"] {
        assert!(text.contains(needle), "{needle} missing from\n{text}");
    }
}

#[test]
fn config_errors_exit_one_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.cfg", "n = 16\nseed = 1\n\ndt = fast\n");
    let out = sns(&["simulate", "--config", "bad.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:4"), "{err}");

    let out = sns(&["simulate", "--config", "missing.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let out = sns(&["simulate"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn explosion_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.cfg", &format!("{SMALL}ceiling = 1e-9\n"));
    let out = sns(&["simulate", "--config", "run.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let m = std::fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap();
    assert!(m.contains("EXPLOSION_SUSPECTED"));
}

#[test]
fn report_rejects_tampered_or_missing_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.cfg", SMALL);
    assert_eq!(sns(&["simulate", "--config", "run.cfg"], tmp.path()).status.code(), Some(0));
    let traj = tmp.path().join("out/trajectory.csv");
    let mut text = std::fs::read_to_string(&traj).unwrap();
    text.push('\n');
    std::fs::write(&traj, text).unwrap();
    assert_eq!(sns(&["report", "out"], tmp.path()).status.code(), Some(4));
    assert_eq!(sns(&["report", "nowhere"], tmp.path()).status.code(), Some(4));
}

#[test]
fn verify_unknown_suite_and_underpowered_samples() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(sns(&["verify", "everything"], tmp.path()).status.code(), Some(1));
    let out = sns(&["verify", "noise", "--samples", "20", "--out", "v.jsonl"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UNDERPOWERED"));
    let lines = std::fs::read_to_string(tmp.path().join("v.jsonl")).unwrap();
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["suite"], "noise");
    }
    assert!(lines.contains("\"UNDERPOWERED\""));
}

#[test]
fn verify_paracalc_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sns(&["verify", "paracalc"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_operator_fails_only_on_factor_two_pairing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sns(&["verify", "operator"], tmp.path());
    assert_eq!(out.status.code(), Some(5));
    let failed: Vec<String> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["status"] == "FAIL")
        .map(|v| v["check"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["divergence_form_pairing_factor_two"]);
}

#[test]
fn zero_horizon_writes_initial_row_only() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.cfg", "n = 16\nseed = 7\nt_end = 0\nout_dir = out\n");
    let out = sns(&["simulate", "--config", "run.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 2);
}

#[test]
fn noise_stats_and_spectra_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sns(
        &["noise-stats", "--n", "16", "--lambdas", "2,4", "--times", "0.5", "--samples", "8"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("lambda,t,r_lambda,mc_diag_mean,mc_diag_stderr,mc_offdiag_mean,samples"));
    assert_eq!(text.lines().count(), 3);

    let out = sns(
        &["spectra", "--n", "16", "--lambdas", "4", "--seeds", "1,2", "--out", "s.csv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn galerkin_writes_levels() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.cfg", "n = 32\nseed = 2\nt_end = 0.02\nout_dir = out\n");
    let out = sns(&["galerkin", "--config", "run.cfg", "--levels", "4,8,16"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/galerkin/levels.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,sup_norm,h1_integral,distance_to_double");
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(sns(&["report", "out/galerkin"], tmp.path()).status.code(), Some(0));
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(sns(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(sns(&["--version"], tmp.path()).status.code(), Some(0));
    assert_eq!(sns(&["bogus"], tmp.path()).status.code(), Some(1));
}
