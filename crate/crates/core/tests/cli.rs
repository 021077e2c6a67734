//! Black-box tests of the qgeom binary.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qgeom");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_passes_with_exit_zero() {
    let out = run(&["validate", "--seed", "3"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = std::env::temp_dir().join("qgeom-cli-sweep");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("out.csv");
    let out = run(&[
        "sweep",
        "--exact",
        "--m",
        "1.25",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kx,ky,g_xx,g_xy,g_yy,F_xy,success_fraction,flags");
    assert_eq!(lines.len(), 1 + 15 * 15);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 8);
        // Exactly-zero projector elements at high-symmetry points are
        // dropped from the average and noted as excluded=N; only
        // error flags indicate a failed point.
        assert!(!line.contains("error"), "failed point in {line}");
    }
    let manifest_path = dir.join("out.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config"]["grid_n"], 15);
    assert_eq!(manifest["records"].as_array().unwrap().len(), 225);
}

#[test]
fn seeded_runs_are_deterministic_across_worker_counts() {
    let dir = std::env::temp_dir().join("qgeom-cli-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let args = |path: &Path, workers: &str| {
        vec![
            "sweep".to_string(),
            "--method".into(),
            "vqa".into(),
            "--grid-n".into(),
            "4".into(),
            "--shots".into(),
            "2000".into(),
            "--seed".into(),
            "7".into(),
            "--workers".into(),
            workers.into(),
            "--out".into(),
            path.to_str().unwrap().into(),
        ]
    };
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let c = dir.join("c.csv");
    assert!(Command::new(BIN).args(args(&a, "1")).status().unwrap().success());
    assert!(Command::new(BIN).args(args(&b, "1")).status().unwrap().success());
    assert!(Command::new(BIN).args(args(&c, "2")).status().unwrap().success());
    let a = std::fs::read_to_string(&a).unwrap();
    assert_eq!(a, std::fs::read_to_string(&b).unwrap(), "replay differs");
    assert_eq!(a, std::fs::read_to_string(&c).unwrap(), "worker count changes output");
}

#[test]
fn invalid_readout_probability_is_rejected() {
    let out = run(&["sweep", "--method", "ite", "--readout-q", "0.7", "--grid-n", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn point_reports_tensor_components() {
    let out = run(&["point", "--exact", "--kx", "1.0", "--ky", "0.5", "--m", "1.25"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for label in ["g_xx", "g_xy", "g_yy", "F_xy", "success_fraction"] {
        assert!(text.contains(label), "missing {label} in output:\n{text}");
    }
}

#[test]
fn nonabelian_reports_all_blocks() {
    let out = run(&["nonabelian", "--kmu", "1.0", "--knu", "0.8", "--delta", "1e-5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for label in ["mu_mu", "mu_nu", "nu_mu", "nu_nu"] {
        assert!(text.contains(label), "missing block {label} in output:\n{text}");
    }
    let worst: f64 = text
        .lines()
        .find(|l| l.starts_with("max |extracted - oracle|"))
        .and_then(|l| l.rsplit('=').next())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(worst < 1e-4, "extraction/oracle mismatch {worst}");
}
