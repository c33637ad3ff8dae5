use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stl(dir: &Path, args: &[&str], config: &str) -> Output {
    let path = dir.join("run.cfg");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_stl"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

#[test]
fn empty_check_list_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(tmp.path(), &["verify"], "domain.kind = interval\nchecks = []\n");
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["reports"].as_array().unwrap().len(), 0);
}

#[test]
fn hopf_check_on_centered_dirac() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(
        tmp.path(),
        &["verify"],
        "domain.kind = disk\ndomain.nr = 32\ndomain.ntheta = 128\npotential.family = zero\nmeasure.atom = 0, 0, 1\nchecks = [hopf_check]\nhopf.grids = 1\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/report.json")).unwrap()).unwrap();
    let min = report["reports"][0]["cases"][0]["lhs"].as_f64().unwrap();
    assert!((min - 0.1592).abs() < 1e-3);
}

#[test]
fn unknown_family_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(tmp.path(), &["verify"], "domain.kind = interval\npotential.family = yukawa\n");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("potential.family"));
}

#[test]
fn environment_overrides_reach_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.cfg");
    fs::write(&path, "domain.kind = interval\ndomain.n = 8\nmeasure.atom = 0.5, 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stl"))
        .args(["solve", "--format", "csv", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .env("STL_DOMAIN_N", "16")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("out/solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 15);
    assert!(!tmp.path().join("out/solve.json").exists());
}

#[test]
fn study_rejects_non_refining_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(
        tmp.path(),
        &["study"],
        "domain.kind = interval\nmeasure.atom = 0.5, 1\nstudy.resolutions = 64, 64\n",
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels must refine"));
}

#[test]
fn study_reports_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(
        tmp.path(),
        &["study"],
        "domain.kind = interval\ndomain.n = 32\nmeasure.atom = 0.5, 1\nchecks = representation\nboundary.samples = 0\nstudy.levels = 3\n",
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("out/study.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "schema=1");
    assert_eq!(lines[1], "h,k,quantity,value");
    assert_eq!(lines.len(), 2 + 6);
}

#[test]
fn kernel_export() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(
        tmp.path(),
        &["kernel"],
        "domain.kind = disk\ndomain.nr = 6\nboundary.samples = list:0,5\npotential.family = constant\npotential.c = 2\n",
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(tmp.path().join("out/kernels.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2 * (1 + 5 * 24));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("out/kernels.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    assert_eq!(summary[1]["boundary_index"], 5);
}

#[test]
fn failing_check_sets_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stl(
        tmp.path(),
        &["verify"],
        "domain.kind = interval\ndomain.n = 64\npotential.family = power_distance\npotential.alpha = 2\nchecks = hopf_certificate\n",
    );
    assert_eq!(out.status.code(), Some(1));
}
