use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrev::cli::table::Table;

fn qrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrev")).args(args).output().expect("spawn qrev")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn read_table(path: PathBuf) -> Table {
    Table::read_csv(std::fs::File::open(&path).unwrap()).unwrap()
}

#[test]
fn compare_writes_threshold_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qrev(&["compare", "--nu", "3", "--r-points", "11", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(dir.path().join("protocol_comparison.csv"));
    assert_eq!(t.len(), 12);
    let x = t.numbers("x");
    assert!(x.iter().any(|x| (x - 1.0).abs() < 1e-12));
    let raw = std::fs::read_to_string(dir.path().join("protocol_comparison.csv")).unwrap();
    assert!(!raw.contains('\r'));
    assert!(raw.contains("infeasible"));
}

#[test]
fn json_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for fmt in ["csv", "json"] {
        let o = qrev(&["pure-endpoint", "--r", "0.7", "--t-min", "1e-5", "--per-decade", "4", "--format", fmt, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = read_table(dir.path().join("pure_endpoint.csv"));
    let json = Table::from_json_str(&std::fs::read_to_string(dir.path().join("pure_endpoint.json")).unwrap()).unwrap();
    assert_eq!(csv, json);
}

#[test]
fn phase_diagram_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qrev(&["phase-diagram", "--r-points", "9", "--nu-points", "7", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["phase_bayes", "phase_zmin", "phase_boundary", "overlay"] {
        assert!(dir.path().join(format!("{name}.csv")).is_file(), "{name}");
    }
    assert_eq!(read_table(dir.path().join("phase_bayes.csv")).len(), 63);
}

#[test]
fn product_state_is_additive() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qrev(&["multimode", "--spec", &fixture("product.state"), "--steps", "9", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(dir.path().join("multimode.csv"));
    let modes = [(3.0, 0.5), (1.5, 1.0), (2.5, 0.0)];
    for (t_i, total) in t.numbers("t").into_iter().zip(t.numbers("total")) {
        let mut sum = 0.0;
        for (nu, r) in modes {
            let g0 = qrev::SqueezedThermalParams::new(nu, r).unwrap().covariance();
            let g = qrev::model::pure_loss_path(&g0, 1.0, t_i).unwrap();
            let nu_t = g.data().determinant().sqrt();
            let x_t = g.half_inverse_trace().unwrap();
            let r_t = 0.5 * (x_t * nu_t).max(1.0).acosh();
            sum += qrev::one_mode::z_min_exact(&qrev::SqueezedThermalParams::new(nu_t, r_t).unwrap(), 1.0).unwrap().z_min;
        }
        assert!((total - sum).abs() <= 1e-8 * sum.max(1.0), "t={t_i}: {total} vs {sum}");
    }
}

#[test]
fn bad_state_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.state");
    std::fs::write(&path, "mode 2 0.5\nmode 0.5 abc\n").unwrap();
    let o = qrev(&["multimode", "--spec", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn verify_subset_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = qrev(&["verify", "--subset", "one-mode,kkt", "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);
    let saved = std::fs::read(dir.path().join("verify_report.json")).unwrap();
    assert_eq!(saved, ok.stdout);

    let bad = qrev(&["verify", "--subset", "kkt", "--tol-override", "duality_gap=1e-30"]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["first_failure"], "duality-gap");

    assert_eq!(qrev(&["verify", "--tol-override", "nonsense=1"]).status.code(), Some(2));
    assert_eq!(qrev(&["verify", "--subset", "bogus"]).status.code(), Some(2));
}

#[test]
fn usage_errors() {
    assert_eq!(qrev(&[]).status.code(), Some(2));
    assert_eq!(qrev(&["compare", "--nu", "0.5"]).status.code(), Some(2));
    assert_eq!(qrev(&["--help"]).status.code(), Some(0));
}
