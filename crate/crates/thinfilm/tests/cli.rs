use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use thinfilm::output::read_csv;

fn thinfilm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfilm"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove(thinfilm::OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = thinfilm(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn usage_error(args: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let out = thinfilm(dir.path(), args);
    assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage error"));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (cols, rows) = read_csv(path).unwrap();
    let i = cols.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn empty_grid_is_usage_error() {
    usage_error(&["linear-scan", "--alpha-start", "0.7", "--alpha-stop", "0.3"]);
}

#[test]
fn zero_k_max_is_usage_error() {
    usage_error(&["linear-eigen", "--k-max", "0"]);
}

#[test]
fn n_at_least_two_is_usage_error() {
    usage_error(&["nonlinear-branch", "--n-grid", "0.001,0.5,2.0"]);
    usage_error(&["osc", "--n", "2.5"]);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[osc]\nbogus = 3\n").unwrap();
    usage_error(&["osc", "--config", cfg.to_str().unwrap()]);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[regularity]\nn = 0.0\ndim = 3\nk_max = 2\n").unwrap();
    ok(dir.path(), &["regularity", "--config", cfg.to_str().unwrap(), "--k-max", "3"]);
    let j = json(&dir.path().join("regularity.json"));
    assert_eq!(j["config"]["dim"], 3);
    assert_eq!(j["config"]["k_max"], 3);
    assert_eq!(j["results"]["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thinfilm"))
        .args(["regularity", "--quiet", "--format", "csv"])
        .env(thinfilm::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("regularity.csv").exists());
    assert!(!dir.path().join("regularity.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let args = ["osc", "--n", "0.3", "--s-hat-end", "120", "--scan", "0.2,0.4", "--limit", "true"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(a.path(), &args);
    ok(b.path(), &args);
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for name in names {
        let (x, y) = (std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
        assert!(x == y, "{name:?} differs between runs");
    }
}

#[test]
fn headers_embed_version_and_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wkbj-check", "--ns", "0.02"]);
    let j = json(&dir.path().join("wkbj_check.json"));
    assert_eq!(j["version"], thinfilm::VERSION);
    for file in ["wkbj_eikonal.csv", "wkbj_match.csv"] {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# {}", thinfilm::VERSION));
        assert_eq!(lines.next().unwrap(), "# command: wkbj-check");
        let cfg: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
        assert_eq!(cfg, j["config"]);
    }
    let plots = json(&dir.path().join("wkbj_check_plots.json"));
    assert_eq!(plots["plots"].as_array().unwrap().len(), 2);
}

#[test]
fn numbers_have_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["regularity"]);
    let (_, rows) = read_csv(&dir.path().join("regularity.csv")).unwrap();
    let mantissa = rows[0][1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn linear_scan_changes_sign_at_first_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["linear-scan", "--dim", "1", "--kind", "sh2", "--alpha-start", "0.3", "--alpha-stop", "0.7", "--alpha-step", "0.1"]);
    let j = json(&dir.path().join("linear_scan.json"));
    let changes = j["results"]["c1_sign_changes"].as_array().unwrap();
    assert_eq!(changes.len(), 1);
    let (lo, hi) = (changes[0][0].as_f64().unwrap(), changes[0][1].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi, "{lo}..{hi}");
}

#[test]
fn linear_eigen_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["linear-eigen", "--dims", "2", "--k-max", "3"]);
    let alpha = column(&dir.path().join("linear_eigen.csv"), "alpha");
    assert_eq!(alpha.len(), 3);
    for (k, a) in alpha.iter().enumerate() {
        assert!((a - 0.5 * (k + 1) as f64).abs() < 1e-4, "k = {}: {a}", k + 1);
    }
}

#[test]
fn first_branch_file_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["nonlinear-branch", "--ks", "1", "--dims", "1", "--n-grid", "0.001,0.05,0.1,0.2,0.3,0.4,0.5"]);
    let alpha = column(&dir.path().join("nonlinear_branch.csv"), "alpha");
    assert_eq!(alpha.len(), 7);
    assert!(alpha.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn osc_writes_transformed_profile() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["osc", "--n", "0.1", "--alpha", "0.5", "--dim", "1"]);
    let (cols, rows) = read_csv(&dir.path().join("osc.csv")).unwrap();
    assert_eq!(&cols[..2], ["s", "t_phi"]);
    assert!(rows.len() > 1000);
    let j = json(&dir.path().join("osc.json"));
    assert_eq!(j["results"]["periodicity"]["outcome"], "periodic");
}

#[test]
fn wkbj_eikonal_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wkbj-check"]);
    let j = json(&dir.path().join("wkbj_check.json"));
    assert!(j["results"]["eikonal_max_residual"].as_f64().unwrap() < 1e-12);
    assert!(j["results"]["inner_transport_max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn regularity_linear_row() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["regularity", "--n", "0", "--dim", "1"]);
    let mu = column(&dir.path().join("regularity.csv"), "mu_k");
    assert_eq!(mu, vec![2.0, 4.0, 6.0, 8.0]);
}
