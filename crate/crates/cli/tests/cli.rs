use std::process::{Command, Output};

fn corrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn convert_prints_the_substitution() {
    let out = corrlab(&["convert", "--n", "100", "--ell", "0.01", "--t", "1e-4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,ell,t,Lambda,L,T"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row[3], 100.0);
    assert!((row[4] - 2.0).abs() < 1e-12 && (row[5] - 1.0).abs() < 1e-12, "{row:?}");

    let back = corrlab(&["convert", "--lambda", "100", "--l", "2", "--t", "1", "--json"]);
    assert!(back.status.success());
    let v: serde_json::Value = serde_json::from_slice(&back.stdout).unwrap();
    assert_eq!(v["N"], 100);
}

#[test]
fn regime_violation_exits_with_validation_code() {
    let out = corrlab(&["convert", "--n", "100", "--ell", "0.001"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scatter_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "scatter.toml",
        "kind = \"scatter\"\npotential = { kind = \"square-well\", amplitude = 2.0, range = 1.0 }\ngrid = { dr = 0.001 }\n",
    );
    let out = corrlab(&["scatter", "--config", &cfg, "--csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("r,u,omega,domega\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn wrong_subcommand_for_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "scatter.toml",
        "kind = \"scatter\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\n",
    );
    assert_eq!(corrlab(&["window", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn invalid_config_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "bad.toml",
        "kind = \"window\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\nphysics = { lambda = [100.0], l = [], t = [0.0] }\n",
    );
    let out = corrlab(&["window", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("physics.l"));
}

#[test]
fn resource_guard_exits_with_code_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "big.toml",
        "kind = \"window\"\npotential = { kind = \"bump\", amplitude = 5.0, range = 1.0 }\nphysics = { lambda = [400.0], l = [4.0], t = [0.0] }\nlimits = { max_memory_mb = 0.01 }\n",
    );
    assert_eq!(corrlab(&["window", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn preset_run_persists_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out_str = out_dir.to_string_lossy().into_owned();
    let out = corrlab(&["fn0", "--preset", "fn0", "--out", &out_str, "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("N,ell,N_ell,value,scaled,asymptotic_constant,relative_gap,separable,correction_bound\n"));
    assert_eq!(csv.lines().count(), 5);

    let rep = corrlab(&["report", &out_str, "--csv"]);
    assert!(rep.status.success());
    assert_eq!(String::from_utf8(rep.stdout).unwrap(), csv);

    let again = corrlab(&["fn0", "--preset", "fn0", "--out", &out_str, "--resume", "--json"]);
    let manifest: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(manifest["resumed_points"], 4);
}

#[test]
fn converge_reports_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "scatter.toml",
        "kind = \"scatter\"\npotential = { kind = \"bump\", amplitude = 5.0, range = 1.0 }\ngrid = { dr = 0.005 }\n",
    );
    let out = corrlab(&["converge", "--config", &cfg, "--levels", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("observed order"));
}

#[test]
fn missing_config_is_a_validation_error() {
    assert_eq!(corrlab(&["energy"]).status.code(), Some(2));
    assert_eq!(corrlab(&["window", "--preset", "nope"]).status.code(), Some(2));
}
