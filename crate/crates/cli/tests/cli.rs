use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dickecool"));
    c.env_remove("DICKECOOL_MAX_DIM");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn small_config() -> Value {
    json!({
        "schema_version": 1,
        "scenario": "spin-master",
        "model": {"n_qubits": 3, "gamma_cc": 1.0, "nbar": 0.5},
        "initial_state": "all-up",
        "t_max": 5.0,
        "n_samples": 40,
        "grid": "log",
        "sweep": [0, 10],
        "output": "out/small",
        "gnuplot": true
    })
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.display().to_string()
}

#[test]
fn basis_prints_dimension() {
    for (n, d) in [("1", "4"), ("10", "286"), ("100", "176851")] {
        let o = bin().args(["basis", "--n", n]).output().unwrap();
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), d);
    }
    assert_eq!(bin().args(["basis", "--n", "0"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["run"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["basis", "--n", "x"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["verify", "--level", "medium"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["run", "--config", "/nonexistent.json"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["--help"]).output().unwrap().status.code(), Some(0));
}

#[test]
fn analytic_curve_on_stdout() {
    let o = bin().args(["analytic", "--n", "100", "--gamma", "1", "--nbar", "0.5", "--tmax", "10", "--samples", "11", "--grid", "linear"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,jz"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    // T₁ = 1/(Γ(1+2n̄)) = 0.5, ⟨Jz⟩_eq = −N/(2+4n̄) = −25.
    for (t, jz) in rows {
        let expect = -25.0 * (1.0 - (-2.0 * t).exp());
        assert!((jz - expect).abs() < 1e-12, "t={t}: {jz} vs {expect}");
    }
}

#[test]
fn run_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", &small_config());
    let o = run_in(dir.path(), &["run", "--config", &cfg, "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let names = ["small_lambda_0.csv", "small_lambda_10.csv", "small_analytic.csv", "small.json", "small.gp"];
    for f in names {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let first: Vec<Vec<u8>> =
        ["small_lambda_0.csv", "small_lambda_10.csv", "small_analytic.csv"].iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();

    let csv = String::from_utf8(first[1].clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,jz,trace,purity"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
    assert!((row[1].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 41);

    let o = run_in(dir.path(), &["run", "--config", &cfg, "--jobs", "1"]);
    assert!(o.status.success());
    for (f, bytes) in ["small_lambda_0.csv", "small_lambda_10.csv", "small_analytic.csv"].iter().zip(&first) {
        assert_eq!(&std::fs::read(out.join(f)).unwrap(), bytes, "{f} changed between runs");
    }
}

#[test]
fn metadata_flags_cooperativity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", &small_config());
    assert!(run_in(dir.path(), &["run", "--config", &cfg]).status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/small.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["config"]["model"]["n_qubits"], 3);
    assert_eq!(meta["derived"]["gamma_cc"], 1.0);
    assert_eq!(meta["derived"]["t1"], 0.5);
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let pts = meta["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    // λ = 0: C infinite.
    assert!(pts[0]["cooperativity"].is_null());
    assert_eq!(pts[0]["outside_first_order_validity"], true);
    assert!(pts[0]["biexponential_fit"].is_object());
    // λ = 10: γ = 30, C = 0.1.
    assert_eq!(pts[1]["gamma_t2"], 30.0);
    assert!((pts[1]["cooperativity"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(pts[1]["outside_first_order_validity"], false);
    assert_eq!(meta["outside_first_order_validity"], true);
    let warnings: Vec<&str> = meta["warnings"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    assert!(warnings.iter().any(|w| w.contains("outside first-order validity")));
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut analytic_sweep = small_config();
    analytic_sweep["scenario"] = "analytic".into();
    let mut unknown = small_config();
    unknown["colour"] = "blue".into();
    let mut version = small_config();
    version["schema_version"] = 7.into();
    for (k, v) in [analytic_sweep, unknown, version].iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{k}.json"), v);
        let o = run_in(dir.path(), &["run", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(1), "config {k}");
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    }
    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    assert_eq!(run_in(dir.path(), &["run", "--config", "broken.json"]).status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn dimension_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.json", &small_config());
    let o = bin().current_dir(dir.path()).env("DICKECOOL_MAX_DIM", "10").args(["run", "--config", &cfg]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
    let o = bin().current_dir(dir.path()).env("DICKECOOL_MAX_DIM", "20").args(["run", "--config", &cfg]).output().unwrap();
    assert!(o.status.success());
    let o = bin().current_dir(dir.path()).env("DICKECOOL_MAX_DIM", "lots").args(["run", "--config", &cfg]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spin_cavity_run_reports_cavity_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "schema_version": 1,
        "scenario": "spin-cavity",
        "model": {"n_qubits": 2},
        "cavity": {"g": 1.0, "kappa": 2.0, "n_levels": 2},
        "t_max": 2.0,
        "n_samples": 10,
        "grid": "linear",
        "output": "cav"
    });
    let path = write_config(dir.path(), "cavity_config.json", &cfg);
    let o = run_in(dir.path(), &["run", "--config", &path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cav.json")).unwrap()).unwrap();
    assert_eq!(meta["derived"]["gamma_cc"], 2.0);
    assert_eq!(meta["derived"]["markovian_cavity"], false);
    let warnings = meta["warnings"].to_string();
    assert!(warnings.contains("not strongly damped"));
    assert!(warnings.contains("top_level_population"), "{warnings}");
}

#[test]
fn verify_fast_passes_with_both_outputs() {
    let o = bin().args(["verify", "--level", "fast"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS") || stdout(&o).contains("pass"));
    let o = bin().args(["verify", "--json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["level"], "fast");
    assert!(report["sections"].as_array().unwrap().len() >= 4);
}
