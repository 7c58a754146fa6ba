use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use spinbath_cli::{exit, run, RunConfig, RunOptions, RunReport};
use spinbath_core::export::{read_complex_series, read_polarization_series};
use spinbath_core::{decay_shape_fit, PointerBasis};

fn config(v: Value) -> RunConfig {
    RunConfig::from_json(&v.to_string(), Path::new("test")).unwrap()
}

fn run_at(cfg: &RunConfig, dir: &Path) -> RunReport {
    run(cfg, &RunOptions { out: Some(dir.to_path_buf()), threads: Some(2) }).unwrap().report
}

fn gaussian_bath(experiment: &str, n: usize) -> Value {
    json!({
        "version": 1,
        "experiment": experiment,
        "model": {"n": n, "couplings": {"kind": "gaussian", "center": 0.0, "width": 1.0, "seed": 42}},
        "numerics": {"time": {"start": 0.0, "stop": 3.0, "count": 301, "units": "inverse_s"}},
        "output": {"directory": "unused"}
    })
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
}

fn write_config(dir: &Path, v: &Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn gaussian_bath_decays_as_a_gaussian() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_at(&config(gaussian_bath("decoherence_factor", 24)), tmp.path());
    let shape = report.shape.unwrap();
    assert!(shape.gaussian_r2.unwrap() > shape.exponential_r2.unwrap());
    // the emitted file carries the same curve
    let r = read_complex_series(&tmp.path().join("r_product.csv")).unwrap();
    assert_eq!(decay_shape_fit(&r).gaussian_r2, shape.gaussian_r2);
    let s = report.s.unwrap();
    assert_eq!(report.time_span.stop, 3.0 * (1.0 / s));
    assert_eq!(report.energy_unit.reference, "s");
    assert_eq!(report.exit_code, exit::OK);
}

#[test]
fn echo_identity_holds_at_ten_spins() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_at(&config(gaussian_bath("echo_identity", 10)), tmp.path());
    assert!(report.echo_max_deviation.unwrap() < 1e-12);
    assert_eq!(report.files.len(), 3);
}

#[test]
fn zero_field_pointer_is_z() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("pointer", 8);
    v["model"]["p0"] = json!([0.6, 0.0, 0.8]);
    let report = run_at(&config(v), tmp.path());
    let p = report.pointer.unwrap();
    assert_eq!(p.basis, PointerBasis::ZDominant);
    assert_eq!(p.gamma_value, 0.0);
    assert_eq!(p.residual.py, 0.0);
    assert!(report.pz_drift.unwrap() <= 1e-12);
}

#[test]
fn manifest_covers_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("strength_function", 12);
    v["numerics"]["histogram_bins"] = json!(25);
    let report = run_at(&config(v), tmp.path());
    let mut on_disk: Vec<String> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "report.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = report.files.iter().map(|f| f.path.display().to_string()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
    for f in &report.files {
        let bytes = std::fs::read(tmp.path().join(&f.path)).unwrap();
        assert_eq!(f.bytes, bytes.len() as u64);
        assert_eq!(f.sha256, hex::encode(Sha256::digest(&bytes)));
    }
    let report_on_disk: RunReport =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report_on_disk, report);
}

#[test]
fn formats_select_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("strength_function", 6);
    v["output"]["formats"] = json!(["dat"]);
    let report = run_at(&config(v), tmp.path());
    let names: Vec<_> = report.files.iter().map(|f| f.path.display().to_string()).collect();
    assert_eq!(names, ["eta_histogram.dat"]);
}

#[test]
fn stage_timings_account_for_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("lorentzian_ensemble", 60);
    v["model"]["couplings"]["kind"] = json!("lorentzian");
    v["numerics"]["time"] = json!({"start": 0.0, "stop": 0.2, "count": 2001});
    v["numerics"]["ensemble_size"] = json!(100);
    let report = run_at(&config(v), tmp.path());
    let staged: f64 = report.timings.iter().map(|t| t.seconds).sum();
    assert!(report.total_seconds > 0.0);
    assert!(
        (staged - report.total_seconds).abs() <= 0.1 * report.total_seconds,
        "{staged} vs {}",
        report.total_seconds
    );
    assert_eq!(report.energy_unit.reference, "couplings.width");
}

#[test]
fn asymptotic_comparison_recovers_the_long_time_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(json!({
        "version": 1,
        "experiment": "asymptotics_compare",
        "model": {"n": 1, "couplings": {"kind": "fixed", "center": 0.0}, "delta": 0.1,
                  "p0": [1.0, 0.0, 0.0], "eta": "gaussian", "s": 1.0},
        "numerics": {"time": {"start": 0.0, "stop": 200.0, "count": 201}, "quadrature": "panels"},
        "output": {"directory": "unused"}
    }));
    let report = run_at(&cfg, tmp.path());
    let regimes: Vec<_> = report.comparisons.iter().map(|c| c.regime.as_str()).collect();
    assert_eq!(regimes, ["small_delta_short", "small_delta_long"]);
    let long = &report.comparisons[1];
    assert!(long.valid_samples > 150);
    assert!(long.max_abs_diff.unwrap() < 0.01, "{:?}", long.max_abs_diff);
    let numeric = read_polarization_series(&tmp.path().join("polarization.csv")).unwrap();
    assert!(numeric.all_flagged());
}

#[test]
fn exact_dynamics_conserve_the_bloch_length_at_zero_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("dynamics", 10);
    v["model"]["p0"] = json!([0.0, 0.6, 0.8]);
    run_at(&config(v), tmp.path());
    let p = read_polarization_series(&tmp.path().join("polarization.csv")).unwrap();
    for q in p.values() {
        assert!((q.pz - 0.8).abs() < 1e-15);
        assert!(q.norm() <= 1.0 + 1e-12);
    }
}

#[test]
fn exit_code_success() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &gaussian_bath("decoherence_factor", 8));
    let out = tmp.path().join("out");
    let status = bin().arg("run").arg(&path).arg("--out").arg(&out).args(["--threads", "1"]).output().unwrap();
    assert_eq!(status.status.code(), Some(exit::OK));
    let printed = String::from_utf8(status.stdout).unwrap();
    assert_eq!(Path::new(printed.trim()), out.join("report.json"));
    let threads: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(threads["threads"], json!(1));
}

#[test]
fn exit_code_config_error_lists_every_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("decoherence_factor", 0);
    v["model"]["weights"] = json!({"uniform": 1.5});
    v["numerics"]["time"]["count"] = json!(1);
    let path = write_config(tmp.path(), &v);
    for cmd in ["run", "validate"] {
        let out = bin().arg(cmd).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(exit::CONFIG), "{cmd}");
        let err = String::from_utf8(out.stderr).unwrap();
        for field in ["model.n", "model.weights.uniform", "numerics.time.count"] {
            assert!(err.contains(field), "{cmd}: {field} missing from {err}");
        }
    }
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(bin().arg("run").arg(&path).output().unwrap().status.code(), Some(exit::CONFIG));
}

#[test]
fn exit_code_resource_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("strength_function", 22);
    v["output"]["directory"] = json!(tmp.path().join("out"));
    let path = write_config(tmp.path(), &v);
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::RESOURCE));
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap of 20"));
    assert!(!tmp.path().join("out/report.json").exists());
}

#[test]
fn exit_code_convergence_flag_keeps_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json!({
        "version": 1,
        "experiment": "dynamics",
        "model": {"n": 1, "couplings": {"kind": "fixed", "center": 0.0}, "eta": "gaussian", "s": 1.0},
        "numerics": {"time": {"start": 0.0, "stop": 40.0, "count": 81}, "quadrature_nodes": 64},
        "output": {"directory": tmp.path().join("out")}
    });
    let path = write_config(tmp.path(), &v);
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::CONVERGENCE));
    let report: RunReport =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report.exit_code, exit::CONVERGENCE);
    assert_eq!(report.flags.len(), 1);
    assert!(tmp.path().join("out/polarization.csv").exists());
}

#[test]
fn schema_command_prints_json() {
    for kind in ["config", "report"] {
        let out = bin().args(["schema", kind]).output().unwrap();
        assert_eq!(out.status.code(), Some(exit::OK));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["type"], json!("object"));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = gaussian_bath("lorentzian_ensemble", 30);
    v["model"]["couplings"]["kind"] = json!("lorentzian");
    v["numerics"]["time"]["units"] = json!("absolute");
    v["numerics"]["ensemble_size"] = json!(40);
    let cfg = config(v);
    let a = run(&cfg, &RunOptions { out: Some(tmp.path().join("a")), threads: Some(1) }).unwrap().report;
    let b = run(&cfg, &RunOptions { out: Some(tmp.path().join("b")), threads: Some(5) }).unwrap().report;
    assert_eq!(a.files, b.files);
}
