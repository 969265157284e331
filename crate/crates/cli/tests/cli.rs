use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const HEADER: &str = "t,exp_I,var_I,growth_formula,growth_fd,S_vn,S_renyi,bound_vn,bound_renyi,trace_err,min_eig";

fn weakinv() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weakinv"));
    cmd.env_remove("WEAKINV_THREADS");
    cmd
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(dir: &Path, json: &str, out: &str) -> (Output, PathBuf) {
    let config = write_config(dir, &format!("{out}.json"), json);
    let out = dir.join(out);
    let output = weakinv().arg("run").arg("--config").arg(&config).arg("--output-dir").arg(&out).output().unwrap();
    (output, out)
}

fn verdict(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap()
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("missing {name}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn spin_default_passes_and_writes_series() {
    let tmp = TempDir::new().unwrap();
    let (output, out) = run(tmp.path(), r#"{"scenario": "spin"}"#, "spin");
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));

    let v = verdict(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(check(&v, "growth_rate_equality")["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut unique = names.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), names.len(), "check names repeat: {names:?}");
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "paper_ref_label", "measured", "bound_or_target", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "check lacks {key}: {c}");
        }
    }

    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(HEADER));
    assert_eq!(csv.lines().count() - 1, 501);

    let var = column(&csv, "var_I");
    assert!(var.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    let formula = column(&csv, "growth_formula");
    let fd = column(&csv, "growth_fd");
    for i in 1..fd.len() - 1 {
        assert!((fd[i] - formula[i]).abs() <= 1e-6f64.max(1e-3 * formula[i].abs()), "node {i}");
    }
    // 17 significant digits: mantissa has 16 decimals
    let first = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    assert_eq!(first.split('e').next().unwrap().len(), 18);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let json = r#"{"scenario": "spin", "seed": 9, "t1": 0.2}"#;
    let (a, out_a) = run(tmp.path(), json, "a");
    let (b, out_b) = run(tmp.path(), json, "b");
    assert!(a.status.success() && b.status.success());
    let read = |p: &Path| std::fs::read(p.join("series.csv")).unwrap();
    assert_eq!(read(&out_a), read(&out_b));
}

#[test]
fn fuzz_results_do_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "fuzz.json",
        r#"{"scenario": "channel_fuzz", "seed": 5, "params": {"n_channels": 40}}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("fuzz{threads}"));
        let status = weakinv()
            .env("WEAKINV_THREADS", threads)
            .args(["run", "--config"])
            .arg(&config)
            .arg("--output-dir")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(std::fs::read_to_string(out.join("series.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].lines().count(), 41);
    assert!(outputs[0].starts_with("index,dim,n_kraus,"));
}

#[test]
fn negative_step_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let (output, out) = run(tmp.path(), r#"{"scenario": "spin", "dt": -0.001}"#, "neg");
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.join("series.csv").exists());
}

#[test]
fn unknown_keys_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let (top, _) = run(tmp.path(), r#"{"scenario": "spin", "tt1": 0.5}"#, "top");
    assert_eq!(top.status.code(), Some(2));
    let (nested, _) = run(tmp.path(), r#"{"scenario": "oscillator", "params": {"nfock": 40}}"#, "nested");
    assert_eq!(nested.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&nested.stderr).contains("nfock"));
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "f.json", r#"{"scenario": "channel_fuzz", "params": {"n_channels": 2}}"#);
    let status = weakinv().env("WEAKINV_THREADS", "many").args(["run", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn increasing_stiffness_aborts_numerically() {
    let tmp = TempDir::new().unwrap();
    let (output, out) = run(tmp.path(), r#"{"scenario": "oscillator", "params": {"k_rate": -0.5}}"#, "inc");
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("stiffness must decrease"));
    let v = verdict(&out);
    assert_eq!(v["pass"], false);
    assert!(v["error"].as_str().unwrap().contains("stiffness must decrease"));
}

#[test]
fn failed_checks_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let (output, out) = run(tmp.path(), r#"{"scenario": "spin", "dt": 0.1}"#, "coarse");
    assert_eq!(output.status.code(), Some(1));
    let v = verdict(&out);
    assert_eq!(check(&v, "growth_rate_equality")["pass"], false);
    assert_eq!(check(&v, "trace_preserved")["pass"], true);
}

#[test]
fn thermo_and_fokker_planck_scenarios_pass() {
    let tmp = TempDir::new().unwrap();
    let (output, out) = run(tmp.path(), r#"{"scenario": "thermo_spin"}"#, "thermo");
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let thermo = std::fs::read_to_string(out.join("thermo.csv")).unwrap();
    assert!(thermo.starts_with("t,T,C,U,var_canonical,relation_lhs,canonical_gap\n"));
    assert_eq!(check(&verdict(&out), "thermo_relation_positive")["pass"], true);

    let (output, out) = run(tmp.path(), r#"{"scenario": "fp_ou", "t1": 0.2}"#, "fp");
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(HEADER));
    assert_eq!(csv.lines().count() - 1, 201);
    assert_eq!(check(&verdict(&out), "drift_independence")["pass"], true);
}

#[test]
fn config_output_dir_is_used_without_override() {
    let tmp = TempDir::new().unwrap();
    let target = tmp.path().join("from-config");
    let json = format!(r#"{{"scenario": "spin", "t1": 0.05, "output_dir": {:?}}}"#, target.to_str().unwrap());
    let config = write_config(tmp.path(), "c.json", &json);
    let status = weakinv().args(["run", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(target.join("series.csv").exists());
}

#[test]
fn scenarios_lists_every_builtin() {
    let out = weakinv().arg("scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["spin", "oscillator", "channel_fuzz", "thermo_spin", "fp_ou"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}
