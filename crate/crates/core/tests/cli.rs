use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn genmoments(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genmoments")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn second_moment_bound_from_mutual_information() {
    let out = genmoments(&["bounds", "--theorem", "thm3", "--sigma", "1", "--n", "9", "--mi", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["theorem"], "thm3");
}

#[test]
fn strict_mode_flags_invalid_parameter_sets() {
    let args = ["bounds", "--theorem", "cor1", "--sigma", "0.5", "--n", "4", "--m", "1", "--chi2", "2"];
    let relaxed = json(&genmoments(&args));
    assert_eq!(relaxed["valid"], true);
    let mut strict_args = args.to_vec();
    strict_args.extend(["--mode", "strict"]);
    let out = genmoments(&strict_args);
    assert_eq!(out.status.code(), Some(0));
    let strict = json(&out);
    assert_eq!(strict["valid"], false);
    assert_eq!(strict["value"], relaxed["value"]);
}

#[test]
fn missing_parameter_is_a_runtime_error() {
    let out = genmoments(&["bounds", "--theorem", "eq9", "--sigma", "1", "--n", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--r"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(genmoments(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(genmoments(&["bounds", "--sigma", "1"]).status.code(), Some(1));
    assert_eq!(genmoments(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergence_between_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"atoms":[0,1],"probs":[0.5,0.5]}"#);
    let q = write(dir.path(), "q.json", r#"{"atoms":[0,1],"probs":[0.25,0.75]}"#);
    let out = genmoments(&["divergence", "--p", &p, "--q", &q, "--kind", "chi2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let point = write(dir.path(), "point.json", r#"{"atoms":[0],"probs":[1]}"#);
    let out = genmoments(&["divergence", "--p", &p, "--q", &point, "--kind", "kl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not absolutely continuous"));
}

#[test]
fn information_from_a_model_and_from_a_joint() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "model.json",
        r#"{"data":{"discrete":{"atoms":[0,1],"probs":[0.5,0.5]}},"n":2,
            "kernel":{"type":"sample_mean"},"loss":{"type":"truncated_square","c":1}}"#,
    );
    let out = genmoments(&["info", "--model", &model, "--t", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["chi_square_information"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["mutual_information"]["value"].as_f64().unwrap() - 1.5 * 2f64.ln()).abs() < 1e-12);
    assert!((v["max_density_ratio"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(v["power_information"]["value"].as_f64().is_some());

    let joint = write(
        dir.path(),
        "joint.json",
        r#"{"w_atoms":[0,1],"s_count":2,"mass":[[0.5,0.0],[0.0,0.5]]}"#,
    );
    let v = json(&genmoments(&["info", "--joint", &joint]));
    assert!((v["mutual_information"]["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!((v["chi_square_information"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    assert_eq!(genmoments(&["info", "--joint", &joint, "--model", &model]).status.code(), Some(1));
}

#[test]
fn verification_passes_and_catches_a_weakened_constant() {
    let dir = tempfile::tempdir().unwrap();
    let small = r#"{"battery":{"random_models":10,"max_n":3}}"#;
    let cfg = write(dir.path(), "ok.json", small);
    let report = dir.path().join("report.json");
    let out = genmoments(&["verify", "--config", &cfg, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);

    let mutated = write(
        dir.path(),
        "mutated.json",
        r#"{"battery":{"random_models":10,"max_n":3},"mi_constants":{"slope":16,"offset":0.9}}"#,
    );
    let out = genmoments(&["verify", "--config", &mutated]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("second_moment_mi"));
}

#[test]
fn small_experiment_writes_csv_and_plots_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("r{run}"));
        let cfg = serde_json::json!({
            "n_values": [1, 2, 3],
            "mc_replicates": 20000,
            "out_dir": out_dir,
        });
        let cfg = write(dir.path(), &format!("c{run}.json"), &cfg.to_string());
        let out = genmoments(&["experiment", "gaussian-mean", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["rows"].as_array().unwrap().len(), 12);
        assert_eq!(v["plots"].as_array().unwrap().len(), 4);
        for m in 1..=4 {
            assert!(out_dir.join(format!("gen_moment_m{m}.svg")).exists());
        }
        csvs.push(std::fs::read(out_dir.join("gen_moments.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"n_valuez":[1]}"#);
    let out = genmoments(&["experiment", "gaussian-mean", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}
