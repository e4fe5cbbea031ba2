use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use absum_cli::config::{ExperimentConfig, SHIPPED_CONFIGS};
use absum_cli::report::{self, without_timing};
use absum_cli::verify::{self, VerifyOptions};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_absum"));
    c.env_remove("ABSUM_THREADS");
    c
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_config(command: &str, name: &str, extra: &[&str]) -> Output {
    bin().arg(command).arg("--config").arg(configs_dir().join(name)).args(extra).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn exit_code_for(command: &str, config: &str) -> i32 {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), config);
    let out = bin().arg(command).arg("--config").arg(&path).output().unwrap();
    out.status.code().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn norm_of_first_basis_vector_is_one() {
    let r = report(&run_config("norm", "norm_unit_basis.json", &[]));
    let norm = r["result"]["norm"].as_f64().unwrap();
    assert!((norm - 1.0).abs() < 1e-12, "{norm}");
    assert_eq!(r["schema_version"], "1.0");
    assert_eq!(r["tool"]["name"], "absum");
}

#[test]
fn identity_block_sandwich() {
    for alias in ["sandwich", "lemma31"] {
        let r = report(&run_config(alias, "sandwich_identity.json", &[]));
        let res = &r["result"];
        assert_eq!(res["upper"].as_f64(), Some(2.0));
        assert_eq!(res["lower"].as_f64(), Some(2.0));
        assert_eq!(res["c"].as_f64(), Some(1.0));
        assert_eq!(res["holds"], true);
        assert_eq!(r["verdict"], "OK");
    }
}

#[test]
fn all_ones_is_not_a_member() {
    let r = report(&run_config("member", "member_ones.json", &[]));
    assert_eq!(r["verdict"], "FAIL");
}

#[test]
fn lemma31_is_accepted_in_configs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), r#"{"command":"lemma31","block":{"rows":1,"cols":1,"data":[3.0]},"exponents":[2.0]}"#);
    let out = bin().arg("lemma31").arg("--config").arg(&path).output().unwrap();
    let r = report(&out);
    assert_eq!(r["command"], "sandwich");
    assert_eq!(r["result"]["upper"].as_f64(), Some(9.0));
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(exit_code_for("norm", "{not json"), 2);
    assert_eq!(exit_code_for("norm", r#"{"command":"norm","k":1.0,"surprise":1}"#), 2);
    assert_eq!(exit_code_for("norm", r#"{"command":"norm","k":1.0,"window":{"m_max":4,"n_max":4}}"#), 2);
    assert_eq!(
        exit_code_for("norm", r#"{"command":"norm","series":{"family":"alternating","x":1},"k":1.0,"window":{"m_max":4,"n_max":4}}"#),
        2
    );
    assert_eq!(
        exit_code_for("member", r#"{"command":"norm","series":{"family":"alternating"},"k":1.0,"window":{"m_max":4,"n_max":4}}"#),
        2
    );
    assert_eq!(
        exit_code_for("norm", r#"{"command":"norm","series":{"family":"alternating"},"k":0.5,"window":{"m_max":4,"n_max":4}}"#),
        2
    );
    assert_eq!(
        exit_code_for(
            "norm",
            r#"{"command":"norm","series":{"family":"alternating"},"p":{"family":"arithmetic","first":-1.0,"step":1.0},"k":1.0,"window":{"m_max":4,"n_max":4}}"#
        ),
        2
    );
    let out = bin().arg("norm").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_and_window_errors_exit_3() {
    assert_eq!(
        exit_code_for("norm", r#"{"command":"norm","series":{"family":"alternating"},"k":1.0,"window":{"m_max":0,"n_max":4}}"#),
        3
    );
    assert_eq!(
        exit_code_for(
            "transform",
            r#"{"command":"transform","series":{"family":"alternating"},"window":{"m_max":100000,"n_max":10000}}"#
        ),
        3
    );
    let data = vec!["1.0"; 21].join(",");
    assert_eq!(
        exit_code_for("sandwich", &format!(r#"{{"command":"sandwich","block":{{"rows":21,"cols":1,"data":[{data}]}},"exponents":[1.0]}}"#)),
        3
    );
}

#[test]
fn invariant_violations_exit_4() {
    let out = run_config("transform", "transform_geometric.json", &["--perturb-recovery", "1.000001"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["result"]["recovery"]["worst_error_ratio"].as_f64().unwrap() > 1.0);
    let ok = run_config("transform", "transform_geometric.json", &[]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn perturbed_recovery_coefficient_fails_the_suite() {
    let clean = verify::recovery(40, 40, VerifyOptions::default()).unwrap();
    assert!(clean.passed);
    let broken = verify::recovery(40, 40, VerifyOptions { recovery_scale: 1.0 + 1e-6 }).unwrap();
    assert!(!broken.passed);
    assert!(broken.failures > 0);
    assert!(broken.first_failure.is_some());
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let a = run_config("member", "member_bs_sine.json", &[]);
    let b = run_config("member", "member_bs_sine.json", &["--threads", "3"]);
    let (a, b) = (String::from_utf8(a.stdout).unwrap(), String::from_utf8(b.stdout).unwrap());
    assert!(a.contains("\"timing\""));
    assert_eq!(without_timing(&a), without_timing(&b));
    assert!(without_timing(&a).len() > 1000);
}

#[test]
fn report_and_csv_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let csv_dir = dir.path().join("csv");
    let out = run_config(
        "transform",
        "transform_geometric.json",
        &["--out", out_path.to_str().unwrap(), "--csv-dir", csv_dir.to_str().unwrap()],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["csv_files"][0], "transform.csv");
    let csv = std::fs::read_to_string(csv_dir.join("transform.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 18);
    assert_eq!(lines.count(), 65);
    let cell = csv.lines().nth(3).unwrap().split(',').nth(2).unwrap();
    assert_eq!(cell.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);
    let table = &r["result"]["table"];
    let reparsed: f64 = cell.parse().unwrap();
    assert_eq!(table[2][1].as_f64().unwrap().to_bits(), reparsed.to_bits());
}

#[test]
fn thread_count_precedence() {
    let cfg = configs_dir().join("norm_unit_basis.json");
    let out = bin().env("ABSUM_THREADS", "zero").args(["norm", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("ABSUM_THREADS", "0").args(["norm", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("ABSUM_THREADS", "0").args(["norm", "--threads", "2", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&cfg).unwrap().replacen('{', "{\"threads\": 1,", 1);
    let path = write_config(dir.path(), &text);
    let out = bin().env("ABSUM_THREADS", "0").args(["norm", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "config value wins over the environment");
}

#[test]
fn shipped_configs_round_trip() {
    let dir = std::fs::read_dir(configs_dir()).unwrap();
    let on_disk: Vec<String> = dir.map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(on_disk.len(), SHIPPED_CONFIGS.len());
    for (name, text) in SHIPPED_CONFIGS {
        assert!(on_disk.iter().any(|f| f == name));
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let plain = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&plain).unwrap(), cfg, "{name}");
        let exact = report::to_json(&cfg);
        assert_eq!(ExperimentConfig::from_json(&exact).unwrap(), cfg, "{name}");
    }
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/experiment-config.schema.json");
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

#[test]
fn shipped_configs_satisfy_the_schema() {
    let v = schema();
    for (name, text) in SHIPPED_CONFIGS {
        let value: Value = serde_json::from_str(text).unwrap();
        assert!(v.is_valid(&value), "{name}");
        let echoed = serde_json::to_value(ExperimentConfig::from_json(text).unwrap()).unwrap();
        assert!(v.is_valid(&echoed), "{name} echo");
    }
}

#[test]
fn schema_rejects_what_the_parser_rejects() {
    let v = schema();
    let bad = [
        r#"{"command":"norm","k":1.0,"window":{"m_max":4,"n_max":4}}"#,
        r#"{"command":"norm","series":{"family":"alternating"},"k":1.0,"window":{"m_max":4,"n_max":4},"extra":0}"#,
        r#"{"command":"norm","series":{"family":"alternating","x":1},"k":1.0,"window":{"m_max":4,"n_max":4}}"#,
        r#"{"command":"fly"}"#,
        r#"{"command":"sandwich","block":{"rows":1,"cols":1,"data":[1.0]}}"#,
    ];
    for text in bad {
        let value: Value = serde_json::from_str(text).unwrap();
        assert!(!v.is_valid(&value), "schema accepts {text}");
        assert!(ExperimentConfig::from_json(text).is_err(), "parser accepts {text}");
    }
}

#[test]
fn schema_lists_every_config_field() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/experiment-config.schema.json");
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let props: Vec<&String> = value["properties"].as_object().unwrap().keys().collect();
    let full = r#"{"command":"norm","series":{"family":"alternating"},"p":{"family":"unit"},"u":{"family":"unit"},"k":1.0,
        "matrix":{"structure":"zero"},"block":{"rows":1,"cols":1,"data":[1.0]},"exponents":[1.0],
        "window":{"m_max":4,"n_max":4},"probe":10,"scale":"small","seed":1,"threads":1,"output":{"report":"r.json","csv_dir":"c"}}"#;
    let cfg = ExperimentConfig::from_json(full).unwrap();
    let echoed = serde_json::to_value(&cfg).unwrap();
    let keys: Vec<&String> = echoed.as_object().unwrap().keys().collect();
    assert_eq!(props.len(), keys.len());
    for k in keys {
        assert!(props.contains(&k), "{k} missing from the schema");
    }
    assert!(schema().is_valid(&echoed));
}
