use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/v1")
}

fn load(name: &str) -> Value {
    let text = fs::read_to_string(schema_dir().join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn validator(name: &str) -> jsonschema::Validator {
    let test_report = load("test_report.schema.json");
    let id = test_report["$id"].as_str().unwrap().to_string();
    let registry = jsonschema::Registry::new().add(id, test_report).unwrap().prepare().unwrap();
    jsonschema::options().with_registry(&registry).build(&load(name)).unwrap()
}

fn assert_valid(schema: &str, path: &Path) {
    let v = validator(schema);
    let instance: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let errors: Vec<String> = v.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
}

fn run(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_betaproc"))
        .args(args)
        .current_dir(dir)
        .env_remove("BPSEED")
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_schema_compiles() {
    for entry in fs::read_dir(schema_dir()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        validator(&name);
    }
}

#[test]
fn cli_outputs_validate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (c, extra) in [
        ("stick", vec![]),
        ("gamma-exp", vec![]),
        ("power-law", vec!["--beta", "0.4", "--groups", "6"]),
        ("sieve", vec!["--K", "200"]),
        ("array", vec!["--K", "40", "--R", "4"]),
        ("dp", vec!["--groups", "10"]),
    ] {
        let mut args = vec!["sample", "--construction", c, "--gamma", "3", "--seed", "2", "--out", "m.json"];
        args.extend(extra);
        run(d, &args);
        assert_valid("discrete_measure.schema.json", &d.join("m.json"));
    }
    run(d, &["features", "--input", "m.json", "--n", "4", "--seed", "1", "--out", "x.json"]);
    assert_valid("feature_matrix.schema.json", &d.join("x.json"));
    run(d, &["features", "--input", "m.json", "--n", "4", "--likelihood", "negbin", "--r", "1.5", "--out", "y.json"]);
    assert_valid("feature_matrix.schema.json", &d.join("y.json"));
    run(d, &["posterior", "--input", "y.json", "--draws", "3", "--R", "4", "--out", "p.json"]);
    assert_valid("posterior_draws.schema.json", &d.join("p.json"));
    run(d, &["truncate", "--Rmax", "3", "--out", "t.json"]);
    assert_valid("truncation_report.schema.json", &d.join("t.json"));
    run(d, &["truncate", "--Rmax", "3", "--method", "simple-function", "--n", "50", "--out", "s.json"]);
    assert_valid("truncation_report.schema.json", &d.join("s.json"));
    run(d, &["verify", "--suite", "levy", "--out", "v.json"]);
    assert_valid("suite_report.schema.json", &d.join("v.json"));
}

#[test]
fn schemas_reject_bad_values() {
    let v = validator("discrete_measure.schema.json");
    let bad = serde_json::json!({"construction_tag":"stick_breaking","truncation_level":1,
        "atoms":[{"location":0.5,"weight":1.5,"group":1,"index_in_group":1}]});
    assert!(!v.is_valid(&bad));
    let v = validator("feature_matrix.schema.json");
    let bad = serde_json::json!({"n":1,"likelihood":{"kind":"negbin"},"atoms":[],"entries":[]});
    assert!(!v.is_valid(&bad));
}
