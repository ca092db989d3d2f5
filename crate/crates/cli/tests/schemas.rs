// Every JSON output must validate against the schema shipped in schemas/.
// The checker below covers the subset of JSON Schema those files use.

mod common;

use common::{run_ok, sparse_params_json};
use serde_json::Value;
use std::fs;
use std::path::Path;

fn validate(schema: &Value, value: &Value, at: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "number" => value.is_number(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "boolean" => value.is_boolean(),
            "string" => value.is_string(),
            other => return Err(format!("{at}: unknown schema type {other}")),
        };
        if !ok {
            return Err(format!("{at}: expected {t}, found {value}"));
        }
    }
    if let Some(num) = value.as_f64() {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if num < min {
                return Err(format!("{at}: {num} below minimum {min}"));
            }
        }
        if let Some(min) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
            if num <= min {
                return Err(format!("{at}: {num} not above {min}"));
            }
        }
        if let Some(max) = schema.get("exclusiveMaximum").and_then(Value::as_f64) {
            if num >= max {
                return Err(format!("{at}: {num} not below {max}"));
            }
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    return Err(format!("{at}: missing required field \"{key}\""));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in obj.keys() {
                if props.map_or(true, |p| !p.contains_key(key)) {
                    return Err(format!("{at}: unexpected field \"{key}\""));
                }
            }
        }
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, v, &format!("{at}.{key}"))?;
                }
            }
        }
    }
    if let Some(arr) = value.as_array() {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                return Err(format!("{at}: {} items, need at least {min}", arr.len()));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                return Err(format!("{at}: {} items, allows at most {max}", arr.len()));
            }
        }
        if let Some(items) = schema.get("items") {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    serde_json::from_slice(&fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .unwrap()
}

fn check(schema_name: &str, bytes: &[u8]) {
    let doc: Value = serde_json::from_slice(bytes).expect("output is JSON");
    if let Err(msg) = validate(&schema(schema_name), &doc, "$") {
        panic!("{schema_name}: {msg}");
    }
}

#[test]
fn every_command_output_validates_against_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    run_ok(&["anchors", "--n", "8", "--out", &path("a.json")]);
    check("anchor_set.json", &fs::read(path("a.json")).unwrap());

    fs::write(
        path("p.json"),
        sparse_params_json(8, &[(1, 0.7), (6, 0.3)], [2.0, 1.0, 0.5], [0.0; 3]),
    )
    .unwrap();
    run_ok(&["render", "--params", &path("p.json"), "--out", &path("m.hdr")]);
    run_ok(&[
        "decompose",
        "--in",
        &path("m.hdr"),
        "--n",
        "8",
        "--weighted",
        "--out",
        &path("d.json"),
    ]);
    check("illumination_params.json", &fs::read(path("d.json")).unwrap());

    let stdout = run_ok(&["distance", "--a", &path("d.json"), "--b", &path("d.json")]);
    check("distance_result.json", &stdout);

    let stdout = run_ok(&["metrics", "--pred", &path("m.hdr"), "--true", &path("m.hdr")]);
    check("metric_report.json", &stdout);

    run_ok(&[
        "sphconv-grid",
        "--width",
        "16",
        "--height",
        "8",
        "--k",
        "3",
        "--out",
        &path("g.json"),
    ]);
    check("kernel_grid.json", &fs::read(path("g.json")).unwrap());
}

#[test]
fn the_checker_is_not_vacuous() {
    let s = schema("distance_result.json");
    let good: Value = serde_json::from_str(
        "{\"transport_cost\": 0.5, \"regularized_objective\": -0.1, \"iterations\": 3, \"marginal_error\": 0.0}",
    )
    .unwrap();
    assert!(validate(&s, &good, "$").is_ok());

    let missing: Value = serde_json::from_str("{\"transport_cost\": 0.5}").unwrap();
    assert!(validate(&s, &missing, "$").unwrap_err().contains("missing"));

    let extra: Value = serde_json::from_str(
        "{\"transport_cost\": 0.5, \"regularized_objective\": -0.1, \"iterations\": 3, \"marginal_error\": 0.0, \"bonus\": 1}",
    )
    .unwrap();
    assert!(validate(&s, &extra, "$").unwrap_err().contains("unexpected"));

    let negative: Value = serde_json::from_str(
        "{\"transport_cost\": -0.5, \"regularized_objective\": -0.1, \"iterations\": 3, \"marginal_error\": 0.0}",
    )
    .unwrap();
    assert!(validate(&s, &negative, "$").unwrap_err().contains("minimum"));

    let fractional: Value = serde_json::from_str(
        "{\"transport_cost\": 0.5, \"regularized_objective\": -0.1, \"iterations\": 3.5, \"marginal_error\": 0.0}",
    )
    .unwrap();
    assert!(validate(&s, &fractional, "$").unwrap_err().contains("integer"));

    let params = schema("illumination_params.json");
    let wide: Value = serde_json::from_str(
        "{\"n\": 2, \"fraction\": 0.05, \"weighted\": true, \"distribution\": [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]], \"intensity\": [1, 1, 1], \"ambient\": [0, 0, 0]}",
    )
    .unwrap();
    assert!(validate(&params, &wide, "$").unwrap_err().contains("at most"));
}
