//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

/// Path to the compiled `qweld` binary.
pub fn qweld_bin() -> &'static str {
    env!("CARGO_BIN_EXE_qweld")
}

pub struct CmdResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in `dir` and captures its outcome.
pub fn run_qweld(dir: &Path, args: &[&str]) -> CmdResult {
    run_qweld_env(dir, args, &[])
}

/// Like [`run_qweld`] with extra environment variables set.
pub fn run_qweld_env(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> CmdResult {
    let mut cmd = Command::new(qweld_bin());
    cmd.args(args).current_dir(dir);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("spawn qweld");
    CmdResult {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

/// Fresh scratch directory under the target tmp area.
pub fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qweld-it-{}-{name}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).ok();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Loads one of the schemas shipped in the repository `schemas/` directory.
pub fn load_schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    serde_json::from_slice(&std::fs::read(&path).expect("read schema")).expect("parse schema")
}

/// Validates `instance` against the subset of JSON Schema the shipped
/// schemas use: type, required, properties, items, enum and local $ref.
/// Returns a list of violations (empty = valid).
pub fn validate_schema(root: &Value, schema: &Value, instance: &Value, path: &str) -> Vec<String> {
    let mut errors = Vec::new();
    let schema = resolve_ref(root, schema);

    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        if !allowed.iter().any(|t| type_matches(t, instance)) {
            errors.push(format!("{path}: type {allowed:?} violated"));
            return errors;
        }
    }

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            errors.push(format!("{path}: value not in enum"));
        }
    }

    if let Value::Object(obj) = instance {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    errors.push(format!("{path}: missing required '{key}'"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            for (key, subschema) in props {
                if let Some(value) = obj.get(key) {
                    errors.extend(validate_schema(
                        root,
                        subschema,
                        value,
                        &format!("{path}/{key}"),
                    ));
                }
            }
        }
    }

    if let (Value::Array(items), Some(item_schema)) = (instance, schema.get("items")) {
        for (i, item) in items.iter().enumerate() {
            errors.extend(validate_schema(
                root,
                item_schema,
                item,
                &format!("{path}[{i}]"),
            ));
        }
    }

    errors
}

fn resolve_ref<'a>(root: &'a Value, schema: &'a Value) -> &'a Value {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        if let Some(stripped) = reference.strip_prefix("#/") {
            let mut node = root;
            for part in stripped.split('/') {
                node = node.get(part).unwrap_or(&Value::Null);
            }
            return node;
        }
    }
    schema
}

fn type_matches(expected: &str, instance: &Value) -> bool {
    match expected {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        "number" => instance.is_number(),
        "integer" => instance.as_i64().is_some() || instance.as_u64().is_some(),
        _ => false,
    }
}

/// Asserts a report file validates against a shipped schema.
pub fn assert_valid_report(report_path: &Path, schema_name: &str) {
    let schema = load_schema(schema_name);
    let instance: Value =
        serde_json::from_slice(&std::fs::read(report_path).expect("read report")).unwrap();
    let errors = validate_schema(&schema, &schema, &instance, "");
    assert!(
        errors.is_empty(),
        "{} fails {schema_name}: {errors:?}",
        report_path.display()
    );
}
