#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn config_path(name: &str) -> PathBuf {
    crate_dir().join("configs").join(name)
}

pub fn killingflow<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_killingflow"))
        .args(args)
        .env_remove("KILLINGFLOW_THREADS")
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().expect("exited normally, not by signal"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Validates `instance` against `schemas/<name>.json`.
pub fn validate(name: &str, instance: &Value) -> Result<(), String> {
    let path = crate_dir().join("schemas").join(format!("{name}.json"));
    let schema: Value = read_json(&path);
    let validator = jsonschema::validator_for(&schema).map_err(|e| format!("bad schema {name}: {e}"))?;
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("\n"))
    }
}

pub fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
