//! JSON reports, schema version 1.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "coiso";

/// A named input file and its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Source {
        Source { name: name.into(), text: text.into() }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

/// One verdict. `certified` marks exact symbolic checks; grid and float checks are not.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub certified: bool,
    pub required: bool,
    pub detail: Value,
    /// Indices of failing grid points or samples.
    pub points: Vec<usize>,
    pub witness: Option<Value>,
}

impl Check {
    pub fn exact(name: impl Into<String>, pass: bool) -> Check {
        Check {
            name: name.into(),
            pass,
            certified: true,
            required: true,
            detail: Value::Null,
            points: vec![],
            witness: None,
        }
    }

    /// A verdict over grid points, failing at `bad`.
    pub fn on_grid(name: impl Into<String>, bad: Vec<usize>) -> Check {
        Check {
            name: name.into(),
            pass: bad.is_empty(),
            certified: false,
            required: true,
            detail: Value::Null,
            points: bad,
            witness: None,
        }
    }

    /// Marks a check failed without point indices, e.g. when it could not run.
    pub fn failed(mut self) -> Check {
        self.pass = false;
        self
    }

    pub fn optional(mut self) -> Check {
        self.required = false;
        self
    }

    pub fn detail(mut self, detail: Value) -> Check {
        self.detail = detail;
        self
    }

    pub fn witness(mut self, witness: Value) -> Check {
        self.witness = Some(witness);
        self
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "certified": self.certified,
            "required": self.required,
            "detail": self.detail,
            "points": self.points,
            "witness": self.witness,
        })
    }
}

/// Failing indices of a per-point verdict vector.
pub fn failing(per_point: &[bool]) -> Vec<usize> {
    per_point.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<Source>,
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    /// Wall time, only when requested; it would break byte-identical output.
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str, inputs: &[&Source]) -> Report {
        Report {
            command: command.into(),
            inputs: inputs.iter().map(|s| (*s).clone()).collect(),
            checks: vec![],
            data: Map::new(),
            elapsed_ms: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.data.insert(key.into(), value);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// All required checks pass.
    pub fn pass(&self) -> bool {
        self.checks.iter().filter(|c| c.required).all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema": SCHEMA_VERSION,
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": self.inputs.iter().map(|s| json!({"name": s.name, "sha256": s.sha256()})).collect::<Vec<_>>(),
            "pass": self.pass(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "data": self.data,
        });
        if let Some(ms) = self.elapsed_ms {
            v["elapsed_ms"] = json!(ms);
        }
        v
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}
