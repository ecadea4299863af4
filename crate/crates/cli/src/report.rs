use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Outcome of one command: a text summary, a JSON document and whether
/// every checked identity held.
pub struct Report {
    pub command: &'static str,
    pub pass: bool,
    text: String,
    json: Value,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report { command, pass: true, text: String::new(), json: json!({ "command": command }) }
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn field(&mut self, key: &str, value: Value) {
        self.json[key] = value;
    }

    pub fn fail(&mut self, why: impl AsRef<str>) {
        self.pass = false;
        self.line(format!("FAIL: {}", why.as_ref()));
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut doc = self.json.clone();
            doc["pass"] = Value::Bool(self.pass);
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        } else {
            let mut s = self.text.clone();
            let _ = writeln!(s, "{}: {}", self.command, if self.pass { "PASS" } else { "FAIL" });
            s
        }
    }

    pub fn emit(&self, as_json: bool, out: Option<&Path>) -> Result<()> {
        let body = self.render(as_json);
        match out {
            Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(body.as_bytes()).context("writing to stdout")
            }
        }
    }
}

/// Running maximum with the tuple that produced it.
pub struct Worst {
    pub value: f64,
    pub witness: Value,
}

impl Worst {
    pub fn new() -> Self {
        Worst { value: 0.0, witness: Value::Null }
    }

    pub fn see(&mut self, value: f64, witness: impl FnOnce() -> Value) {
        if value > self.value || value.is_nan() || self.witness.is_null() {
            self.value = value;
            self.witness = witness();
        }
    }

    pub fn json(&self) -> Value {
        json!({ "value": self.value, "witness": self.witness })
    }
}

pub fn complex(c: num_complex::Complex64) -> Value {
    json!([c.re, c.im])
}
