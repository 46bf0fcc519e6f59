//! Report layout. All wall-clock data lives in the top-level `timing` map so
//! that two runs of the same config differ only there.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Config, Diagnostic, JobKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Self { name: "blocknorm".into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub name: String,
    pub kind: JobKind,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: Tool,
    /// Effective config with every seed, budget and tolerance filled in.
    pub config: Config,
    pub passed: bool,
    pub results: Vec<JobResult>,
    /// Seconds per job (keyed `job:<name>`) and for the whole run (`total`).
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    /// 0 when every job passed, 1 on a failed check, 3 on an internal error.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().any(|r| r.status == JobStatus::Error) {
            3
        } else if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Output of the `validate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tool: Tool,
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// A report as JSON with the `timing` map removed.
pub fn strip_timing(report_json: &str) -> serde_json::Result<String> {
    let mut v: Value = serde_json::from_str(report_json)?;
    if let Value::Object(m) = &mut v {
        m.remove("timing");
    }
    serde_json::to_string(&v)
}
