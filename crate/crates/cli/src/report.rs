//! Run reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "schottky-zeta/run-report/v1";

/// One identity or validity check with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured residual or quantity; `None` when not finite.
    pub value: Option<f64>,
    pub tolerance: f64,
    /// How `value` is compared with `tolerance`: `<`, `>` or `==`.
    pub relation: String,
    pub passed: bool,
}

impl Check {
    /// Passes iff `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value: value.is_finite().then_some(value),
            tolerance,
            relation: "<".into(),
            passed: value < tolerance,
        }
    }

    /// Exact check; `value` is 0 on success and 1 on failure.
    pub fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: Some(if ok { 0.0 } else { 1.0 }),
            tolerance: 0.0,
            relation: "==".into(),
            passed: ok,
        }
    }

    /// Passes iff `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value: value.is_finite().then_some(value),
            tolerance: bound,
            relation: ">".into(),
            passed: value > bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    /// Resolved spec and effective options.
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, threads: usize) -> Self {
        RunReport {
            schema: REPORT_SCHEMA.into(),
            command: command.into(),
            inputs: Value::Null,
            results: Value::Null,
            checks: Vec::new(),
            warnings: Vec::new(),
            error: None,
            timing: Timing {
                elapsed_ms: 0.0,
                threads,
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    /// 0 on success, 1 on a failed check, 2 on an input error.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Adds `label: w` for each warning not already present.
    pub fn add_warnings<'a>(&mut self, label: &str, ws: impl IntoIterator<Item = &'a String>) {
        for w in ws {
            let w = format!("{label}: {w}");
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let mut r = RunReport::new("tate", 1);
        assert_eq!(r.exit_code(), 0);
        r.checks.push(Check::below("x", 2.0, 1.0));
        assert_eq!(r.exit_code(), 1);
        r.error = Some("bad".into());
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn non_finite_values_serialize() {
        let c = Check::below("nan", f64::NAN, 1.0);
        assert!(!c.passed && c.value.is_none());
        let mut r = RunReport::new("products", 1);
        r.checks.push(c);
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn warnings_are_labelled_once() {
        let mut r = RunReport::new("products", 1);
        let ws = vec!["slow".to_string()];
        r.add_warnings("F(1)", &ws);
        r.add_warnings("F(1)", &ws);
        r.add_warnings("F(2)", &ws);
        assert_eq!(r.warnings, ["F(1): slow", "F(2): slow"]);
    }
}
