//! Structured pass/fail records.
//!
//! JSON layout:
//! `{"scenario": str, "checks": [{"name", "pass", "residual", "witness"?}], "tol", "seed"}`
//! with an optional `"reports"` array holding nested per-scenario reports.
//! Floats are written with 17 significant digits.

use std::fmt::Write as _;

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(format!("{x:.16e}")).map_err(S::Error::custom)?;
    raw.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, residual: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            residual,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub checks: Vec<Check>,
    #[serde(serialize_with = "ser_f64")]
    pub tol: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<Report>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, tol: f64, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            checks: Vec::new(),
            tol,
            seed,
            reports: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// True iff every check here and in every nested report passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.reports.iter().all(Report::passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.residual)
            .chain(self.reports.iter().map(Report::max_residual))
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn write_text(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{pad}[{verdict}] {} (tol {:e}, seed {})",
            self.scenario, self.tol, self.seed
        );
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            let _ = write!(
                out,
                "{pad}  {mark} {:<40} residual {:.3e}",
                c.name, c.residual
            );
            if let Some(w) = &c.witness {
                let _ = write!(out, "  witness {w}");
            }
            out.push('\n');
        }
        for r in &self.reports {
            r.write_text(out, depth + 1);
        }
    }
}
