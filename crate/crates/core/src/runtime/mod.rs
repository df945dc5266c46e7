//! Execution of test plans against a system under test, live or through
//! emitted script files, and the resulting verdicts.

mod check;
mod run;
mod script;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{AttributeKey, EntityId};
use crate::coverage::CoverageLedger;

pub use check::{check_actuators, check_output_state, CheckError, CheckOutcome};
pub use run::{run_plan, run_plan_parallel, run_test, RunOptions};
pub use script::{emit_scripts, load_scripts, parse_script, replay_script, write_script, ScriptError};

/// The state-of-entities database at one elaboration cycle: every declared
/// attribute, keyed uniquely.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub cycle: u64,
    pub values: BTreeMap<AttributeKey, String>,
}

impl StateSnapshot {
    pub fn get(&self, key: &AttributeKey) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SutError {
    #[error("unknown entity or attribute `{0}`")]
    UnknownEntity(String),
    #[error("value `{value}` is not accepted by `{target}`")]
    DomainViolation { target: String, value: String },
    #[error("`{0}` cannot be written directly")]
    NotInjectable(String),
}

/// What any system under test offers the runner. Calls are single-client.
pub trait SutContract {
    /// Back to the well-known initial state. Idempotent.
    fn reset(&mut self);
    /// Overwrite a sensor or actuator attribute, effective immediately.
    fn inject(&mut self, key: &AttributeKey, value: &str) -> Result<(), SutError>;
    /// Queue an input for a sensor, consumed at the next cycle.
    fn stimulate(&mut self, sensor: &EntityId, value: &str) -> Result<(), SutError>;
    fn cycle(&mut self, n: u32);
    fn snapshot(&self) -> StateSnapshot;
    /// Coverage recorded since the previous call.
    fn take_coverage(&mut self) -> CoverageLedger {
        CoverageLedger::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passed,
    Failed,
    /// No check ran.
    Vacuous,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: String,
    pub expected: String,
    pub observed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResult {
    pub id: String,
    pub verdict: Verdict,
    pub checks: usize,
    pub failures: Vec<CheckFailure>,
    pub cycles: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub passed: usize,
    pub failed: usize,
    pub vacuous: usize,
    pub error: usize,
}

impl Tallies {
    pub fn of(results: &[TestResult]) -> Self {
        let mut t = Tallies::default();
        for r in results {
            match r.verdict {
                Verdict::Passed => t.passed += 1,
                Verdict::Failed => t.failed += 1,
                Verdict::Vacuous => t.vacuous += 1,
                Verdict::Error => t.error += 1,
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub station: String,
    pub plan_fingerprint: String,
    pub results: Vec<TestResult>,
    pub tallies: Tallies,
    /// Output-state checks where the association scan and the direct lookup
    /// disagreed.
    pub divergences: usize,
    /// Set when the run stopped at the first failure.
    pub aborted: bool,
    pub coverage: CoverageLedger,
}

impl RunReport {
    /// 0 when everything passed or was vacuous, 1 on failures, 2 on errors.
    pub fn exit_code(&self) -> i32 {
        if self.tallies.error > 0 {
            2
        } else if self.tallies.failed > 0 {
            1
        } else {
            0
        }
    }

    pub fn verdicts(&self) -> Vec<(String, Verdict)> {
        self.results.iter().map(|r| (r.id.clone(), r.verdict)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One line per test, failures indented below, then the tallies.
    pub fn render_table(&self) -> String {
        let width = self.results.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
        let mut out = String::new();
        let _ = writeln!(out, "{:width$}  {:8}  {:>6}  {:>6}", "id", "verdict", "checks", "cycles");
        for r in &self.results {
            let verdict = match r.verdict {
                Verdict::Passed => "PASSED",
                Verdict::Failed => "FAILED",
                Verdict::Vacuous => "VACUOUS",
                Verdict::Error => "ERROR",
            };
            let _ = writeln!(out, "{:width$}  {:8}  {:>6}  {:>6}", r.id, verdict, r.checks, r.cycles);
            for f in &r.failures {
                let _ = writeln!(out, "    {}: expected {}, observed {}", f.check, f.expected, f.observed);
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "    error: {e}");
            }
        }
        let t = self.tallies;
        let _ = writeln!(
            out,
            "{} tests: {} passed, {} failed, {} vacuous, {} error",
            self.results.len(),
            t.passed,
            t.failed,
            t.vacuous,
            t.error
        );
        if t.vacuous > 0 {
            let _ = writeln!(out, "warning: {} test(s) ran no check", t.vacuous);
        }
        if self.divergences > 0 {
            let _ = writeln!(out, "warning: {} strategy divergence(s)", self.divergences);
        }
        if self.aborted {
            let _ = writeln!(out, "run aborted at first failure");
        }
        out
    }
}
