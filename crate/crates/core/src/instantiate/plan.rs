//! Physical tests and the plan that collects them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{AttributeKey, EntityId};
use crate::predicate::ValuePredicate;

pub(crate) fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stimulus {
    /// Overwrite a sensor or actuator attribute directly.
    Inject { key: AttributeKey, value: String },
    /// Deliver an input to a sensor.
    Stimulate { sensor: EntityId, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputStep {
    Apply(Stimulus),
    Cycle(u32),
}

/// Steps replayed from the initial state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputSequence {
    pub steps: Vec<InputStep>,
}

impl InputSequence {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Values of the influence variables for one input state, in enumeration
/// order. Keys are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemStateAssignment {
    pub assignments: Vec<(AttributeKey, String)>,
}

impl SystemStateAssignment {
    pub fn get(&self, key: &AttributeKey) -> Option<&str> {
        self.assignments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActuatorCheck {
    pub entity: EntityId,
    pub attr: String,
    pub expected: ValuePredicate,
}

impl ActuatorCheck {
    pub fn key(&self) -> AttributeKey {
        AttributeKey::new(self.entity.clone(), self.attr.clone())
    }
}

/// Output-state check. Without an owner, every homonymous attribute
/// reachable from the test's sensors and actuators is checked.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateCheck {
    pub attr: String,
    pub owner: Option<EntityId>,
    pub expected: ValuePredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Pass,
    /// The listed logic processes must refuse the input: none of their
    /// attributes, nor those of their actuators, may change.
    RejectExpected { logic: Vec<EntityId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhysicalTest {
    /// `<case>#<binding-values>#<state-index>#<input-index>`
    pub id: String,
    pub source_case: String,
    pub binding: Vec<(String, EntityId)>,
    pub preamble: InputSequence,
    pub state_setup: SystemStateAssignment,
    pub stimuli: Vec<(EntityId, String)>,
    pub settle_cycles: u32,
    pub actuator_checks: Vec<ActuatorCheck>,
    pub state_checks: Vec<StateCheck>,
    pub expected_verdict: ExpectedVerdict,
    /// Condition-table classes this test exercises.
    pub conditions: Vec<String>,
}

impl PhysicalTest {
    /// The full sequence this test applies from reset, up to its checks.
    /// Later tests splice it into their preambles.
    pub fn replay_sequence(&self) -> InputSequence {
        let mut steps = self.preamble.steps.clone();
        steps.extend(self.injections().map(InputStep::Apply));
        steps.extend(self.stimuli().map(InputStep::Apply));
        if self.settle_cycles > 0 {
            steps.push(InputStep::Cycle(self.settle_cycles));
        }
        InputSequence { steps }
    }

    pub fn injections(&self) -> impl Iterator<Item = Stimulus> + '_ {
        self.state_setup
            .assignments
            .iter()
            .map(|(key, value)| Stimulus::Inject { key: key.clone(), value: value.clone() })
    }

    pub fn stimuli(&self) -> impl Iterator<Item = Stimulus> + '_ {
        self.stimuli.iter().map(|(sensor, value)| Stimulus::Stimulate { sensor: sensor.clone(), value: value.clone() })
    }

    pub fn check_count(&self) -> usize {
        let reject = match &self.expected_verdict {
            ExpectedVerdict::Pass => 0,
            ExpectedVerdict::RejectExpected { logic } => logic.len(),
        };
        self.actuator_checks.len() + self.state_checks.len() + reject
    }

    pub fn binding_label(&self) -> String {
        if self.binding.is_empty() {
            "_".to_string()
        } else {
            self.binding.iter().map(|(_, e)| e.as_str()).collect::<Vec<_>>().join(",")
        }
    }

    /// Entities the test stimulates; scope of output-state resolution.
    pub fn stimulated_sensors(&self) -> Vec<EntityId> {
        self.stimuli.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Actuators under check, first occurrence order.
    pub fn checked_actuators(&self) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = Vec::new();
        for c in &self.actuator_checks {
            if !out.contains(&c.entity) {
                out.push(c.entity.clone());
            }
        }
        out
    }
}

/// Script file name of the `index`-th test of a plan.
pub fn script_name(index: usize) -> String {
    format!("t{index:05}.pts")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPlan {
    pub station_name: String,
    pub suite_fingerprint: String,
    pub tests: Vec<PhysicalTest>,
}

impl TestPlan {
    pub fn fingerprint(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("plan serializes"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    /// `(case, count)` in first-appearance order.
    pub fn case_counts(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for t in &self.tests {
            match out.iter_mut().find(|(c, _)| *c == t.source_case) {
                Some((_, n)) => *n += 1,
                None => out.push((t.source_case.clone(), 1)),
            }
        }
        out
    }

    /// Text manifest: header, per-case cardinalities, then one line per test.
    /// Cases that produced no tests are listed from `cases` with a zero.
    pub fn manifest(&self, cases: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# abstest plan manifest");
        let _ = writeln!(out, "station {}", self.station_name);
        let _ = writeln!(out, "suite {}", self.suite_fingerprint);
        let _ = writeln!(out, "plan {}", self.fingerprint());
        let _ = writeln!(out, "tests {}", self.tests.len());
        let counts = self.case_counts();
        for name in cases {
            let n = counts.iter().find(|(c, _)| c == name).map_or(0, |(_, n)| *n);
            let _ = writeln!(out, "case {name} {n}");
        }
        for (i, t) in self.tests.iter().enumerate() {
            let bind: Vec<String> = t.binding.iter().map(|(v, e)| format!("{v}={e}")).collect();
            let bind = if bind.is_empty() { "-".to_string() } else { bind.join(",") };
            let _ = writeln!(out, "test {} {} {} {}", t.id, t.source_case, bind, script_name(i));
        }
        out
    }
}
