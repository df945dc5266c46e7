//! Coverage measures: which configuration entries, attributes and route
//! state-machine transitions a run exercised, and the route-by-condition
//! table.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::config::{registry, AssocList, AttributeKey, ConfigurationDatabase, EntityId};
use crate::instantiate::TestPlan;
use crate::runtime::{TestResult, Verdict};

/// Columns of the condition table, in display order.
pub const CONDITION_CLASSES: &[&str] = &[
    "formation",
    "tc_occupied",
    "tc_broken",
    "sp_out_of_control",
    "ls_failed",
    "sp_locked_conflict",
    "passage",
    "liberation",
];

pub fn is_condition_class(name: &str) -> bool {
    CONDITION_CLASSES.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub event: String,
    pub to: String,
}

impl Transition {
    pub fn new(from: &str, event: &str, to: &str) -> Self {
        Transition { from: from.into(), event: event.into(), to: to.into() }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} --{}--> {}", self.from, self.event, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverageEvent {
    AssocRead { list: AssocList, index: usize },
    AttributeAccess { key: AttributeKey },
    Transition(Transition),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageLedger {
    pub entries: BTreeSet<(AssocList, usize)>,
    pub attributes: BTreeSet<AttributeKey>,
    pub transitions: BTreeSet<Transition>,
}

impl CoverageLedger {
    /// Returns whether the event was new.
    pub fn record(&mut self, event: CoverageEvent) -> bool {
        match event {
            CoverageEvent::AssocRead { list, index } => self.entries.insert((list, index)),
            CoverageEvent::AttributeAccess { key } => self.attributes.insert(key),
            CoverageEvent::Transition(t) => self.transitions.insert(t),
        }
    }

    pub fn merge(&mut self, other: CoverageLedger) {
        self.entries.extend(other.entries);
        self.attributes.extend(other.attributes);
        self.transitions.extend(other.transitions);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.attributes.is_empty() && self.transitions.is_empty()
    }

    pub fn summary(&self, db: &ConfigurationDatabase, transition_universe: &[Transition]) -> CoverageSummary {
        let count = |list: AssocList, total: usize| Fraction {
            covered: self.entries.iter().filter(|(l, i)| *l == list && *i < total).count(),
            total,
        };
        let keys: BTreeSet<AttributeKey> = db.attribute_keys().into_iter().collect();
        CoverageSummary {
            sensor_assoc: count(AssocList::SensorAssoc, db.sensor_assoc().len()),
            actuator_assoc: count(AssocList::ActuatorAssoc, db.actuator_assoc().len()),
            attributes: Fraction { covered: self.attributes.intersection(&keys).count(), total: keys.len() },
            transitions: Fraction {
                covered: transition_universe.iter().filter(|t| self.transitions.contains(t)).count(),
                total: transition_universe.len(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub covered: usize,
    pub total: usize,
}

impl Fraction {
    /// An empty universe counts as fully covered.
    pub fn ratio(self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.1}%)", self.covered, self.total, self.ratio() * 100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub sensor_assoc: Fraction,
    pub actuator_assoc: Fraction,
    pub attributes: Fraction,
    pub transitions: Fraction,
}

/// Routes by condition classes. A cell lists the tests that covered it;
/// an empty list is an uncovered cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionTable {
    pub routes: Vec<EntityId>,
    pub classes: Vec<String>,
    pub cells: Vec<Vec<Vec<String>>>,
}

impl ConditionTable {
    pub fn empty(db: &ConfigurationDatabase) -> Self {
        let routes: Vec<EntityId> =
            db.logic().iter().filter(|d| d.kind == registry::ROUTE).map(|d| d.id.clone()).collect();
        let classes: Vec<String> = CONDITION_CLASSES.iter().map(|c| c.to_string()).collect();
        let cells = vec![vec![Vec::new(); classes.len()]; routes.len()];
        ConditionTable { routes, classes, cells }
    }

    pub fn covered_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| !c.is_empty()).count()
    }

    pub fn total_cells(&self) -> usize {
        self.routes.len() * self.classes.len()
    }

    pub fn fraction(&self) -> f64 {
        Fraction { covered: self.covered_cells(), total: self.total_cells() }.ratio()
    }

    pub fn cell(&self, route: &str, class: &str) -> Option<&[String]> {
        let r = self.routes.iter().position(|x| x == route)?;
        let c = self.classes.iter().position(|x| x == class)?;
        Some(&self.cells[r][c])
    }

    /// Fixed-width matrix, `X` for covered cells and `.` otherwise.
    pub fn render_text(&self) -> String {
        let width = self.routes.iter().map(|r| r.as_str().len()).max().unwrap_or(0).max(5);
        let mut out = format!("{:width$}", "route");
        for c in &self.classes {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
        for (r, row) in self.routes.iter().zip(&self.cells) {
            let _ = write!(out, "{:width$}", r.as_str());
            for (c, cell) in self.classes.iter().zip(row) {
                let mark = if cell.is_empty() { "." } else { "X" };
                let _ = write!(out, " {mark:^w$}", w = c.len());
            }
            out.push('\n');
        }
        let _ = writeln!(out, "covered {}/{} ({:.1}%)", self.covered_cells(), self.total_cells(), self.fraction() * 100.0);
        out
    }
}

/// Marks each (route, class) cell exercised by a test that ran its checks.
/// The route of a test is the first of its bindings naming a route; tests
/// without one, and vacuous or erroneous results, mark nothing.
pub fn condition_coverage(plan: &TestPlan, results: &[TestResult], db: &ConfigurationDatabase) -> ConditionTable {
    let mut table = ConditionTable::empty(db);
    let by_id: HashMap<&str, usize> = plan.tests.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    for result in results {
        if !matches!(result.verdict, Verdict::Passed | Verdict::Failed) {
            continue;
        }
        let Some(&ti) = by_id.get(result.id.as_str()) else { continue };
        let test = &plan.tests[ti];
        let Some(r) = test.binding.iter().find_map(|(_, e)| table.routes.iter().position(|x| x == e)) else {
            continue;
        };
        for class in &test.conditions {
            if let Some(c) = table.classes.iter().position(|x| x == class) {
                let cell = &mut table.cells[r][c];
                if !cell.contains(&result.id) {
                    cell.push(result.id.clone());
                }
            }
        }
    }
    table
}
