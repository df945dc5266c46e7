use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::StateSnapshot;
use crate::config::{logic_for_attribute_traced, AssocList, AttributeKey, ConfigurationDatabase, EntityClass, EntityId};
use crate::coverage::{CoverageEvent, CoverageLedger};
use crate::instantiate::{ActuatorCheck, PhysicalTest, StateCheck};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("actuator attribute `{0}` is missing from the snapshot")]
    UnknownActuator(String),
    #[error("no attribute resolves for `{0}`")]
    AttributeUnresolved(String),
    #[error("`{name}`: association scan found [{}], snapshot lookup found [{}]", scan.join(", "), direct.join(", "))]
    StrategyDivergence { name: String, scan: Vec<String>, direct: Vec<String> },
}

pub fn check_actuators(checks: &[ActuatorCheck], snapshot: &StateSnapshot) -> Result<Vec<CheckOutcome>, CheckError> {
    checks
        .iter()
        .map(|c| {
            let key = c.key();
            let observed = snapshot.get(&key).ok_or_else(|| CheckError::UnknownActuator(key.rendered()))?;
            Ok(CheckOutcome {
                check: key.rendered(),
                expected: c.expected.expected_text(),
                observed: observed.to_string(),
                passed: c.expected.holds(observed),
            })
        })
        .collect()
}

/// Resolves every output-state check twice, through the association lists
/// and by direct lookup in the snapshot, and evaluates it on every attribute
/// found.
pub fn check_output_state(
    checks: &[StateCheck],
    snapshot: &StateSnapshot,
    db: &ConfigurationDatabase,
    test: &PhysicalTest,
) -> Result<Vec<CheckOutcome>, CheckError> {
    check_output_state_recorded(checks, snapshot, db, test, &mut CoverageLedger::default())
}

pub(crate) fn check_output_state_recorded(
    checks: &[StateCheck],
    snapshot: &StateSnapshot,
    db: &ConfigurationDatabase,
    test: &PhysicalTest,
    ledger: &mut CoverageLedger,
) -> Result<Vec<CheckOutcome>, CheckError> {
    let mut out = Vec::new();
    for c in checks {
        let name = match &c.owner {
            Some(o) => AttributeKey::new(o.clone(), c.attr.clone()).rendered(),
            None => c.attr.clone(),
        };
        let scanned = by_association(db, c, test, ledger);
        let direct = by_lookup(db, c, test, snapshot);
        let a: BTreeSet<&AttributeKey> = scanned.iter().collect();
        let b: BTreeSet<&AttributeKey> = direct.iter().collect();
        if a != b {
            return Err(CheckError::StrategyDivergence {
                name,
                scan: a.iter().map(|k| k.rendered()).collect(),
                direct: b.iter().map(|k| k.rendered()).collect(),
            });
        }
        if scanned.is_empty() {
            return Err(CheckError::AttributeUnresolved(name));
        }
        for key in scanned {
            let observed = snapshot.get(&key).expect("both strategies found the key");
            ledger.record(CoverageEvent::AttributeAccess { key: key.clone() });
            out.push(CheckOutcome {
                check: key.rendered(),
                expected: c.expected.expected_text(),
                observed: observed.to_string(),
                passed: c.expected.holds(observed),
            });
        }
    }
    Ok(out)
}

fn by_association(
    db: &ConfigurationDatabase,
    check: &StateCheck,
    test: &PhysicalTest,
    ledger: &mut CoverageLedger,
) -> Vec<AttributeKey> {
    let mut sensors = test.stimulated_sensors();
    let mut actuators = test.checked_actuators();
    if let Some(owner) = &check.owner {
        match db.class_of(owner) {
            Some(EntityClass::Logic) => {
                sensors.extend(db.sensors_of(owner).cloned());
                actuators.extend(db.actuators_of(owner).map(|a| a.actuator.clone()));
            }
            Some(EntityClass::Sensor) => sensors.push(owner.clone()),
            Some(EntityClass::Actuator) => actuators.push(owner.clone()),
            None => {}
        }
    }
    let mut record = |list: AssocList, index: usize| {
        ledger.record(CoverageEvent::AssocRead { list, index });
    };
    logic_for_attribute_traced(db, &check.attr, &sensors, &actuators, &mut record)
        .into_iter()
        .filter(|(owner, _)| check.owner.as_ref().is_none_or(|o| o == owner))
        .map(|(_, key)| key)
        .collect()
}

fn by_lookup(
    db: &ConfigurationDatabase,
    check: &StateCheck,
    test: &PhysicalTest,
    snapshot: &StateSnapshot,
) -> Vec<AttributeKey> {
    if let Some(owner) = &check.owner {
        let key = AttributeKey::new(owner.clone(), check.attr.clone());
        return if snapshot.values.contains_key(&key) { vec![key] } else { Vec::new() };
    }
    let touched: BTreeSet<EntityId> =
        test.stimulated_sensors().into_iter().chain(test.checked_actuators()).collect();
    let mut scope = touched.clone();
    for lp in db.logic() {
        let serves = db.sensors_of(&lp.id).any(|s| touched.contains(s))
            || db.actuators_of(&lp.id).any(|a| touched.contains(&a.actuator));
        if serves {
            scope.insert(lp.id.clone());
        }
    }
    snapshot.values.keys().filter(|k| k.attr == check.attr && scope.contains(&k.owner)).cloned().collect()
}
