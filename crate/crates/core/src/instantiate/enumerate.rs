//! Binding, input-state and input-value enumeration.

use std::collections::{BTreeMap, HashMap};

use super::{InstantiateOptions, InstantiationError, SystemStateAssignment};
use crate::config::select::select_unchecked;
use crate::config::{AttributeKey, ConfigurationDatabase, EntityClass, EntityId, Env, ValueExpr};
use crate::predicate::Predicate;
use crate::suite::{AbstractTestCase, OwnerRef, Quantifier, StateAtom, StateRef};

/// Cartesian product of every binding's matches, each selector evaluated
/// with the earlier bindings in scope. Later bindings vary fastest.
pub fn enumerate_bindings(case: &AbstractTestCase, db: &ConfigurationDatabase) -> Vec<Env> {
    let mut out = vec![Env::new()];
    for b in &case.bindings {
        let mut next = Vec::new();
        for env in &out {
            for e in select_unchecked(db, &b.selector, env) {
                let mut extended = env.clone();
                extended.insert(b.var.clone(), e);
                next.push(extended);
            }
        }
        out = next;
        if out.is_empty() {
            break;
        }
    }
    out
}

pub(crate) fn resolve_owner(owner: &OwnerRef, env: &Env) -> Option<EntityId> {
    match owner {
        OwnerRef::Var(v) => env.get(v).cloned(),
        OwnerRef::Entity(e) => Some(e.clone()),
    }
}

/// Influence variables of a case under one binding, plus the values
/// non-influence keys take in the targeted input state.
pub(crate) struct StateSpace {
    pub vars: Vec<(AttributeKey, Vec<String>)>,
    pub groups: BTreeMap<String, Vec<usize>>,
    var_index: HashMap<AttributeKey, usize>,
    /// Top-level `key = value` conjuncts on keys that are not influence
    /// variables.
    pub pinned: Vec<(AttributeKey, String)>,
    initial: HashMap<AttributeKey, String>,
}

impl StateSpace {
    pub fn build(case: &AbstractTestCase, env: &Env, db: &ConfigurationDatabase) -> Result<Self, InstantiationError> {
        let mut vars: Vec<(AttributeKey, Vec<String>)> = Vec::new();
        let mut var_index = HashMap::new();
        let mut groups = BTreeMap::new();
        for decl in &case.influence {
            let mut members = Vec::new();
            for id in select_unchecked(db, &decl.target, env) {
                let entity = db.entity(&id).expect("selected entity is declared");
                let Some(schema) = entity.attribute(&decl.attr) else { continue };
                let key = entity.key(&decl.attr);
                if let Some(&i) = var_index.get(&key) {
                    members.push(i);
                    continue;
                }
                let domain = match &decl.domain {
                    Some(d) => {
                        if let Some(bad) = d.iter().find(|v| !schema.contains(v)) {
                            return Err(InstantiationError::DomainViolation {
                                key: key.rendered(),
                                value: bad.clone(),
                            });
                        }
                        d.clone()
                    }
                    None => schema.domain.clone(),
                };
                var_index.insert(key.clone(), vars.len());
                members.push(vars.len());
                vars.push((key, domain));
            }
            groups.insert(decl.name.clone(), members);
        }

        let mut pinned = Vec::new();
        for req in case.requirements() {
            let Some(owner) = resolve_owner(&req.owner, env) else { continue };
            let key = AttributeKey::new(owner, req.attr);
            if var_index.contains_key(&key) {
                continue;
            }
            let schema = db.schema(&key).ok_or_else(|| InstantiationError::UnknownAttribute(key.rendered()))?;
            if !schema.contains(&req.value) {
                return Err(InstantiationError::DomainViolation { key: key.rendered(), value: req.value });
            }
            if !pinned.iter().any(|(k, _)| *k == key) {
                pinned.push((key, req.value));
            }
        }

        let mut initial = HashMap::new();
        for atom in case.state_in.atoms().into_iter().chain(
            case.conditions.iter().filter_map(|c| c.when.as_ref()).flat_map(|w| w.atoms()),
        ) {
            if let StateRef::Key { attr, owner } = &atom.target {
                if let Some(owner) = resolve_owner(owner, env) {
                    let key = AttributeKey::new(owner, attr.clone());
                    if let Some(s) = db.schema(&key) {
                        initial.insert(key, s.initial.clone());
                    }
                }
            }
        }

        Ok(StateSpace { vars, groups, var_index, pinned, initial })
    }

    /// Evaluates a state predicate on one assignment of the influence
    /// variables. Keys outside the influence set take their pinned value or,
    /// failing that, their initial value.
    pub fn eval(&self, pred: &Predicate<StateAtom>, env: &Env, values: &[&str]) -> bool {
        pred.eval(&mut |atom: &StateAtom| {
            let observed: Vec<&str> = match &atom.target {
                StateRef::Group(g) => self.groups.get(g).map(|m| m.iter().map(|&i| values[i]).collect()).unwrap_or_default(),
                StateRef::Key { attr, owner } => {
                    let Some(owner) = resolve_owner(owner, env) else { return false };
                    let key = AttributeKey::new(owner, attr.clone());
                    match self.var_index.get(&key) {
                        Some(&i) => vec![values[i]],
                        None => match self.pinned.iter().find(|(k, _)| *k == key) {
                            Some((_, v)) => vec![v.as_str()],
                            None => match self.initial.get(&key) {
                                Some(v) => vec![v.as_str()],
                                None => return false,
                            },
                        },
                    }
                }
                StateRef::Name(_) => return false,
            };
            match atom.quant {
                Some(Quantifier::Any) => observed.iter().any(|v| atom.op.holds(v, &atom.values)),
                _ => observed.iter().all(|v| atom.op.holds(v, &atom.values)),
            }
        })
    }
}

/// Result of enumerating the input states of one binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateEnumeration {
    pub states: Vec<SystemStateAssignment>,
    /// Set when the configured cap cut the enumeration short.
    pub truncated: bool,
}

/// All assignments of the influence variables, over the product of their
/// domains, that satisfy the case's input-state predicate. The first
/// variable varies slowest.
pub fn enumerate_input_states(
    case: &AbstractTestCase,
    binding: &Env,
    db: &ConfigurationDatabase,
    options: &InstantiateOptions,
) -> Result<StateEnumeration, InstantiationError> {
    let space = StateSpace::build(case, binding, db)?;
    enumerate_space(case, binding, &space, options)
}

pub(crate) fn enumerate_space(
    case: &AbstractTestCase,
    binding: &Env,
    space: &StateSpace,
    options: &InstantiateOptions,
) -> Result<StateEnumeration, InstantiationError> {
    let mut states = Vec::new();
    let mut truncated = false;
    let n = space.vars.len();
    let mut digits = vec![0usize; n];
    if space.vars.iter().any(|(_, d)| d.is_empty()) {
        return Ok(StateEnumeration { states, truncated });
    }
    loop {
        let values: Vec<&str> = digits.iter().enumerate().map(|(i, &d)| space.vars[i].1[d].as_str()).collect();
        if space.eval(&case.state_in, binding, &values) {
            if let Some(cap) = options.max_states {
                if states.len() == cap {
                    if options.truncate {
                        truncated = true;
                        break;
                    }
                    return Err(InstantiationError::CombinatorialLimit { case: case.name.clone(), limit: cap });
                }
            }
            states.push(SystemStateAssignment {
                assignments: space
                    .vars
                    .iter()
                    .zip(&values)
                    .map(|((k, _), v)| (k.clone(), v.to_string()))
                    .collect(),
            });
        }
        // odometer: last digit fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(StateEnumeration { states, truncated });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < space.vars[pos].1.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(StateEnumeration { states, truncated })
}

/// Selected sensors with the rendered input values each may receive.
pub(crate) fn input_slots(
    case: &AbstractTestCase,
    env: &Env,
    db: &ConfigurationDatabase,
) -> Result<Vec<(EntityId, Vec<String>)>, InstantiationError> {
    let mut slots: Vec<(EntityId, Vec<String>)> = Vec::new();
    for input in &case.inputs {
        let values: Vec<String> = input
            .alternatives
            .iter()
            .map(|words| {
                words
                    .iter()
                    .map(|w| match w {
                        ValueExpr::Entity(v) => env.get(v).map(|e| e.to_string()).unwrap_or_default(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        for sensor in select_unchecked(db, &input.sensors, env) {
            if slots.iter().any(|(s, _)| *s == sensor) {
                return Err(InstantiationError::DuplicateStimulus { case: case.name.clone(), sensor: sensor.to_string() });
            }
            debug_assert_eq!(db.class_of(&sensor), Some(EntityClass::Sensor));
            slots.push((sensor, values.clone()));
        }
    }
    Ok(slots)
}

/// Every way of giving each slot one of its values; last slot fastest.
pub(crate) fn input_combinations(slots: &[(EntityId, Vec<String>)]) -> Vec<Vec<(EntityId, String)>> {
    let mut out = vec![Vec::new()];
    for (sensor, values) in slots {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for prefix in &out {
            for v in values {
                let mut combo = prefix.clone();
                combo.push((sensor.clone(), v.clone()));
                next.push(combo);
            }
        }
        out = next;
    }
    out
}
