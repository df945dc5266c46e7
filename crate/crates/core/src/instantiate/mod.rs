//! Expansion of abstract test cases over one configuration into physical
//! tests: bindings, then satisfying input states, then one test per
//! combination of per-sensor input values.

mod enumerate;
mod plan;

use std::collections::HashMap;

use thiserror::Error;

pub use enumerate::{enumerate_bindings, enumerate_input_states, StateEnumeration};
pub use plan::{
    script_name, ActuatorCheck, ExpectedVerdict, InputSequence, InputStep, PhysicalTest, Stimulus,
    StateCheck, SystemStateAssignment, TestPlan,
};
pub(crate) use plan::sha256_hex;

use crate::config::select::select_unchecked;
use crate::config::{AttributeKey, ConfigurationDatabase, EntityClass, EntityId, Env};
use crate::predicate::{Op, ValuePredicate};
use crate::suite::{AbstractSuite, AbstractTestCase, StateRef};
use enumerate::{enumerate_space, input_combinations, input_slots, resolve_owner, StateSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiationError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("value `{value}` is outside the domain of `{key}`")]
    DomainViolation { key: String, value: String },
    #[error("test `{case}`: more than {limit} input states satisfy the input-state predicate")]
    CombinatorialLimit { case: String, limit: usize },
    #[error("test `{case}`: sensor `{sensor}` is selected by more than one input")]
    DuplicateStimulus { case: String, sensor: String },
    #[error("no earlier test establishes `{key} = {value}`")]
    UnreachableState { key: String, value: String },
    #[error("test `{case}`: expected value `{expr}` does not resolve for `{entity}`")]
    UnresolvedValue { case: String, expr: String, entity: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstantiateOptions {
    /// Cap on satisfying input states per binding. `None` is exhaustive.
    pub max_states: Option<usize>,
    /// Keep the first `max_states` states instead of failing.
    pub truncate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiationWarning {
    #[error("test `{case}` binding {binding}: input states truncated to {kept}")]
    Truncated { case: String, binding: String, kept: usize },
}

/// Finds the first earlier passing test whose output state pins `key` to
/// `value`.
fn producer_of<'a>(plan_so_far: &'a [PhysicalTest], key: &AttributeKey, value: &str) -> Option<&'a PhysicalTest> {
    plan_so_far.iter().find(|t| establishes(t, key, value))
}

fn establishes(t: &PhysicalTest, key: &AttributeKey, value: &str) -> bool {
    t.expected_verdict == ExpectedVerdict::Pass
        && t.state_checks.iter().any(|c| {
            c.attr == key.attr && c.owner.as_ref() == Some(&key.owner) && c.expected.pinned() == Some(value)
        })
}

/// Input sequence reaching the logic-process states `required` from reset,
/// spliced from the replay sequences of earlier tests that establish them.
/// Physical influence variables are left to the test's own injections;
/// a logic-process attribute in `state_setup` cannot be injected.
pub fn build_preamble(
    state_setup: &SystemStateAssignment,
    required: &[(AttributeKey, String)],
    plan_so_far: &[PhysicalTest],
    db: &ConfigurationDatabase,
) -> Result<InputSequence, InstantiationError> {
    preamble_with(state_setup, required, db, |key, value| producer_of(plan_so_far, key, value))
}

fn preamble_with<'a>(
    state_setup: &SystemStateAssignment,
    required: &[(AttributeKey, String)],
    db: &ConfigurationDatabase,
    mut producer: impl FnMut(&AttributeKey, &str) -> Option<&'a PhysicalTest>,
) -> Result<InputSequence, InstantiationError> {
    if let Some((key, value)) =
        state_setup.assignments.iter().find(|(k, _)| db.class_of(&k.owner) == Some(EntityClass::Logic))
    {
        return Err(InstantiationError::UnreachableState { key: key.rendered(), value: value.clone() });
    }
    let mut steps = Vec::new();
    for (key, value) in required {
        let schema = db.schema(key).ok_or_else(|| InstantiationError::UnknownAttribute(key.rendered()))?;
        if schema.initial == *value {
            continue;
        }
        let t = producer(key, value)
            .ok_or_else(|| InstantiationError::UnreachableState { key: key.rendered(), value: value.clone() })?;
        steps.extend(t.replay_sequence().steps);
    }
    Ok(InputSequence { steps })
}

/// Exhaustive instantiation of an ordered suite.
pub fn instantiate_suite(suite: &AbstractSuite, db: &ConfigurationDatabase) -> Result<TestPlan, InstantiationError> {
    instantiate_suite_with(suite, db, &InstantiateOptions::default()).map(|(plan, _)| plan)
}

pub fn instantiate_suite_with(
    suite: &AbstractSuite,
    db: &ConfigurationDatabase,
    options: &InstantiateOptions,
) -> Result<(TestPlan, Vec<InstantiationWarning>), InstantiationError> {
    let mut tests: Vec<PhysicalTest> = Vec::new();
    let mut warnings = Vec::new();
    let mut producers: HashMap<(AttributeKey, String), usize> = HashMap::new();

    for case in &suite.cases {
        for env in enumerate_bindings(case, db) {
            let start = tests.len();
            expand_binding(case, &env, db, options, &tests, &producers, &mut warnings)
                .map(|new| tests.extend(new))?;
            for (i, t) in tests.iter().enumerate().skip(start) {
                if t.expected_verdict != ExpectedVerdict::Pass {
                    continue;
                }
                for c in &t.state_checks {
                    if let (Some(owner), Some(v)) = (&c.owner, c.expected.pinned()) {
                        producers
                            .entry((AttributeKey::new(owner.clone(), c.attr.clone()), v.to_string()))
                            .or_insert(i);
                    }
                }
            }
        }
    }

    let plan = TestPlan {
        station_name: db.station_name().to_string(),
        suite_fingerprint: sha256_hex(suite.to_string().as_bytes()),
        tests,
    };
    Ok((plan, warnings))
}

fn expand_binding(
    case: &AbstractTestCase,
    env: &Env,
    db: &ConfigurationDatabase,
    options: &InstantiateOptions,
    plan_so_far: &[PhysicalTest],
    producers: &HashMap<(AttributeKey, String), usize>,
    warnings: &mut Vec<InstantiationWarning>,
) -> Result<Vec<PhysicalTest>, InstantiationError> {
    let binding: Vec<(String, EntityId)> = case.bindings.iter().map(|b| (b.var.clone(), env[&b.var].clone())).collect();
    let label = if binding.is_empty() {
        "_".to_string()
    } else {
        binding.iter().map(|(_, e)| e.as_str()).collect::<Vec<_>>().join(",")
    };

    let space = StateSpace::build(case, env, db)?;
    let enumeration = enumerate_space(case, env, &space, options)?;
    if enumeration.truncated {
        warnings.push(InstantiationWarning::Truncated {
            case: case.name.clone(),
            binding: label.clone(),
            kept: enumeration.states.len(),
        });
    }
    if enumeration.states.is_empty() {
        return Ok(Vec::new());
    }

    let (logic_pins, physical_pins): (Vec<_>, Vec<_>) = space
        .pinned
        .iter()
        .cloned()
        .partition(|(k, _)| db.class_of(&k.owner) == Some(EntityClass::Logic));

    let combos = input_combinations(&input_slots(case, env, db)?);
    let actuator_checks = actuator_checks(case, env, db)?;
    let state_checks = state_checks(case, env, &space);
    let expected_verdict = if case.reject.is_empty() {
        ExpectedVerdict::Pass
    } else {
        ExpectedVerdict::RejectExpected { logic: case.reject.iter().filter_map(|v| env.get(v).cloned()).collect() }
    };

    let mut out = Vec::new();
    for (si, state) in enumeration.states.iter().enumerate() {
        let mut setup = state.clone();
        for (k, v) in &physical_pins {
            if setup.get(k).is_none() {
                setup.assignments.push((k.clone(), v.clone()));
            }
        }
        let preamble = preamble_with(&setup, &logic_pins, db, |key, value| {
            producers.get(&(key.clone(), value.to_string())).map(|&i| &plan_so_far[i])
        })?;
        let values: Vec<&str> = state.assignments.iter().map(|(_, v)| v.as_str()).collect();
        let conditions: Vec<String> = case
            .conditions
            .iter()
            .filter(|c| c.when.as_ref().is_none_or(|w| space.eval(w, env, &values)))
            .map(|c| c.class.clone())
            .collect();
        for (ii, stimuli) in combos.iter().enumerate() {
            out.push(PhysicalTest {
                id: format!("{}#{label}#{si}#{ii}", case.name),
                source_case: case.name.clone(),
                binding: binding.clone(),
                preamble: preamble.clone(),
                state_setup: setup.clone(),
                stimuli: stimuli.clone(),
                settle_cycles: case.cycles,
                actuator_checks: actuator_checks.clone(),
                state_checks: state_checks.clone(),
                expected_verdict: expected_verdict.clone(),
                conditions: conditions.clone(),
            });
        }
    }
    Ok(out)
}

fn actuator_checks(
    case: &AbstractTestCase,
    env: &Env,
    db: &ConfigurationDatabase,
) -> Result<Vec<ActuatorCheck>, InstantiationError> {
    let mut out = Vec::new();
    for o in &case.outputs {
        for id in select_unchecked(db, &o.actuators, env) {
            if db.entity(&id).and_then(|d| d.attribute(&o.attr)).is_none() {
                continue;
            }
            let mut values = Vec::with_capacity(o.values.len());
            for v in &o.values {
                let resolved = v.resolve(db, env, &id).ok_or_else(|| InstantiationError::UnresolvedValue {
                    case: case.name.clone(),
                    expr: v.to_string(),
                    entity: id.to_string(),
                })?;
                if !values.contains(&resolved) {
                    values.push(resolved);
                }
            }
            let op = match (o.op, values.len()) {
                (Op::In, 1) => Op::Eq,
                (op, _) => op,
            };
            out.push(ActuatorCheck { entity: id, attr: o.attr.clone(), expected: ValuePredicate { op, values } });
        }
    }
    Ok(out)
}

fn state_checks(case: &AbstractTestCase, env: &Env, space: &StateSpace) -> Vec<StateCheck> {
    let mut out = Vec::new();
    for s in &case.state_out {
        let expected = ValuePredicate { op: s.op, values: s.values.clone() };
        match &s.target {
            StateRef::Key { attr, owner } => {
                if let Some(owner) = resolve_owner(owner, env) {
                    out.push(StateCheck { attr: attr.clone(), owner: Some(owner), expected });
                }
            }
            StateRef::Name(attr) => out.push(StateCheck { attr: attr.clone(), owner: None, expected }),
            StateRef::Group(g) => {
                for &i in space.groups.get(g).into_iter().flatten() {
                    let key = &space.vars[i].0;
                    out.push(StateCheck {
                        attr: key.attr.clone(),
                        owner: Some(key.owner.clone()),
                        expected: expected.clone(),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::t2;
    use crate::suite::{order_suite, parse_suite};

    const NOMINAL: &str = include_str!("../../tests/fixtures/nominal.atest");
    const NEGATIVE: &str = include_str!("../../tests/fixtures/negative.atest");

    fn suite(doc: &str) -> AbstractSuite {
        order_suite(&parse_suite(doc, &t2()).unwrap().0).unwrap()
    }

    fn env(pairs: &[(&str, &str)]) -> Env {
        pairs.iter().map(|(v, e)| (v.to_string(), EntityId::from(*e))).collect()
    }

    /// Every assignment of tc1, tc2, sp1.control and lsA.control, in
    /// enumeration order, with whether it is the all-available state.
    fn brute_force_route_a() -> Vec<(Vec<(&'static str, &'static str)>, bool)> {
        let mut out = Vec::new();
        for tc1 in ["Clear", "Occupied", "Broken"] {
            for tc2 in ["Clear", "Occupied", "Broken"] {
                for sp in ["Controlled", "OutOfControl"] {
                    for ls in ["Controlled", "Failed"] {
                        let ok = tc1 == "Clear" && tc2 == "Clear" && sp == "Controlled" && ls == "Controlled";
                        out.push((
                            vec![("status_tc1", tc1), ("status_tc2", tc2), ("control_sp1", sp), ("control_lsA", ls)],
                            ok,
                        ));
                    }
                }
            }
        }
        out
    }

    fn rendered(s: &SystemStateAssignment) -> Vec<(String, String)> {
        s.assignments.iter().map(|(k, v)| (k.rendered(), v.clone())).collect()
    }

    fn expected(rows: &[(Vec<(&str, &str)>, bool)], keep: bool) -> Vec<Vec<(String, String)>> {
        rows.iter()
            .filter(|(_, ok)| *ok == keep)
            .map(|(a, _)| a.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
            .collect()
    }

    #[test]
    fn bindings_of_route_variable() {
        let db = t2();
        let s = suite(NOMINAL);
        assert_eq!(enumerate_bindings(&s.cases[0], &db), vec![env(&[("r", "routeA")]), env(&[("r", "routeB")])]);
    }

    #[test]
    fn two_bindings_form_a_full_product() {
        let db = t2();
        let s = suite("test pair\n  bind r : logic kind=Route\n  bind s : logic kind=Route\nend\n");
        let b = enumerate_bindings(&s.cases[0], &db);
        assert_eq!(b.len(), 4);
        assert_eq!(b[1], env(&[("r", "routeA"), ("s", "routeB")]));
    }

    #[test]
    fn binding_over_empty_kind() {
        let db = t2();
        let (s, _) = parse_suite("test lines\n  bind x : logic kind=Line\nend\n", &db).unwrap();
        assert!(enumerate_bindings(&s.cases[0], &db).is_empty());
        assert!(instantiate_suite(&s, &db).unwrap().tests.is_empty());
    }

    #[test]
    fn nominal_state_is_one_of_36() {
        let db = t2();
        let s = suite(NOMINAL);
        let got = enumerate_input_states(&s.cases[0], &env(&[("r", "routeA")]), &db, &InstantiateOptions::default())
            .unwrap();
        let oracle = brute_force_route_a();
        assert_eq!(oracle.len(), 36);
        assert_eq!(got.states.iter().map(rendered).collect::<Vec<_>>(), expected(&oracle, true));
    }

    #[test]
    fn negative_states_are_the_other_35() {
        let db = t2();
        let s = suite(NEGATIVE);
        let got = enumerate_input_states(&s.cases[0], &env(&[("r", "routeA")]), &db, &InstantiateOptions::default())
            .unwrap();
        let want = expected(&brute_force_route_a(), false);
        assert_eq!(want.len(), 35);
        assert_eq!(got.states.iter().map(rendered).collect::<Vec<_>>(), want);
    }

    #[test]
    fn contradictory_state_in_yields_nothing() {
        let db = t2();
        let s = suite(
            "test never\n  influence t = status of sensor id = tc1\n  state_in status_tc1 = Clear and status_tc1 = Occupied\nend\n",
        );
        let got = enumerate_input_states(&s.cases[0], &Env::new(), &db, &InstantiateOptions::default()).unwrap();
        assert!(got.states.is_empty());
    }

    #[test]
    fn cap_errors_or_truncates() {
        let db = t2();
        let s = suite(NEGATIVE);
        let capped = InstantiateOptions { max_states: Some(10), truncate: false };
        assert_eq!(
            instantiate_suite_with(&s, &db, &capped).unwrap_err(),
            InstantiationError::CombinatorialLimit { case: "negative".into(), limit: 10 }
        );
        let truncating = InstantiateOptions { max_states: Some(10), truncate: true };
        let (plan, warnings) = instantiate_suite_with(&s, &db, &truncating).unwrap();
        assert_eq!(plan.tests.len(), 20);
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn nominal_plan_has_one_test_per_route() {
        let db = t2();
        let plan = instantiate_suite(&suite(NOMINAL), &db).unwrap();
        let ids: Vec<&str> = plan.tests.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["nominal#routeA#0#0", "nominal#routeB#0#0"]);
        let t = &plan.tests[0];
        assert!(t.preamble.is_empty());
        assert_eq!(t.stimuli, vec![(EntityId::from("mmi"), "FormRoute routeA".to_string())]);
        assert_eq!(t.actuator_checks[0].expected, ValuePredicate::eq("Straight"));
        assert_eq!(plan.tests[1].actuator_checks[0].expected, ValuePredicate::eq("Reverse"));
        assert_eq!(t.settle_cycles, 2);
        assert_eq!(t.conditions, ["formation"]);
    }

    #[test]
    fn nominal_and_negative_give_72() {
        let db = t2();
        let plan = instantiate_suite(&suite(&format!("{NOMINAL}\n{NEGATIVE}")), &db).unwrap();
        assert_eq!(plan.tests.len(), 72);
        let negatives = plan.tests.iter().filter(|t| t.source_case == "negative");
        assert!(negatives.clone().all(|t| t.expected_verdict
            == ExpectedVerdict::RejectExpected { logic: vec![t.binding[0].1.clone()] }));
        assert_eq!(negatives.count(), 70);
    }

    #[test]
    fn empty_suite_gives_empty_plan() {
        let db = t2();
        let plan = instantiate_suite(&AbstractSuite::default(), &db).unwrap();
        assert!(plan.tests.is_empty());
        assert_eq!(plan.station_name, "T2");
    }

    #[test]
    fn alternatives_multiply_per_sensor() {
        let db = t2();
        let s = suite("test both\n  input kind=TrackCircuit and id != tc3 : Occupied | Broken\nend\n");
        let plan = instantiate_suite(&s, &db).unwrap();
        assert_eq!(plan.tests.len(), 4);
        for t in &plan.tests {
            assert_eq!(t.stimuli.len(), 2);
        }
        assert_eq!(plan.tests[1].stimuli[1].1, "Broken");
    }

    #[test]
    fn sensor_selected_twice_is_rejected() {
        let db = t2();
        let s = suite("test dup\n  input id = tc1 : Occupied\n  input kind=TrackCircuit : Clear\nend\n");
        assert_eq!(
            instantiate_suite(&s, &db).unwrap_err(),
            InstantiationError::DuplicateStimulus { case: "dup".into(), sensor: "tc1".into() }
        );
    }

    #[test]
    fn preamble_cases() {
        let db = t2();
        let plan = instantiate_suite(&suite(NOMINAL), &db).unwrap();
        let status_a = AttributeKey::new("routeA", "Route_Status");
        let setup = SystemStateAssignment { assignments: vec![(AttributeKey::new("tc2", "status"), "Occupied".into())] };

        assert!(build_preamble(&setup, &[], &plan.tests, &db).unwrap().is_empty());
        assert!(build_preamble(&setup, &[(status_a.clone(), "Idle".into())], &[], &db).unwrap().is_empty());

        let p = build_preamble(&setup, &[(status_a.clone(), "Set_OK".into())], &plan.tests, &db).unwrap();
        assert_eq!(p, plan.tests[0].replay_sequence());

        assert_eq!(
            build_preamble(&setup, &[(status_a.clone(), "Set_OK".into())], &[], &db),
            Err(InstantiationError::UnreachableState { key: "Route_Status_routeA".into(), value: "Set_OK".into() })
        );
        let logic_setup = SystemStateAssignment { assignments: vec![(status_a, "Occupied".into())] };
        assert!(matches!(
            build_preamble(&logic_setup, &[], &plan.tests, &db),
            Err(InstantiationError::UnreachableState { .. })
        ));
    }

    #[test]
    fn physical_pins_become_injections() {
        let db = t2();
        let s = suite("test pinned\n  state_in status_tc3 = Broken\n  input id = tc1 : Occupied\nend\n");
        let plan = instantiate_suite(&s, &db).unwrap();
        assert_eq!(rendered(&plan.tests[0].state_setup), [("status_tc3".to_string(), "Broken".to_string())]);
    }

    #[test]
    fn instantiation_is_deterministic() {
        let db = t2();
        let doc = include_str!("../../tests/fixtures/t2_full.atest");
        let a = instantiate_suite(&suite(doc), &db).unwrap();
        let b = instantiate_suite(&suite(doc), &db).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.manifest(&[]), b.manifest(&[]));
    }
}
