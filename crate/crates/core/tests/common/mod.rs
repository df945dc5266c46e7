//! Fixtures, a brute-force test-count oracle and a state predicate evaluator
//! that share no code with the instantiator.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use abstest::config::{parse_station, select_entities_with, AttributeKey, ConfigurationDatabase, EntityId, Env};
use abstest::instantiate::{instantiate_suite, InputStep, PhysicalTest, Stimulus, TestPlan};
use abstest::predicate::{Op, Predicate};
use abstest::runtime::{StateSnapshot, SutContract};
use abstest::suite::{order_suite, parse_suite, AbstractSuite, AbstractTestCase, OwnerRef, Quantifier, StateAtom, StateRef};

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn t2() -> ConfigurationDatabase {
    parse_station(&fixture("t2.station")).unwrap()
}

pub fn ordered_suite(db: &ConfigurationDatabase, doc: &str) -> AbstractSuite {
    let (suite, _) = parse_suite(doc, db).unwrap();
    order_suite(&suite).unwrap()
}

pub fn plan(db: &ConfigurationDatabase, doc: &str) -> TestPlan {
    instantiate_suite(&ordered_suite(db, doc), db).unwrap()
}

pub const TC_STATUS: &[&str] = &["Clear", "Occupied", "Broken"];
pub const SP_CONTROL: &[&str] = &["Controlled", "OutOfControl"];
pub const SP_POSITION: &[&str] = &["Straight", "Reverse"];
pub const LS_CONTROL: &[&str] = &["Controlled", "Failed"];

/// A route as its association lists describe it.
#[derive(Debug, Clone)]
pub struct RouteShape {
    pub id: EntityId,
    pub tcs: Vec<EntityId>,
    pub sps: Vec<EntityId>,
    pub lss: Vec<EntityId>,
}

fn kind(db: &ConfigurationDatabase, id: &EntityId) -> String {
    db.entity(id).map(|d| d.kind.clone()).unwrap_or_default()
}

pub fn routes(db: &ConfigurationDatabase) -> Vec<RouteShape> {
    let mut out = Vec::new();
    for d in db.logic().iter().filter(|d| d.kind == "Route") {
        let mut shape = RouteShape { id: d.id.clone(), tcs: vec![], sps: vec![], lss: vec![] };
        for e in db.sensor_assoc().iter().filter(|e| e.logic == d.id) {
            if kind(db, &e.sensor) == "TrackCircuit" && !shape.tcs.contains(&e.sensor) {
                shape.tcs.push(e.sensor.clone());
            }
        }
        for e in db.actuator_assoc().iter().filter(|e| e.logic == d.id) {
            let list = match kind(db, &e.actuator).as_str() {
                "SwitchPoint" => &mut shape.sps,
                "LightSignal" => &mut shape.lss,
                _ => continue,
            };
            if !list.contains(&e.actuator) {
                list.push(e.actuator.clone());
            }
        }
        out.push(shape);
    }
    out
}

/// Every assignment over the product of `domains`, first position slowest.
pub fn product<'a>(domains: &[&'a [&'a str]]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![vec![]];
    for d in domains {
        out = out.iter().flat_map(|p| d.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    out
}

/// Number of assignments to `groups` satisfying `pred`. Each group is a
/// count of variables over one domain.
pub fn count(groups: &[(usize, &'static [&'static str])], pred: impl Fn(&[&[&str]]) -> bool) -> usize {
    let domains: Vec<&[&str]> = groups.iter().flat_map(|(n, d)| std::iter::repeat_n(*d, *n)).collect();
    product(&domains)
        .iter()
        .filter(|a| {
            let mut parts = Vec::new();
            let mut at = 0;
            for (n, _) in groups {
                parts.push(&a[at..at + n]);
                at += n;
            }
            pred(&parts)
        })
        .count()
}

fn all(vs: &[&str], v: &str) -> bool {
    vs.iter().all(|x| *x == v)
}

fn any(vs: &[&str], v: &str) -> bool {
    vs.contains(&v)
}

/// Predicted test count of every case in `scale.atest`.
pub fn scale_oracle(db: &ConfigurationDatabase) -> BTreeMap<String, usize> {
    let shapes = routes(db);
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let mut add = |case: &str, n: usize| *out.entry(case.to_string()).or_default() += n;
    for r in &shapes {
        let (t, s, l) = (r.tcs.len(), r.sps.len(), r.lss.len());
        let full = [(t, TC_STATUS), (s, SP_CONTROL), (l, LS_CONTROL)];
        let ok = |p: &[&[&str]]| all(p[0], "Clear") && all(p[1], "Controlled") && all(p[2], "Controlled");
        add("nominal", count(&full, ok));
        add("negative", count(&full, |p| !ok(p)));
        add("formation_clear_track", count(&[(t, TC_STATUS)], |p| all(p[0], "Clear")));
        add("formation_any_position", count(&[(s, SP_POSITION)], |_| true));
        add("occupied_track", count(&[(t, TC_STATUS)], |p| any(p[0], "Occupied")));
        add("broken_track", count(&[(t, TC_STATUS)], |p| any(p[0], "Broken")));
        add("unclear_track", count(&[(t, TC_STATUS)], |p| p[0].iter().any(|v| *v != "Clear")));
        add("switch_out_of_control", count(&[(s, SP_CONTROL)], |p| any(p[0], "OutOfControl")));
        add("signal_failed", count(&[(l, LS_CONTROL)], |p| all(p[0], "Failed")));
        add("passage", t);
        add("passage_broken", t);
        for case in ["reform_set", "still_occupied", "reform_occupied", "liberation"] {
            add(case, 1);
        }
        let sharing = shapes.iter().filter(|o| o.id != r.id && o.sps.iter().any(|sp| r.sps.contains(sp))).count();
        add("conflict", sharing);
    }
    out
}

pub fn apply(sut: &mut dyn SutContract, step: &InputStep) {
    match step {
        InputStep::Apply(Stimulus::Inject { key, value }) => sut.inject(key, value).unwrap(),
        InputStep::Apply(Stimulus::Stimulate { sensor, value }) => sut.stimulate(sensor, value).unwrap(),
        InputStep::Cycle(n) => sut.cycle(*n),
    }
}

/// State reached by replaying a test's preamble and setup from reset.
pub fn input_state(test: &PhysicalTest, sut: &mut dyn SutContract) -> StateSnapshot {
    sut.reset();
    for step in &test.preamble.steps {
        apply(sut, step);
    }
    for (key, value) in &test.state_setup.assignments {
        sut.inject(key, value).unwrap();
    }
    sut.snapshot()
}

fn compare(op: Op, observed: &str, values: &[String]) -> bool {
    match op {
        Op::Eq => observed == values[0],
        Op::Ne => observed != values[0],
        Op::In => values.iter().any(|v| v == observed),
    }
}

fn atom_holds(case: &AbstractTestCase, env: &Env, db: &ConfigurationDatabase, snap: &StateSnapshot, atom: &StateAtom) -> bool {
    let observed: Vec<String> = match &atom.target {
        StateRef::Group(g) => {
            let decl = case.influence.iter().find(|d| &d.name == g).expect("declared group");
            select_entities_with(db, &decl.target, env)
                .unwrap()
                .into_iter()
                .filter_map(|id| snap.values.get(&AttributeKey::new(id, decl.attr.clone())).cloned())
                .collect()
        }
        StateRef::Key { attr, owner } => {
            let owner = match owner {
                OwnerRef::Var(v) => env[v].clone(),
                OwnerRef::Entity(e) => e.clone(),
            };
            match snap.values.get(&AttributeKey::new(owner, attr.clone())) {
                Some(v) => vec![v.clone()],
                None => return false,
            }
        }
        StateRef::Name(_) => return false,
    };
    match atom.quant {
        Some(Quantifier::Any) => observed.iter().any(|v| compare(atom.op, v, &atom.values)),
        _ => observed.iter().all(|v| compare(atom.op, v, &atom.values)),
    }
}

fn holds(
    case: &AbstractTestCase,
    env: &Env,
    db: &ConfigurationDatabase,
    snap: &StateSnapshot,
    p: &Predicate<StateAtom>,
) -> bool {
    match p {
        Predicate::True => true,
        Predicate::Atom(a) => atom_holds(case, env, db, snap, a),
        Predicate::Not(q) => !holds(case, env, db, snap, q),
        Predicate::And(qs) => qs.iter().all(|q| holds(case, env, db, snap, q)),
        Predicate::Or(qs) => qs.iter().any(|q| holds(case, env, db, snap, q)),
    }
}

/// Whether the snapshot satisfies the source case's input-state predicate
/// and carries every value the test's setup assigns.
pub fn satisfies_state_in(suite: &AbstractSuite, test: &PhysicalTest, db: &ConfigurationDatabase, snap: &StateSnapshot) -> bool {
    let case = suite.cases.iter().find(|c| c.name == test.source_case).expect("source case");
    let env: Env = test.binding.iter().cloned().collect();
    let setup_ok = test.state_setup.assignments.iter().all(|(k, v)| snap.values.get(k) == Some(v));
    setup_ok && holds(case, &env, db, snap, &case.state_in)
}

/// State assignments of a plan's tests from one case, as comparable sets.
pub fn setups(plan: &TestPlan, case: &str) -> BTreeSet<Vec<(String, String)>> {
    plan.tests
        .iter()
        .filter(|t| t.source_case == case)
        .map(|t| {
            let mut a: Vec<(String, String)> =
                t.state_setup.assignments.iter().map(|(k, v)| (k.rendered(), v.clone())).collect();
            a.sort();
            a
        })
        .collect()
}
