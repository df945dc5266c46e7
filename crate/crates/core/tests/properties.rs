mod common;

use std::collections::BTreeSet;

use abstest::config::{
    gen_station, parse_station, select_entities, select_entities_with, ConfigurationDatabase, EntityAtom, EntityClass,
    Env, Field, Selector, ValueExpr,
};
use abstest::instantiate::{instantiate_suite, Stimulus};
use abstest::ixl::IxlSim;
use abstest::predicate::{Op, Predicate};
use abstest::runtime::{run_plan, RunOptions, Verdict};
use abstest::suite::{order_suite, parse_suite, AbstractSuite};
use common::*;
use proptest::prelude::*;

fn station(routes: usize, seed: u64) -> ConfigurationDatabase {
    parse_station(&gen_station(routes, seed).unwrap()).unwrap()
}

fn kind_is(kind: &str) -> Predicate<EntityAtom> {
    Predicate::Atom(EntityAtom::Compare { field: Field::Kind, op: Op::Eq, values: vec![ValueExpr::Literal(kind.into())] })
}

fn ids(v: Vec<abstest::config::EntityId>) -> BTreeSet<String> {
    v.into_iter().map(|e| e.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn narrowing_a_selector_never_adds_entities(routes in 1usize..6, seed in 0u64..1000) {
        let db = station(routes, seed);
        let all = ids(select_entities(&db, &Selector::of_kind(EntityClass::Sensor, "TrackCircuit")).unwrap());
        for r in db.logic() {
            let env: Env = [("r".to_string(), r.id.clone())].into_iter().collect();
            let narrowed = Selector::new(
                EntityClass::Sensor,
                Predicate::And(vec![kind_is("TrackCircuit"), Predicate::Atom(EntityAtom::Assoc("r".into()))]),
            );
            let some = ids(select_entities_with(&db, &narrowed, &env).unwrap());
            prop_assert!(some.is_subset(&all));
            let expected: BTreeSet<String> = routes_of(&db, &r.id.to_string());
            prop_assert_eq!(some, expected);
        }
    }

    #[test]
    fn ordering_is_a_permutation_that_establishes_prerequisites(
        order in Just((0..16usize).collect::<Vec<_>>()).prop_shuffle()
    ) {
        let db = t2();
        let (suite, _) = parse_suite(&fixture("scale.atest"), &db).unwrap();
        let shuffled = AbstractSuite { cases: order.iter().map(|&i| suite.cases[i].clone()).collect(), ..suite.clone() };
        let ordered = order_suite(&shuffled).unwrap();
        let mut a: Vec<&str> = ordered.cases.iter().map(|c| c.name.as_str()).collect();
        let mut b: Vec<&str> = suite.cases.iter().map(|c| c.name.as_str()).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        let mut established = BTreeSet::new();
        for case in &ordered.cases {
            for req in ordered.open_requirements(case) {
                prop_assert!(established.contains(&(req.attr.clone(), req.value.clone())), "{} needs {:?}", case.name, req);
            }
            established.extend(case.establishes());
        }
    }

    #[test]
    fn test_counts_match_the_oracle_on_small_stations(routes in 1usize..=4, seed in 0u64..500) {
        let db = station(routes, seed);
        let plan = plan(&db, &fixture("scale.atest"));
        let counts: std::collections::BTreeMap<String, usize> = plan.case_counts().into_iter().collect();
        let mut oracle = scale_oracle(&db);
        oracle.retain(|_, n| *n > 0);
        prop_assert_eq!(counts, oracle);
    }

    #[test]
    fn physical_tests_are_fully_bound(routes in 1usize..=4, seed in 0u64..500) {
        let db = station(routes, seed);
        let plan = plan(&db, &fixture("t2_full.atest"));
        for t in &plan.tests {
            let mut seen = BTreeSet::new();
            for (sensor, value) in &t.stimuli {
                prop_assert!(seen.insert(sensor.clone()), "{} stimulates {} twice", t.id, sensor);
                prop_assert!(!value.contains('$'));
                prop_assert!(db.entity(sensor).is_some());
            }
            for step in &t.preamble.steps {
                if let abstest::instantiate::InputStep::Apply(Stimulus::Stimulate { value, .. }) = step {
                    prop_assert!(!value.contains('$'));
                }
            }
            for c in &t.actuator_checks {
                prop_assert!(db.entity(&c.entity).is_some());
                prop_assert!(c.expected.values.iter().all(|v| !v.contains('$') && !v.starts_with("required(")));
            }
            for c in &t.state_checks {
                prop_assert!(c.owner.as_ref().is_none_or(|o| db.entity(o).is_some()));
            }
        }
    }

    #[test]
    fn preambles_reach_the_input_state(routes in 1usize..=4, seed in 0u64..500) {
        let db = station(routes, seed);
        let (suite, _) = parse_suite(&fixture("scale.atest"), &db).unwrap();
        let suite = order_suite(&suite).unwrap();
        let plan = instantiate_suite(&suite, &db).unwrap();
        let mut sim = IxlSim::new(&db);
        for t in &plan.tests {
            let snap = input_state(t, &mut sim);
            prop_assert!(satisfies_state_in(&suite, t, &db, &snap), "{}", t.id);
        }
    }

    #[test]
    fn runs_report_each_test_once_in_order(routes in 1usize..=3, seed in 0u64..500, mutate in any::<bool>()) {
        let db = station(routes, seed);
        let plan = plan(&db, &fixture("t2_full.atest"));
        let sim_db = match abstest::mutation::generate_mutations(&db, 1, seed).first() {
            Some(m) if mutate => abstest::mutation::apply_mutation(&db, m).unwrap(),
            _ => db.clone(),
        };
        let report = run_plan(&plan, &db, &mut IxlSim::new(&sim_db), &RunOptions::default());
        let ran: Vec<&str> = report.results.iter().map(|r| r.id.as_str()).collect();
        let planned: Vec<&str> = plan.tests.iter().map(|t| t.id.as_str()).collect();
        prop_assert_eq!(ran, planned);
        for r in &report.results {
            if r.verdict == Verdict::Failed {
                prop_assert!(r.failures.iter().any(|f| f.expected != f.observed));
            }
        }
        if !mutate {
            prop_assert_eq!(report.tallies.passed, plan.tests.len());
        }
    }
}

fn routes_of(db: &ConfigurationDatabase, route: &str) -> BTreeSet<String> {
    routes(db).into_iter().filter(|r| r.id.as_str() == route).flat_map(|r| r.tcs).map(|e| e.to_string()).collect()
}

#[test]
fn printed_suites_reparse_to_the_same_cases() {
    let db = t2();
    for name in ["nominal.atest", "negative.atest", "t2_full.atest", "scale.atest"] {
        let (suite, _) = parse_suite(&fixture(name), &db).unwrap();
        let printed = suite.to_string();
        let (again, _) = parse_suite(&printed, &db).unwrap();
        assert_eq!(again.cases, suite.cases, "{name}");
        assert_eq!(again.to_string(), printed);
    }
}
