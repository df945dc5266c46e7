use std::path::PathBuf;

use abstest::config::{gen_station, parse_station, AttributeKey, ConfigurationDatabase, EntityId};
use abstest::coverage::Transition;
use abstest::ixl::{route_transitions, IxlSim, SimOptions};
use abstest::runtime::{SutContract, SutError};
use proptest::prelude::*;

fn t2() -> ConfigurationDatabase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/t2.station");
    parse_station(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn key(k: &str) -> AttributeKey {
    let (attr, owner) = k.rsplit_once('_').unwrap();
    AttributeKey::new(owner, attr)
}

fn get(sim: &IxlSim, k: &str) -> String {
    sim.snapshot().get(&key(k)).unwrap_or_else(|| panic!("no {k}")).to_string()
}

fn form(sim: &mut IxlSim, route: &str) {
    sim.stimulate(&"mmi".into(), &format!("FormRoute {route}")).unwrap();
}

#[test]
fn reset_state_is_the_configured_initial_state() {
    let db = t2();
    let sim = IxlSim::new(&db);
    assert_eq!(get(&sim, "status_tc1"), "Clear");
    assert_eq!(get(&sim, "position_sp1"), "Straight");
    assert_eq!(get(&sim, "control_sp1"), "Controlled");
    assert_eq!(get(&sim, "aspect_lsA"), "Red");
    assert_eq!(get(&sim, "control_lsB"), "Controlled");
    assert_eq!(get(&sim, "Route_Status_routeA"), "Idle");
    // 3 track circuits, MMI none, sp1 two, lsA two, lsB two, two routes
    assert_eq!(sim.snapshot().values.len(), 3 + 2 + 2 + 2 + 2);
    assert_eq!(sim.snapshot().cycle, 0);
}

#[test]
fn reset_is_idempotent_and_idle_cycles_are_quiet() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeA");
    sim.cycle(3);
    sim.reset();
    let first = sim.snapshot();
    sim.reset();
    assert_eq!(sim.snapshot(), first);
    sim.cycle(5);
    let later = sim.snapshot();
    assert_eq!(later.cycle, 5);
    assert_eq!(later.values, first.values);
}

#[test]
fn injection_is_visible() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    sim.inject(&key("status_tc2"), "Occupied").unwrap();
    sim.cycle(1);
    assert_eq!(get(&sim, "status_tc2"), "Occupied");
}

#[test]
fn nominal_formation_takes_two_cycles() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeA");
    sim.cycle(1);
    assert_eq!(get(&sim, "Route_Status_routeA"), "Idle");
    assert_eq!(get(&sim, "aspect_lsA"), "Red");
    sim.cycle(1);
    assert_eq!(get(&sim, "position_sp1"), "Straight");
    assert_eq!(get(&sim, "aspect_lsA"), "Green");
    assert_eq!(get(&sim, "Route_Status_routeA"), "Set_OK");
}

#[test]
fn switch_point_moves_before_the_signal_clears() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeB");
    sim.cycle(1);
    assert_eq!(get(&sim, "position_sp1"), "Moving");
    assert_eq!(get(&sim, "aspect_lsB"), "Red");
    sim.cycle(1);
    assert_eq!(get(&sim, "position_sp1"), "Reverse");
    assert_eq!(get(&sim, "aspect_lsB"), "Green");
    assert_eq!(get(&sim, "Route_Status_routeB"), "Set_OK");
}

#[test]
fn slower_switch_points_delay_confirmation() {
    let db = t2();
    let mut sim = IxlSim::with_options(&db, SimOptions { move_latency: 3, trace: false });
    form(&mut sim, "routeB");
    sim.cycle(3);
    assert_eq!(get(&sim, "Route_Status_routeB"), "Idle");
    sim.cycle(1);
    assert_eq!(get(&sim, "Route_Status_routeB"), "Set_OK");
}

#[test]
fn occupied_track_circuit_blocks_formation() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    sim.inject(&key("status_tc2"), "Occupied").unwrap();
    let before = sim.snapshot().values;
    form(&mut sim, "routeA");
    sim.cycle(2);
    assert_eq!(sim.snapshot().values, before);
    assert_eq!(sim.command_log().len(), 1);
}

#[test]
fn every_blocking_condition_refuses() {
    let db = t2();
    for (k, v) in [("status_tc1", "Broken"), ("control_sp1", "OutOfControl"), ("control_lsA", "Failed")] {
        let mut sim = IxlSim::new(&db);
        sim.inject(&key(k), v).unwrap();
        form(&mut sim, "routeA");
        sim.cycle(2);
        assert_eq!(get(&sim, "Route_Status_routeA"), "Idle", "{k}={v}");
        assert_eq!(get(&sim, "aspect_lsA"), "Red", "{k}={v}");
    }
}

#[test]
fn passage_then_liberation() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeA");
    sim.cycle(2);
    sim.inject(&key("status_tc1"), "Occupied").unwrap();
    sim.cycle(1);
    assert_eq!(get(&sim, "Route_Status_routeA"), "Occupied");
    assert_eq!(get(&sim, "aspect_lsA"), "Red");

    // still locked while occupied
    form(&mut sim, "routeB");
    sim.cycle(2);
    assert_eq!(get(&sim, "Route_Status_routeB"), "Idle");

    sim.inject(&key("status_tc1"), "Clear").unwrap();
    sim.cycle(1);
    assert_eq!(get(&sim, "Route_Status_routeA"), "Idle");

    // tc1 is clear again, so routeB may now take sp1
    form(&mut sim, "routeB");
    sim.cycle(2);
    assert_eq!(get(&sim, "Route_Status_routeB"), "Set_OK");
    assert_eq!(get(&sim, "position_sp1"), "Reverse");
}

#[test]
fn locked_switch_point_refuses_the_conflicting_route() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeA");
    sim.cycle(2);
    let before = sim.snapshot().values;
    form(&mut sim, "routeB");
    sim.cycle(2);
    assert_eq!(sim.snapshot().values, before);
    assert!(sim.command_log()[0].contains("locked by routeA"));
}

#[test]
fn contract_errors() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    assert_eq!(
        sim.inject(&key("Route_Status_routeA"), "Set_OK"),
        Err(SutError::NotInjectable("Route_Status_routeA".into()))
    );
    assert!(matches!(sim.inject(&key("status_tc9"), "Clear"), Err(SutError::UnknownEntity(_))));
    assert!(matches!(sim.inject(&key("status_tc1"), "Clean"), Err(SutError::DomainViolation { .. })));
    assert!(matches!(sim.stimulate(&"tc9".into(), "Clear"), Err(SutError::UnknownEntity(_))));
    assert!(matches!(sim.stimulate(&"tc1".into(), "Clean"), Err(SutError::DomainViolation { .. })));
    assert!(matches!(sim.stimulate(&"mmi".into(), "FormRoute routeZ"), Err(SutError::DomainViolation { .. })));
    assert!(matches!(sim.stimulate(&"mmi".into(), "Open"), Err(SutError::DomainViolation { .. })));
}

#[test]
fn failed_signal_shows_red() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    form(&mut sim, "routeA");
    sim.cycle(2);
    sim.inject(&key("control_lsA"), "Failed").unwrap();
    assert_eq!(get(&sim, "aspect_lsA"), "Red");
    sim.inject(&key("aspect_lsA"), "Green").unwrap();
    assert_eq!(get(&sim, "aspect_lsA"), "Red");
}

#[test]
fn trace_lists_changed_attributes() {
    let db = t2();
    let mut sim = IxlSim::with_options(&db, SimOptions { trace: true, ..SimOptions::default() });
    form(&mut sim, "routeB");
    sim.cycle(2);
    let trace = sim.take_trace();
    assert_eq!(
        trace,
        [
            "cycle 1 position_sp1 Straight -> Moving",
            "cycle 2 position_sp1 Moving -> Reverse",
            "cycle 2 aspect_lsB Red -> Green",
            "cycle 2 Route_Status_routeB Idle -> Set_OK",
        ]
    );
}

#[test]
fn coverage_records_transitions_and_entries() {
    let db = t2();
    let mut sim = IxlSim::new(&db);
    assert!(sim.take_coverage().is_empty());
    form(&mut sim, "routeA");
    sim.cycle(2);
    let ledger = sim.take_coverage();
    assert!(ledger.transitions.contains(&Transition::new("Idle", "form", "Forming")));
    assert!(ledger.transitions.contains(&Transition::new("Forming", "confirm", "Set_OK")));
    // routeA: two sensor entries, two actuator entries
    assert_eq!(ledger.entries.len(), 4);
    assert!(route_transitions().iter().all(|t| t.from != t.to || t.event == "reject"));
    assert!(sim.take_coverage().is_empty());
}

#[derive(Debug, Clone)]
enum Op {
    Form(usize),
    Track(usize, &'static str),
    SwitchControl(usize, &'static str),
    SignalControl(usize, &'static str),
    Cycle(u32),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (1usize..=4).prop_map(Op::Form),
        (1usize..=10, prop::sample::select(vec!["Clear", "Occupied", "Broken"])).prop_map(|(i, v)| Op::Track(i, v)),
        (1usize..=2, prop::sample::select(vec!["Controlled", "OutOfControl"])).prop_map(|(i, v)| Op::SwitchControl(i, v)),
        (1usize..=4, prop::sample::select(vec!["Controlled", "Failed"])).prop_map(|(i, v)| Op::SignalControl(i, v)),
        (1u32..=3).prop_map(Op::Cycle),
    ]
}

fn drive(sim: &mut IxlSim, ops: &[Op]) -> Vec<Vec<(AttributeKey, String)>> {
    let mut snapshots = Vec::new();
    for op in ops {
        match op {
            Op::Form(r) => form(sim, &format!("route{r}")),
            Op::Track(i, v) => sim.stimulate(&EntityId::new(format!("tc{i}")), v).unwrap(),
            Op::SwitchControl(i, v) => sim.inject(&AttributeKey::new(format!("sp{i}"), "control"), v).unwrap(),
            Op::SignalControl(i, v) => sim.inject(&AttributeKey::new(format!("ls{i}"), "control"), v).unwrap(),
            Op::Cycle(n) => sim.cycle(*n),
        }
        snapshots.push(sim.snapshot().values.into_iter().collect());
    }
    snapshots
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signals_are_honest_and_runs_repeat(seed in 0u64..50, ops in prop::collection::vec(op(), 1..40)) {
        let db = parse_station(&gen_station(4, seed).unwrap()).unwrap();
        let mut sim = IxlSim::new(&db);
        let first = drive(&mut sim, &ops);
        sim.reset();
        prop_assert_eq!(&drive(&mut sim, &ops), &first);

        for snap in &first {
            let value = |k: &AttributeKey| snap.iter().find(|(x, _)| x == k).map(|(_, v)| v.as_str());
            for route in db.logic() {
                for a in db.actuators_of(&route.id) {
                    if value(&AttributeKey::new(a.actuator.clone(), "aspect")) == Some("Green") {
                        prop_assert_eq!(value(&AttributeKey::new(route.id.clone(), "Route_Status")), Some("Set_OK"));
                        for sp in db.actuators_of(&route.id).filter(|x| x.required.is_some()) {
                            prop_assert_eq!(
                                value(&AttributeKey::new(sp.actuator.clone(), "position")),
                                sp.required.as_deref()
                            );
                        }
                    }
                }
            }
        }
    }
}
