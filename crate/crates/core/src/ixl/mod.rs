//! Reference interlocking: a cycle-stepped simulator of track circuits,
//! switch points, light signals and route logic, driven through the
//! [`SutContract`].
//!
//! Route logic is a small state machine. `Route_Status` shows `Idle`,
//! `Set_OK` or `Occupied`; between command acceptance and switch-point
//! confirmation the route is internally forming but still shows `Idle`.
//! Conflicts are detected through switch-point locks only: a route may not
//! form while another non-idle route holds one of its switch points.

use std::collections::{BTreeSet, HashMap};

use crate::config::registry::{LIGHT_SIGNAL, MMI, ROUTE, ROUTE_STATUS, SWITCH_POINT, TRACK_CIRCUIT};
use crate::config::{AssocList, AttributeKey, ConfigurationDatabase, EntityClass, EntityId};
use crate::coverage::{CoverageLedger, Transition};
use crate::runtime::{StateSnapshot, SutContract, SutError};

pub const FORM_ROUTE: &str = "FormRoute";

const CLEAR: &str = "Clear";
const STRAIGHT: &str = "Straight";
const MOVING: &str = "Moving";
const CONTROLLED: &str = "Controlled";
const RED: &str = "Red";
const GREEN: &str = "Green";
const FAILED: &str = "Failed";
const IDLE: &str = "Idle";
const SET_OK: &str = "Set_OK";
const OCCUPIED: &str = "Occupied";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Idle,
    Forming,
    SetOk,
    Occupied,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Idle => "Idle",
            Phase::Forming => "Forming",
            Phase::SetOk => "Set_OK",
            Phase::Occupied => "Occupied",
        }
    }

    fn shown(self) -> &'static str {
        match self {
            Phase::Idle | Phase::Forming => IDLE,
            Phase::SetOk => SET_OK,
            Phase::Occupied => OCCUPIED,
        }
    }
}

/// Every route transition the simulator can take.
pub fn route_transitions() -> Vec<Transition> {
    [
        ("Idle", "form", "Forming"),
        ("Idle", "reject", "Idle"),
        ("Forming", "confirm", "Set_OK"),
        ("Forming", "abort", "Idle"),
        ("Set_OK", "occupy", "Occupied"),
        ("Occupied", "liberate", "Idle"),
    ]
    .iter()
    .map(|(f, e, t)| Transition::new(f, e, t))
    .collect()
}

struct SwitchSlots {
    actuator: usize,
    position: usize,
    control: usize,
    /// Required position, with the actuator association entry it came from.
    required: String,
    entry: usize,
}

struct SignalSlots {
    aspect: usize,
    control: usize,
    proceed: String,
    entry: usize,
}

struct RouteSpec {
    id: EntityId,
    status: usize,
    /// `(status slot, sensor association entry)`
    tcs: Vec<(usize, usize)>,
    sps: Vec<SwitchSlots>,
    lss: Vec<SignalSlots>,
}

#[derive(Debug, Clone)]
struct Motion {
    target: String,
    remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOptions {
    /// Cycles a commanded switch point spends `Moving`.
    pub move_latency: u32,
    /// Keep a log of attribute changes per cycle.
    pub trace: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { move_latency: 1, trace: false }
    }
}

pub struct IxlSim {
    options: SimOptions,
    keys: Vec<AttributeKey>,
    domains: Vec<Vec<String>>,
    initial: Vec<String>,
    slot_of: HashMap<AttributeKey, usize>,
    class_of_slot: Vec<EntityClass>,
    tc_status: HashMap<EntityId, usize>,
    mmis: BTreeSet<EntityId>,
    route_index: HashMap<EntityId, usize>,
    routes: Vec<RouteSpec>,
    /// Light signals: `(aspect, control)` slots.
    signals: Vec<(usize, usize)>,
    /// Switch points by actuator slot index: `(position, control)`.
    switch_slots: HashMap<usize, (usize, usize)>,

    values: Vec<String>,
    cycle: u64,
    phases: Vec<Phase>,
    /// Holder of each switch-point lock, by actuator slot.
    locks: HashMap<usize, usize>,
    motions: HashMap<usize, Motion>,
    pending: Vec<(EntityId, String)>,
    log: Vec<String>,
    trace: Vec<String>,

    touched_slots: Vec<bool>,
    touched_sensor_entries: Vec<bool>,
    touched_actuator_entries: Vec<bool>,
    transitions: BTreeSet<Transition>,
}

impl IxlSim {
    pub fn new(db: &ConfigurationDatabase) -> Self {
        Self::with_options(db, SimOptions::default())
    }

    pub fn with_options(db: &ConfigurationDatabase, options: SimOptions) -> Self {
        let mut keys = Vec::new();
        let mut domains = Vec::new();
        let mut initial = Vec::new();
        let mut class_of_slot = Vec::new();
        let mut slot_of = HashMap::new();
        for d in db.entities() {
            for a in &d.attributes {
                let key = d.key(&a.attr);
                slot_of.insert(key.clone(), keys.len());
                keys.push(key);
                domains.push(a.domain.clone());
                initial.push(a.initial.clone());
                class_of_slot.push(d.class);
            }
        }
        let slot = |id: &EntityId, attr: &str| slot_of.get(&AttributeKey::new(id.clone(), attr)).copied();

        let mut tc_status = HashMap::new();
        let mut mmis = BTreeSet::new();
        for s in db.sensors() {
            match s.kind.as_str() {
                TRACK_CIRCUIT => {
                    if let Some(i) = slot(&s.id, "status") {
                        tc_status.insert(s.id.clone(), i);
                    }
                }
                MMI => {
                    mmis.insert(s.id.clone());
                }
                _ => {}
            }
        }
        let mut actuator_index = HashMap::new();
        let mut signals = Vec::new();
        let mut switch_slots = HashMap::new();
        for a in db.actuators() {
            match a.kind.as_str() {
                SWITCH_POINT => {
                    if let (Some(p), Some(c)) = (slot(&a.id, "position"), slot(&a.id, "control")) {
                        actuator_index.insert(a.id.clone(), p);
                        switch_slots.insert(p, (p, c));
                    }
                }
                LIGHT_SIGNAL => {
                    if let (Some(p), Some(c)) = (slot(&a.id, "aspect"), slot(&a.id, "control")) {
                        actuator_index.insert(a.id.clone(), p);
                        signals.push((p, c));
                    }
                }
                _ => {}
            }
        }

        let mut routes = Vec::new();
        let mut route_index = HashMap::new();
        for lp in db.logic().iter().filter(|d| d.kind == ROUTE) {
            let Some(status) = slot(&lp.id, ROUTE_STATUS) else { continue };
            let tcs = db
                .sensor_entries_of(&lp.id)
                .iter()
                .filter_map(|&e| tc_status.get(&db.sensor_assoc()[e].sensor).map(|&s| (s, e)))
                .collect();
            let mut sps = Vec::new();
            let mut lss = Vec::new();
            for &e in db.actuator_entries_of(&lp.id) {
                let entry = &db.actuator_assoc()[e];
                let Some(decl) = db.entity(&entry.actuator) else { continue };
                match decl.kind.as_str() {
                    SWITCH_POINT => {
                        let (p, c) = switch_slots[&actuator_index[&entry.actuator]];
                        sps.push(SwitchSlots {
                            actuator: p,
                            position: p,
                            control: c,
                            required: entry.required.clone().unwrap_or_else(|| STRAIGHT.to_string()),
                            entry: e,
                        });
                    }
                    LIGHT_SIGNAL => {
                        let aspect = actuator_index[&entry.actuator];
                        let control = slot(&entry.actuator, "control").expect("signal has control");
                        lss.push(SignalSlots {
                            aspect,
                            control,
                            proceed: entry.required.clone().unwrap_or_else(|| GREEN.to_string()),
                            entry: e,
                        });
                    }
                    _ => {}
                }
            }
            route_index.insert(lp.id.clone(), routes.len());
            routes.push(RouteSpec { id: lp.id.clone(), status, tcs, sps, lss });
        }

        let n_slots = keys.len();
        let n_routes = routes.len();
        let mut sim = IxlSim {
            options,
            keys,
            domains,
            values: initial.clone(),
            initial,
            slot_of,
            class_of_slot,
            tc_status,
            mmis,
            route_index,
            routes,
            signals,
            switch_slots,
            cycle: 0,
            phases: vec![Phase::Idle; n_routes],
            locks: HashMap::new(),
            motions: HashMap::new(),
            pending: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            touched_slots: vec![false; n_slots],
            touched_sensor_entries: vec![false; db.sensor_assoc().len()],
            touched_actuator_entries: vec![false; db.actuator_assoc().len()],
            transitions: BTreeSet::new(),
        };
        sim.reset();
        sim
    }

    /// Commands refused since the last reset, one line each.
    pub fn command_log(&self) -> &[String] {
        &self.log
    }

    /// Attribute changes recorded since the last call, when tracing.
    pub fn take_trace(&mut self) -> Vec<String> {
        std::mem::take(&mut self.trace)
    }

    fn read(&mut self, slot: usize) -> &str {
        self.touched_slots[slot] = true;
        &self.values[slot]
    }

    fn write(&mut self, slot: usize, value: &str) {
        self.touched_slots[slot] = true;
        if self.values[slot] != value {
            self.values[slot] = value.to_string();
        }
    }

    fn transition(&mut self, route: usize, event: &str, to: Phase) {
        let from = self.phases[route];
        self.transitions.insert(Transition::new(from.name(), event, to.name()));
        self.phases[route] = to;
        let status = self.routes[route].status;
        self.write(status, to.shown());
    }

    fn read_route_lists(&mut self, r: usize) {
        for &(_, e) in &self.routes[r].tcs {
            self.touched_sensor_entries[e] = true;
        }
        for e in self.routes[r].sps.iter().map(|s| s.entry).chain(self.routes[r].lss.iter().map(|l| l.entry)) {
            self.touched_actuator_entries[e] = true;
        }
    }

    fn tcs_clear(&mut self, r: usize) -> bool {
        let slots: Vec<usize> = self.routes[r].tcs.iter().map(|&(s, _)| s).collect();
        slots.into_iter().all(|s| self.read(s) == CLEAR)
    }

    fn sps_controlled(&mut self, r: usize) -> bool {
        let slots: Vec<usize> = self.routes[r].sps.iter().map(|s| s.control).collect();
        slots.into_iter().all(|s| self.read(s) == CONTROLLED)
    }

    fn signals_controlled(&mut self, r: usize) -> bool {
        let slots: Vec<usize> = self.routes[r].lss.iter().map(|l| l.control).collect();
        slots.into_iter().all(|s| self.read(s) == CONTROLLED)
    }

    fn sps_in_place(&mut self, r: usize) -> bool {
        let wanted: Vec<(usize, String)> = self.routes[r].sps.iter().map(|s| (s.position, s.required.clone())).collect();
        wanted.into_iter().all(|(s, req)| self.read(s) == req)
    }

    fn set_signals(&mut self, r: usize, proceed: bool) {
        let targets: Vec<(usize, String)> = self.routes[r]
            .lss
            .iter()
            .map(|l| (l.aspect, if proceed { l.proceed.clone() } else { RED.to_string() }))
            .collect();
        for (slot, v) in targets {
            self.write(slot, &v);
        }
    }

    fn unlock(&mut self, r: usize) {
        self.locks.retain(|_, holder| *holder != r);
    }

    fn form(&mut self, r: usize) {
        self.read_route_lists(r);
        let id = self.routes[r].id.clone();
        if self.phases[r] != Phase::Idle {
            self.log.push(format!("cycle {}: FormRoute {id} refused: route is {}", self.cycle, self.phases[r].name()));
            return;
        }
        let conflict = self.routes[r].sps.iter().find_map(|s| match self.locks.get(&s.actuator) {
            Some(&holder) if holder != r => Some(holder),
            _ => None,
        });
        let reason = if !self.tcs_clear(r) {
            Some("track circuit not clear".to_string())
        } else if !self.sps_controlled(r) {
            Some("switch point out of control".to_string())
        } else if !self.signals_controlled(r) {
            Some("signal failed".to_string())
        } else {
            conflict.map(|h| format!("switch point locked by {}", self.routes[h].id))
        };
        if let Some(reason) = reason {
            self.log.push(format!("cycle {}: FormRoute {id} refused: {reason}", self.cycle));
            self.transitions.insert(Transition::new("Idle", "reject", "Idle"));
            return;
        }
        let moves: Vec<(usize, usize, String)> =
            self.routes[r].sps.iter().map(|s| (s.actuator, s.position, s.required.clone())).collect();
        for (actuator, position, required) in moves {
            self.locks.insert(actuator, r);
            if self.values[position] != required {
                self.write(position, MOVING);
                self.motions.insert(position, Motion { target: required, remaining: self.options.move_latency });
            } else {
                self.motions.remove(&position);
            }
        }
        self.transition(r, "form", Phase::Forming);
    }

    fn abort(&mut self, r: usize) {
        self.unlock(r);
        self.set_signals(r, false);
        self.transition(r, "abort", Phase::Idle);
    }

    fn step_route(&mut self, r: usize) {
        match self.phases[r] {
            Phase::Idle => {}
            Phase::Forming => {
                self.read_route_lists(r);
                if !self.tcs_clear(r) || !self.sps_controlled(r) || !self.signals_controlled(r) {
                    self.abort(r);
                } else if self.sps_in_place(r) {
                    self.set_signals(r, true);
                    self.transition(r, "confirm", Phase::SetOk);
                }
            }
            Phase::SetOk => {
                self.read_route_lists(r);
                if !self.tcs_clear(r) {
                    self.set_signals(r, false);
                    self.transition(r, "occupy", Phase::Occupied);
                } else if !self.sps_in_place(r) || !self.sps_controlled(r) {
                    self.set_signals(r, false);
                }
            }
            Phase::Occupied => {
                self.read_route_lists(r);
                if self.tcs_clear(r) {
                    self.unlock(r);
                    self.transition(r, "liberate", Phase::Idle);
                }
            }
        }
    }

    fn enforce_failed_signals(&mut self) {
        for i in 0..self.signals.len() {
            let (aspect, control) = self.signals[i];
            if self.values[control] == FAILED && self.values[aspect] != RED {
                self.values[aspect] = RED.to_string();
            }
        }
    }

    fn step(&mut self) {
        self.cycle += 1;
        let before = self.options.trace.then(|| self.values.clone());

        let mut commands = Vec::new();
        for (sensor, value) in std::mem::take(&mut self.pending) {
            if let Some(&slot) = self.tc_status.get(&sensor) {
                self.write(slot, &value);
            } else if let Some(route) = value.strip_prefix(FORM_ROUTE).map(str::trim) {
                commands.push(self.route_index[&EntityId::from(route)]);
            }
        }

        let mut done = Vec::new();
        for (&slot, motion) in &mut self.motions {
            let (_, control) = self.switch_slots[&slot];
            if self.values[control] != CONTROLLED {
                continue;
            }
            motion.remaining = motion.remaining.saturating_sub(1);
            if motion.remaining == 0 {
                done.push((slot, motion.target.clone()));
            }
        }
        for (slot, target) in done {
            self.motions.remove(&slot);
            self.write(slot, &target);
        }

        for r in 0..self.routes.len() {
            self.step_route(r);
        }
        for r in commands {
            self.form(r);
        }
        self.enforce_failed_signals();
        self.debug_check();

        if let Some(before) = before {
            for (i, (old, new)) in before.iter().zip(&self.values).enumerate() {
                if old != new {
                    self.trace.push(format!("cycle {} {} {} -> {}", self.cycle, self.keys[i], old, new));
                }
            }
        }
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) {
            let mut holders: HashMap<usize, usize> = HashMap::new();
            for (r, spec) in self.routes.iter().enumerate() {
                if self.phases[r] == Phase::Idle {
                    continue;
                }
                for s in &spec.sps {
                    if let Some(other) = holders.insert(s.actuator, r) {
                        panic!("switch point locked by both {} and {}", self.routes[other].id, spec.id);
                    }
                }
            }
        }
    }
}

impl SutContract for IxlSim {
    fn reset(&mut self) {
        self.values.clone_from(&self.initial);
        self.cycle = 0;
        self.phases.iter_mut().for_each(|p| *p = Phase::Idle);
        self.locks.clear();
        self.motions.clear();
        self.pending.clear();
        self.log.clear();
        self.trace.clear();
    }

    fn inject(&mut self, key: &AttributeKey, value: &str) -> Result<(), SutError> {
        let slot = *self.slot_of.get(key).ok_or_else(|| SutError::UnknownEntity(key.rendered()))?;
        if self.class_of_slot[slot] == EntityClass::Logic {
            return Err(SutError::NotInjectable(key.rendered()));
        }
        if !self.domains[slot].iter().any(|v| v == value) {
            return Err(SutError::DomainViolation { target: key.rendered(), value: value.to_string() });
        }
        let before = self.options.trace.then(|| self.values[slot].clone());
        self.write(slot, value);
        self.motions.remove(&slot);
        self.enforce_failed_signals();
        if let Some(old) = before.filter(|old| old != value) {
            self.trace.push(format!("cycle {} {} {} -> {} (injected)", self.cycle, key, old, value));
        }
        Ok(())
    }

    fn stimulate(&mut self, sensor: &EntityId, value: &str) -> Result<(), SutError> {
        let accepted = if let Some(&slot) = self.tc_status.get(sensor) {
            self.domains[slot].iter().any(|v| v == value)
        } else if self.mmis.contains(sensor) {
            let mut words = value.split_whitespace();
            matches!(
                (words.next(), words.next(), words.next()),
                (Some(FORM_ROUTE), Some(route), None) if self.route_index.contains_key(&EntityId::from(route))
            )
        } else {
            return Err(SutError::UnknownEntity(sensor.to_string()));
        };
        if !accepted {
            return Err(SutError::DomainViolation { target: sensor.to_string(), value: value.to_string() });
        }
        self.pending.push((sensor.clone(), value.to_string()));
        Ok(())
    }

    fn cycle(&mut self, n: u32) {
        for _ in 0..n {
            self.step();
        }
    }

    fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            cycle: self.cycle,
            values: self.keys.iter().cloned().zip(self.values.iter().cloned()).collect(),
        }
    }

    fn take_coverage(&mut self) -> CoverageLedger {
        let mut ledger = CoverageLedger::default();
        for (i, t) in self.touched_sensor_entries.iter_mut().enumerate() {
            if std::mem::take(t) {
                ledger.entries.insert((AssocList::SensorAssoc, i));
            }
        }
        for (i, t) in self.touched_actuator_entries.iter_mut().enumerate() {
            if std::mem::take(t) {
                ledger.entries.insert((AssocList::ActuatorAssoc, i));
            }
        }
        for (i, t) in self.touched_slots.iter_mut().enumerate() {
            if std::mem::take(t) {
                ledger.attributes.insert(self.keys[i].clone());
            }
        }
        ledger.transitions = std::mem::take(&mut self.transitions);
        ledger
    }
}
