//! Seeded single-entry faults in a configuration's association lists, for
//! checking that a suite notices when the system under test runs with
//! configuration data that differs from the one the plan was built for.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::registry::{LIGHT_SIGNAL, ROUTE, SWITCH_POINT, TRACK_CIRCUIT};
use crate::config::{ConfigError, ConfigurationDatabase, EntityId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mutation {
    /// Sensor association entry `index` names `replacement` instead.
    SwapSensor { index: usize, replacement: EntityId },
    /// Actuator association entry `index` demands `replacement`.
    FlipRequired { index: usize, replacement: String },
    /// Actuator association entries `a` and `b`, light signals of two
    /// different routes, trade their signals.
    SwapSignal { a: usize, b: usize },
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::SwapSensor { index, replacement } => {
                write!(f, "sensor_assoc[{index}] -> {replacement}")
            }
            Mutation::FlipRequired { index, replacement } => {
                write!(f, "actuator_assoc[{index}] requires {replacement}")
            }
            Mutation::SwapSignal { a, b } => write!(f, "actuator_assoc[{a}] <-> actuator_assoc[{b}] signals"),
        }
    }
}

fn kind_of<'a>(db: &'a ConfigurationDatabase, id: &EntityId) -> &'a str {
    db.entity(id).map_or("", |d| d.kind.as_str())
}

fn candidates(db: &ConfigurationDatabase) -> Vec<Mutation> {
    let mut out = Vec::new();
    let tcs: Vec<&EntityId> = db.sensors().iter().filter(|d| d.kind == TRACK_CIRCUIT).map(|d| &d.id).collect();
    for (index, entry) in db.sensor_assoc().iter().enumerate() {
        if kind_of(db, &entry.sensor) != TRACK_CIRCUIT {
            continue;
        }
        let taken: BTreeSet<&EntityId> = db.sensors_of(&entry.logic).collect();
        for tc in &tcs {
            if !taken.contains(tc) {
                out.push(Mutation::SwapSensor { index, replacement: (*tc).clone() });
            }
        }
    }
    for (index, entry) in db.actuator_assoc().iter().enumerate() {
        if kind_of(db, &entry.actuator) != SWITCH_POINT {
            continue;
        }
        let flipped = match entry.required.as_deref() {
            Some("Straight") => "Reverse",
            Some("Reverse") => "Straight",
            _ => continue,
        };
        out.push(Mutation::FlipRequired { index, replacement: flipped.to_string() });
    }
    let signals: Vec<usize> = (0..db.actuator_assoc().len())
        .filter(|&i| kind_of(db, &db.actuator_assoc()[i].actuator) == LIGHT_SIGNAL)
        .collect();
    for (n, &a) in signals.iter().enumerate() {
        for &b in &signals[n + 1..] {
            let (ea, eb) = (&db.actuator_assoc()[a], &db.actuator_assoc()[b]);
            if ea.logic != eb.logic && ea.actuator != eb.actuator && !db.associated(&ea.logic, &eb.actuator) && !db.associated(&eb.logic, &ea.actuator) {
                out.push(Mutation::SwapSignal { a, b });
            }
        }
    }
    out
}

/// Up to `count` distinct mutations, drawn with a seeded generator so
/// every kind of fault is represented when possible.
pub fn generate_mutations(db: &ConfigurationDatabase, count: usize, seed: u64) -> Vec<Mutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: [Vec<Mutation>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for m in candidates(db) {
        let i = match m {
            Mutation::SwapSensor { .. } => 0,
            Mutation::FlipRequired { .. } => 1,
            Mutation::SwapSignal { .. } => 2,
        };
        pools[i].push(m);
    }
    for p in &mut pools {
        p.shuffle(&mut rng);
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count && pools.iter().any(|p| !p.is_empty()) {
        let non_empty: Vec<usize> = (0..3).filter(|&i| !pools[i].is_empty()).collect();
        let pick = non_empty[rng.gen_range(0..non_empty.len())];
        out.push(pools[pick].pop().expect("pool is non-empty"));
    }
    out
}

/// A copy of `db` with one mutation applied.
pub fn apply_mutation(db: &ConfigurationDatabase, m: &Mutation) -> Result<ConfigurationDatabase, ConfigError> {
    let mut sensors = db.sensor_assoc().to_vec();
    let mut actuators = db.actuator_assoc().to_vec();
    let oob = |i: usize| ConfigError::DanglingReference(format!("association entry {i}"));
    match m {
        Mutation::SwapSensor { index, replacement } => {
            sensors.get_mut(*index).ok_or_else(|| oob(*index))?.sensor = replacement.clone();
        }
        Mutation::FlipRequired { index, replacement } => {
            actuators.get_mut(*index).ok_or_else(|| oob(*index))?.required = Some(replacement.clone());
        }
        Mutation::SwapSignal { a, b } => {
            if *a >= actuators.len() || *b >= actuators.len() {
                return Err(oob((*a).max(*b)));
            }
            let tmp = actuators[*a].actuator.clone();
            actuators[*a].actuator = actuators[*b].actuator.clone();
            actuators[*b].actuator = tmp;
        }
    }
    db.with_associations(sensors, actuators)
}

type RouteView = (BTreeSet<EntityId>, BTreeMap<EntityId, Option<String>>, BTreeSet<EntityId>);

fn route_view(db: &ConfigurationDatabase, route: &EntityId) -> RouteView {
    let tcs = db.sensors_of(route).filter(|s| kind_of(db, s) == TRACK_CIRCUIT).cloned().collect();
    let sps = db
        .actuators_of(route)
        .filter(|a| kind_of(db, &a.actuator) == SWITCH_POINT)
        .map(|a| (a.actuator.clone(), a.required.clone()))
        .collect();
    let lss = db
        .actuators_of(route)
        .filter(|a| kind_of(db, &a.actuator) == LIGHT_SIGNAL)
        .map(|a| a.actuator.clone())
        .collect();
    (tcs, sps, lss)
}

/// Whether some route sees different track circuits, switch-point demands
/// or signals in the two configurations.
pub fn affects_behavior(original: &ConfigurationDatabase, mutated: &ConfigurationDatabase) -> bool {
    original
        .logic()
        .iter()
        .filter(|d| d.kind == ROUTE)
        .any(|d| route_view(original, &d.id) != route_view(mutated, &d.id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantOutcome {
    pub mutation: Mutation,
    pub affects_behavior: bool,
    pub failed_tests: usize,
}

impl MutantOutcome {
    pub fn killed(&self) -> bool {
        self.failed_tests > 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationReport {
    pub outcomes: Vec<MutantOutcome>,
}

impl MutationReport {
    pub fn killed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.killed()).count()
    }

    /// Killed share of the behavior-affecting mutations; 1.0 when there are
    /// none.
    pub fn kill_rate(&self) -> f64 {
        let relevant: Vec<&MutantOutcome> = self.outcomes.iter().filter(|o| o.affects_behavior).collect();
        if relevant.is_empty() {
            return 1.0;
        }
        relevant.iter().filter(|o| o.killed()).count() as f64 / relevant.len() as f64
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let status = match (o.killed(), o.affects_behavior) {
                (true, _) => "killed",
                (false, true) => "SURVIVED",
                (false, false) => "equivalent",
            };
            out.push_str(&format!("{status:10} {:4} failed  {}\n", o.failed_tests, o.mutation));
        }
        out.push_str(&format!(
            "{} mutants, {} killed, kill rate {:.1}% of behavior-affecting\n",
            self.outcomes.len(),
            self.killed(),
            self.kill_rate() * 100.0
        ));
        out
    }
}
