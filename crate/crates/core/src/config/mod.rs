//! Configuration model: entity declarations, attribute schemas and the
//! sensor/actuator association lists of one concrete installation.
//!
//! A [`ConfigurationDatabase`] is validated on construction and immutable
//! afterwards, so it can be shared read-only between instantiation workers.
//!
//! Association lists only relate logic processes to sensors and to
//! actuators. Logic-to-logic associations (a route depending on a block, for
//! instance) are not representable.

mod generate;
mod parse;
pub mod registry;
pub(crate) mod select;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::gen_station;
pub use parse::parse_station;
pub use select::{
    select_entities, select_entities_with, validate_selector, EntityAtom, Env, Field, Selector,
    ValueExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("missing section: {0}")]
    MissingSection(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("dangling reference to undeclared entity `{0}`")]
    DanglingReference(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("value `{value}` is outside the domain of `{key}`")]
    DomainViolation { key: String, value: String },
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("`{id}` is not a {expected} entity")]
    ClassMismatch { id: String, expected: EntityClass },
    #[error("duplicate association between `{logic}` and `{entity}`")]
    DuplicateAssociation { logic: String, entity: String },
    #[error("attribute key `{0}` is rendered by more than one attribute")]
    DuplicateAttributeKey(String),
    #[error("attribute `{attr}` of `{owner}`: {message}")]
    InvalidSchema { owner: String, attr: String, message: String },
    #[error("route count must be at least 1, got {0}")]
    InvalidRouteCount(usize),
}

/// Identifier of a declared entity. Case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(name: impl Into<String>) -> Self {
        EntityId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_string())
    }
}

impl PartialEq<str> for EntityId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for EntityId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

pub fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Key of one process attribute in the state-of-entities database. Renders
/// as `<attr>_<owner>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeKey {
    pub owner: EntityId,
    pub attr: String,
}

impl AttributeKey {
    pub fn new(owner: impl Into<EntityId>, attr: impl Into<String>) -> Self {
        AttributeKey { owner: owner.into(), attr: attr.into() }
    }

    pub fn rendered(&self) -> String {
        format!("{}_{}", self.attr, self.owner)
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(s)
    }
}

impl fmt::Display for AttributeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.attr, self.owner)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub attr: String,
    pub domain: Vec<String>,
    pub initial: String,
}

impl AttributeSchema {
    pub fn contains(&self, value: &str) -> bool {
        self.domain.iter().any(|v| v == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityClass {
    Sensor,
    Actuator,
    Logic,
}

impl EntityClass {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityClass::Sensor => "sensor",
            EntityClass::Actuator => "actuator",
            EntityClass::Logic => "logic",
        }
    }

    pub fn parse(s: &str) -> Option<EntityClass> {
        match s {
            "sensor" => Some(EntityClass::Sensor),
            "actuator" => Some(EntityClass::Actuator),
            "logic" => Some(EntityClass::Logic),
            _ => None,
        }
    }

    pub fn is_physical(self) -> bool {
        self != EntityClass::Logic
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A sensor, actuator or logic process declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityDecl {
    pub id: EntityId,
    pub kind: String,
    pub class: EntityClass,
    pub attributes: Vec<AttributeSchema>,
}

impl EntityDecl {
    pub fn attribute(&self, attr: &str) -> Option<&AttributeSchema> {
        self.attributes.iter().find(|a| a.attr == attr)
    }

    pub fn key(&self, attr: &str) -> AttributeKey {
        AttributeKey { owner: self.id.clone(), attr: attr.to_string() }
    }
}

/// One entry of the sensor association list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorAssoc {
    pub logic: EntityId,
    pub sensor: EntityId,
}

/// One entry of the actuator association list, optionally carrying the value
/// the logic process demands of the actuator (e.g. a switch-point position).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActuatorAssoc {
    pub logic: EntityId,
    pub actuator: EntityId,
    pub required: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssocList {
    SensorAssoc,
    ActuatorAssoc,
}

impl fmt::Display for AssocList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssocList::SensorAssoc => "sensor_assoc",
            AssocList::ActuatorAssoc => "actuator_assoc",
        })
    }
}

/// Validated configuration of one installation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationDatabase {
    station_name: String,
    sensors: Vec<EntityDecl>,
    actuators: Vec<EntityDecl>,
    logic: Vec<EntityDecl>,
    sensor_assoc: Vec<SensorAssoc>,
    actuator_assoc: Vec<ActuatorAssoc>,
    index: HashMap<EntityId, (EntityClass, usize)>,
    keys: HashMap<String, AttributeKey>,
    by_logic_sensor: HashMap<EntityId, Vec<usize>>,
    by_logic_actuator: HashMap<EntityId, Vec<usize>>,
    by_sensor: HashMap<EntityId, Vec<usize>>,
    by_actuator: HashMap<EntityId, Vec<usize>>,
}

impl ConfigurationDatabase {
    /// Builds and validates a database from its four lists.
    pub fn new(
        station_name: impl Into<String>,
        sensors: Vec<EntityDecl>,
        actuators: Vec<EntityDecl>,
        logic: Vec<EntityDecl>,
        sensor_assoc: Vec<SensorAssoc>,
        actuator_assoc: Vec<ActuatorAssoc>,
    ) -> Result<Self, ConfigError> {
        let station_name = station_name.into();
        if !is_token(&station_name) {
            return Err(ConfigError::MissingSection("station".into()));
        }
        let mut index = HashMap::new();
        for (class, list) in [
            (EntityClass::Sensor, &sensors),
            (EntityClass::Actuator, &actuators),
            (EntityClass::Logic, &logic),
        ] {
            for (pos, decl) in list.iter().enumerate() {
                if !is_token(decl.id.as_str()) {
                    return Err(ConfigError::Syntax {
                        line: 0,
                        message: format!("invalid identifier `{}`", decl.id),
                    });
                }
                if decl.class != class {
                    return Err(ConfigError::ClassMismatch { id: decl.id.to_string(), expected: class });
                }
                let schema = registry::kind(&decl.kind)
                    .ok_or_else(|| ConfigError::UnknownKind(decl.kind.clone()))?;
                if schema.class != class {
                    return Err(ConfigError::ClassMismatch { id: decl.id.to_string(), expected: class });
                }
                validate_attributes(decl, schema)?;
                if index.insert(decl.id.clone(), (class, pos)).is_some() {
                    return Err(ConfigError::DuplicateId(decl.id.to_string()));
                }
            }
        }

        let mut keys = HashMap::new();
        for decl in sensors.iter().chain(&actuators).chain(&logic) {
            for a in &decl.attributes {
                let key = decl.key(&a.attr);
                let rendered = key.rendered();
                if keys.insert(rendered.clone(), key).is_some() {
                    return Err(ConfigError::DuplicateAttributeKey(rendered));
                }
            }
        }

        let expect = |id: &EntityId, class: EntityClass| -> Result<(), ConfigError> {
            match index.get(id) {
                None => Err(ConfigError::DanglingReference(id.to_string())),
                Some((c, _)) if *c != class => {
                    Err(ConfigError::ClassMismatch { id: id.to_string(), expected: class })
                }
                Some(_) => Ok(()),
            }
        };

        let mut seen = HashSet::new();
        let mut by_logic_sensor: HashMap<EntityId, Vec<usize>> = HashMap::new();
        let mut by_sensor: HashMap<EntityId, Vec<usize>> = HashMap::new();
        for (i, a) in sensor_assoc.iter().enumerate() {
            expect(&a.logic, EntityClass::Logic)?;
            expect(&a.sensor, EntityClass::Sensor)?;
            if !seen.insert((a.logic.clone(), a.sensor.clone())) {
                return Err(ConfigError::DuplicateAssociation {
                    logic: a.logic.to_string(),
                    entity: a.sensor.to_string(),
                });
            }
            by_logic_sensor.entry(a.logic.clone()).or_default().push(i);
            by_sensor.entry(a.sensor.clone()).or_default().push(i);
        }
        let mut by_logic_actuator: HashMap<EntityId, Vec<usize>> = HashMap::new();
        let mut by_actuator: HashMap<EntityId, Vec<usize>> = HashMap::new();
        for (i, a) in actuator_assoc.iter().enumerate() {
            expect(&a.logic, EntityClass::Logic)?;
            expect(&a.actuator, EntityClass::Actuator)?;
            if !seen.insert((a.logic.clone(), a.actuator.clone())) {
                return Err(ConfigError::DuplicateAssociation {
                    logic: a.logic.to_string(),
                    entity: a.actuator.to_string(),
                });
            }
            if let Some(required) = &a.required {
                let decl = &actuators[index[&a.actuator].1];
                let relevant = relevant_attribute(decl);
                let ok = relevant.and_then(|r| decl.attribute(r)).is_some_and(|s| s.contains(required));
                if !ok {
                    return Err(ConfigError::DomainViolation {
                        key: decl.key(relevant.unwrap_or("?")).rendered(),
                        value: required.clone(),
                    });
                }
            }
            by_logic_actuator.entry(a.logic.clone()).or_default().push(i);
            by_actuator.entry(a.actuator.clone()).or_default().push(i);
        }

        Ok(ConfigurationDatabase {
            station_name,
            sensors,
            actuators,
            logic,
            sensor_assoc,
            actuator_assoc,
            index,
            keys,
            by_logic_sensor,
            by_logic_actuator,
            by_sensor,
            by_actuator,
        })
    }

    pub fn station_name(&self) -> &str {
        &self.station_name
    }

    pub fn sensors(&self) -> &[EntityDecl] {
        &self.sensors
    }

    pub fn actuators(&self) -> &[EntityDecl] {
        &self.actuators
    }

    pub fn logic(&self) -> &[EntityDecl] {
        &self.logic
    }

    pub fn declarations(&self, class: EntityClass) -> &[EntityDecl] {
        match class {
            EntityClass::Sensor => &self.sensors,
            EntityClass::Actuator => &self.actuators,
            EntityClass::Logic => &self.logic,
        }
    }

    /// Every declaration: sensors, then actuators, then logic processes.
    pub fn entities(&self) -> impl Iterator<Item = &EntityDecl> {
        self.sensors.iter().chain(&self.actuators).chain(&self.logic)
    }

    pub fn entity(&self, id: &EntityId) -> Option<&EntityDecl> {
        self.index.get(id).map(|(class, pos)| &self.declarations(*class)[*pos])
    }

    pub fn entity_by_name(&self, id: &str) -> Option<&EntityDecl> {
        self.entity(&EntityId::new(id))
    }

    pub fn class_of(&self, id: &EntityId) -> Option<EntityClass> {
        self.index.get(id).map(|(c, _)| *c)
    }

    pub fn sensor_assoc(&self) -> &[SensorAssoc] {
        &self.sensor_assoc
    }

    pub fn actuator_assoc(&self) -> &[ActuatorAssoc] {
        &self.actuator_assoc
    }

    /// Sensor-list entry indices belonging to a logic process.
    pub fn sensor_entries_of(&self, logic: &EntityId) -> &[usize] {
        self.by_logic_sensor.get(logic).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Actuator-list entry indices belonging to a logic process.
    pub fn actuator_entries_of(&self, logic: &EntityId) -> &[usize] {
        self.by_logic_actuator.get(logic).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Sensor-list entry indices that mention a sensor.
    pub fn entries_for_sensor(&self, sensor: &EntityId) -> &[usize] {
        self.by_sensor.get(sensor).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Actuator-list entry indices that mention an actuator.
    pub fn entries_for_actuator(&self, actuator: &EntityId) -> &[usize] {
        self.by_actuator.get(actuator).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn sensors_of(&self, logic: &EntityId) -> impl Iterator<Item = &EntityId> {
        self.sensor_entries_of(logic).iter().map(|&i| &self.sensor_assoc[i].sensor)
    }

    pub fn actuators_of(&self, logic: &EntityId) -> impl Iterator<Item = &ActuatorAssoc> {
        self.actuator_entries_of(logic).iter().map(|&i| &self.actuator_assoc[i])
    }

    /// True when `a` and `b` appear together in one association entry, in
    /// either direction.
    pub fn associated(&self, a: &EntityId, b: &EntityId) -> bool {
        let (logic, other) = match (self.class_of(a), self.class_of(b)) {
            (Some(EntityClass::Logic), Some(c)) if c.is_physical() => (a, b),
            (Some(c), Some(EntityClass::Logic)) if c.is_physical() => (b, a),
            _ => return false,
        };
        self.sensor_entries_of(logic).iter().any(|&i| self.sensor_assoc[i].sensor == *other)
            || self.actuator_entries_of(logic).iter().any(|&i| self.actuator_assoc[i].actuator == *other)
    }

    /// Entities associated with `id`: for a logic process its sensors and
    /// actuators, for a physical entity the logic processes it serves.
    pub fn associates_of(&self, id: &EntityId) -> Vec<&EntityId> {
        match self.class_of(id) {
            Some(EntityClass::Logic) => self.sensors_of(id).chain(self.actuators_of(id).map(|a| &a.actuator)).collect(),
            Some(EntityClass::Sensor) => {
                self.entries_for_sensor(id).iter().map(|&i| &self.sensor_assoc[i].logic).collect()
            }
            Some(EntityClass::Actuator) => {
                self.entries_for_actuator(id).iter().map(|&i| &self.actuator_assoc[i].logic).collect()
            }
            None => Vec::new(),
        }
    }

    pub fn required_value(&self, logic: &EntityId, actuator: &EntityId) -> Option<&str> {
        self.actuators_of(logic).find(|a| a.actuator == *actuator).and_then(|a| a.required.as_deref())
    }

    /// Every attribute key in declaration order.
    pub fn attribute_keys(&self) -> Vec<AttributeKey> {
        self.entities().flat_map(|d| d.attributes.iter().map(|a| d.key(&a.attr))).collect()
    }

    pub fn resolve_key(&self, rendered: &str) -> Option<&AttributeKey> {
        self.keys.get(rendered)
    }

    pub fn schema(&self, key: &AttributeKey) -> Option<&AttributeSchema> {
        self.entity(&key.owner).and_then(|d| d.attribute(&key.attr))
    }

    /// True if some declared entity (or registered kind) carries `attr`.
    pub fn knows_attribute(&self, attr: &str) -> bool {
        self.entities().any(|d| d.attribute(attr).is_some())
            || registry::KINDS.iter().any(|k| k.attributes.iter().any(|(a, _, _)| *a == attr))
    }

    /// Renders the database back to the `.station` text format.
    pub fn to_station_text(&self) -> String {
        parse::render_station(self)
    }

    pub(crate) fn with_associations(
        &self,
        sensor_assoc: Vec<SensorAssoc>,
        actuator_assoc: Vec<ActuatorAssoc>,
    ) -> Result<Self, ConfigError> {
        ConfigurationDatabase::new(
            self.station_name.clone(),
            self.sensors.clone(),
            self.actuators.clone(),
            self.logic.clone(),
            sensor_assoc,
            actuator_assoc,
        )
    }
}

pub(crate) fn relevant_attribute(decl: &EntityDecl) -> Option<&str> {
    registry::kind(&decl.kind)
        .and_then(|k| k.relevant_attribute)
        .or_else(|| decl.attributes.first().map(|a| a.attr.as_str()))
}

fn validate_attributes(decl: &EntityDecl, schema: &registry::KindSchema) -> Result<(), ConfigError> {
    let invalid = |attr: &str, message: String| ConfigError::InvalidSchema {
        owner: decl.id.to_string(),
        attr: attr.to_string(),
        message,
    };
    let mut names = BTreeSet::new();
    for a in &decl.attributes {
        if !is_token(&a.attr) {
            return Err(invalid(&a.attr, "attribute names must be tokens".into()));
        }
        if !names.insert(a.attr.as_str()) {
            return Err(invalid(&a.attr, "declared twice".into()));
        }
        if a.domain.is_empty() {
            return Err(invalid(&a.attr, "empty domain".into()));
        }
        let distinct: BTreeSet<_> = a.domain.iter().collect();
        if distinct.len() != a.domain.len() {
            return Err(invalid(&a.attr, "duplicate domain value".into()));
        }
        if let Some(v) = a.domain.iter().find(|v| !is_token(v)) {
            return Err(invalid(&a.attr, format!("domain value `{v}` is not a token")));
        }
        if !a.contains(&a.initial) {
            return Err(ConfigError::DomainViolation { key: decl.key(&a.attr).rendered(), value: a.initial.clone() });
        }
    }
    for (attr, _, _) in schema.attributes {
        if !names.contains(attr) {
            return Err(invalid(attr, format!("required by kind {}", schema.name)));
        }
    }
    Ok(())
}

/// Collects the process attributes named `attr` reachable from the given
/// sensors and actuators: their own attributes first, then those of every
/// logic process the association lists tie them to. Each association entry
/// consulted is reported to `on_read`.
pub fn logic_for_attribute_traced(
    db: &ConfigurationDatabase,
    attr: &str,
    sensors: &[EntityId],
    actuators: &[EntityId],
    on_read: &mut dyn FnMut(AssocList, usize),
) -> Vec<(EntityId, AttributeKey)> {
    let mut out: Vec<(EntityId, AttributeKey)> = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |decl: &EntityDecl, out: &mut Vec<(EntityId, AttributeKey)>| {
        if decl.attribute(attr).is_some() && seen.insert(decl.id.clone()) {
            out.push((decl.id.clone(), decl.key(attr)));
        }
    };

    let mut logic_processes: Vec<&EntityId> = Vec::new();
    for s in sensors {
        if let Some(d) = db.entity(s) {
            push(d, &mut out);
        }
        for &i in db.entries_for_sensor(s) {
            on_read(AssocList::SensorAssoc, i);
            let lp = &db.sensor_assoc[i].logic;
            if !logic_processes.contains(&lp) {
                logic_processes.push(lp);
            }
        }
    }
    for a in actuators {
        if let Some(d) = db.entity(a) {
            push(d, &mut out);
        }
        for &i in db.entries_for_actuator(a) {
            on_read(AssocList::ActuatorAssoc, i);
            let lp = &db.actuator_assoc[i].logic;
            if !logic_processes.contains(&lp) {
                logic_processes.push(lp);
            }
        }
    }
    for lp in logic_processes {
        if let Some(d) = db.entity(lp) {
            push(d, &mut out);
        }
    }
    out
}

pub fn logic_for_attribute(
    db: &ConfigurationDatabase,
    attr: &str,
    sensors: &[EntityId],
    actuators: &[EntityId],
) -> Vec<(EntityId, AttributeKey)> {
    logic_for_attribute_traced(db, attr, sensors, actuators, &mut |_, _| {})
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub const T2: &str = include_str!("../../tests/fixtures/t2.station");

    pub fn t2() -> super::ConfigurationDatabase {
        super::parse_station(T2).expect("T2 fixture parses")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::t2;
    use super::*;

    fn ids(v: &[(EntityId, AttributeKey)]) -> Vec<String> {
        v.iter().map(|(_, k)| k.rendered()).collect()
    }

    #[test]
    fn logic_for_attribute_walks_associations() {
        let db = t2();
        let tc = |s: &str| EntityId::new(s);
        // tc1 serves both routes, tc2 only routeA; the walk is a union.
        assert_eq!(
            ids(&logic_for_attribute(&db, "Route_Status", &[tc("tc1"), tc("tc2")], &[])),
            ["Route_Status_routeA", "Route_Status_routeB"]
        );
        assert_eq!(ids(&logic_for_attribute(&db, "Route_Status", &[tc("tc2")], &[])), ["Route_Status_routeA"]);
        assert_eq!(ids(&logic_for_attribute(&db, "Route_Status", &[tc("tc3")], &[])), ["Route_Status_routeB"]);
        assert!(logic_for_attribute(&db, "Nonexistent_Attr", &[tc("tc1")], &[tc("sp1")]).is_empty());
        assert_eq!(ids(&logic_for_attribute(&db, "status", &[tc("tc1")], &[])), ["status_tc1"]);
        assert_eq!(
            ids(&logic_for_attribute(&db, "Route_Status", &[], &[tc("lsB")])),
            ["Route_Status_routeB"]
        );
    }

    #[test]
    fn logic_for_attribute_reports_entries_read() {
        let db = t2();
        let mut reads = Vec::new();
        logic_for_attribute_traced(&db, "Route_Status", &[EntityId::new("tc1")], &[EntityId::new("sp1")], &mut |l, i| {
            reads.push((l, i))
        });
        assert_eq!(
            reads,
            [
                (AssocList::SensorAssoc, 0),
                (AssocList::SensorAssoc, 2),
                (AssocList::ActuatorAssoc, 0),
                (AssocList::ActuatorAssoc, 2),
            ]
        );
    }

    #[test]
    fn keys_are_unique_and_render() {
        let db = t2();
        let keys = db.attribute_keys();
        assert_eq!(keys.len(), 11);
        let rendered: BTreeSet<_> = keys.iter().map(AttributeKey::rendered).collect();
        assert_eq!(rendered.len(), keys.len());
        assert!(rendered.contains("Route_Status_routeA"));
        assert_eq!(db.resolve_key("position_sp1"), Some(&AttributeKey::new("sp1", "position")));
    }

    #[test]
    fn colliding_rendered_keys_are_rejected() {
        let doc = "station S\nsensor b_c kind=TrackCircuit a:x|y=x\nsensor c kind=TrackCircuit a_b:x|y=x\n";
        assert_eq!(parse_station(doc), Err(ConfigError::DuplicateAttributeKey("a_b_c".into())));
    }

    #[test]
    fn association_queries() {
        let db = t2();
        let route_a = EntityId::new("routeA");
        assert_eq!(db.sensors_of(&route_a).map(EntityId::as_str).collect::<Vec<_>>(), ["tc1", "tc2"]);
        assert_eq!(db.required_value(&route_a, &EntityId::new("sp1")), Some("Straight"));
        assert_eq!(db.required_value(&EntityId::new("routeB"), &EntityId::new("sp1")), Some("Reverse"));
        assert_eq!(db.required_value(&route_a, &EntityId::new("lsA")), None);
        assert!(db.associated(&EntityId::new("tc1"), &EntityId::new("routeB")));
        assert!(!db.associated(&EntityId::new("tc2"), &EntityId::new("routeB")));
    }
}
