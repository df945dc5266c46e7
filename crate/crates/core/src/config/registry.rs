//! Built-in schema registry: the entity kinds an interlocking configuration
//! may declare, with their attribute domains and initial values.

use super::{AttributeSchema, EntityClass};

/// One registered entity kind.
#[derive(Debug)]
pub struct KindSchema {
    pub name: &'static str,
    pub class: EntityClass,
    /// `(attribute, domain, initial)`
    pub attributes: &'static [(&'static str, &'static [&'static str], &'static str)],
    /// Attribute a required value in an association list refers to.
    pub relevant_attribute: Option<&'static str>,
}

impl KindSchema {
    pub fn default_attributes(&self) -> Vec<AttributeSchema> {
        self.attributes
            .iter()
            .map(|(attr, domain, initial)| AttributeSchema {
                attr: (*attr).to_string(),
                domain: domain.iter().map(|v| (*v).to_string()).collect(),
                initial: (*initial).to_string(),
            })
            .collect()
    }
}

pub const TRACK_CIRCUIT: &str = "TrackCircuit";
pub const MMI: &str = "MMI";
pub const SWITCH_POINT: &str = "SwitchPoint";
pub const LIGHT_SIGNAL: &str = "LightSignal";
pub const ROUTE: &str = "Route";

pub const ROUTE_STATUS: &str = "Route_Status";

pub static KINDS: &[KindSchema] = &[
    KindSchema {
        name: TRACK_CIRCUIT,
        class: EntityClass::Sensor,
        attributes: &[("status", &["Clear", "Occupied", "Broken"], "Clear")],
        relevant_attribute: Some("status"),
    },
    KindSchema {
        name: MMI,
        class: EntityClass::Sensor,
        attributes: &[],
        relevant_attribute: None,
    },
    KindSchema {
        name: SWITCH_POINT,
        class: EntityClass::Actuator,
        attributes: &[
            ("position", &["Straight", "Reverse", "Moving"], "Straight"),
            ("control", &["Controlled", "OutOfControl"], "Controlled"),
        ],
        relevant_attribute: Some("position"),
    },
    KindSchema {
        name: LIGHT_SIGNAL,
        class: EntityClass::Actuator,
        attributes: &[
            ("aspect", &["Red", "Green", "Yellow", "FlashingYellow"], "Red"),
            ("control", &["Controlled", "Failed"], "Controlled"),
        ],
        relevant_attribute: Some("aspect"),
    },
    KindSchema {
        name: ROUTE,
        class: EntityClass::Logic,
        attributes: &[(ROUTE_STATUS, &["Idle", "Set_OK", "Occupied"], "Idle")],
        relevant_attribute: None,
    },
    // Declared so configurations can carry them; the reference simulator
    // gives them no behavior.
    KindSchema { name: "Line", class: EntityClass::Logic, attributes: &[], relevant_attribute: None },
    KindSchema { name: "Block", class: EntityClass::Logic, attributes: &[], relevant_attribute: None },
    KindSchema { name: "LeftIXL", class: EntityClass::Logic, attributes: &[], relevant_attribute: None },
];

pub fn kind(name: &str) -> Option<&'static KindSchema> {
    KINDS.iter().find(|k| k.name == name)
}

pub fn kinds_of(class: EntityClass) -> impl Iterator<Item = &'static KindSchema> {
    KINDS.iter().filter(move |k| k.class == class)
}
