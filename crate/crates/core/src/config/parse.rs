//! Reader and writer for the line-oriented `.station` format.

use std::fmt::Write as _;

use super::{
    is_token, registry, ActuatorAssoc, AttributeSchema, ConfigError, ConfigurationDatabase, EntityClass,
    EntityDecl, EntityId, SensorAssoc,
};

/// Parses and validates a `.station` document.
pub fn parse_station(document: &str) -> Result<ConfigurationDatabase, ConfigError> {
    let mut station: Option<String> = None;
    let mut sensors = Vec::new();
    let mut actuators = Vec::new();
    let mut logic = Vec::new();
    let mut sensor_assoc = Vec::new();
    let mut actuator_assoc = Vec::new();

    for (n, raw) in document.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { line: line_no, message };
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();

        if station.is_none() {
            if head != "station" {
                return Err(ConfigError::MissingSection("station".into()));
            }
            match rest.as_slice() {
                [name] if is_token(name) => station = Some((*name).to_string()),
                _ => return Err(syntax("expected `station <name>`".into())),
            }
            continue;
        }

        match head {
            "station" => return Err(syntax("duplicate `station` line".into())),
            "sensor" | "actuator" | "logic" => {
                let class = EntityClass::parse(head).expect("matched keyword");
                let decl = parse_decl(class, &rest).map_err(|e| match e {
                    DeclError::Syntax(m) => syntax(m),
                    DeclError::Config(c) => c,
                })?;
                match class {
                    EntityClass::Sensor => sensors.push(decl),
                    EntityClass::Actuator => actuators.push(decl),
                    EntityClass::Logic => logic.push(decl),
                }
            }
            "assoc" => match rest.as_slice() {
                ["sensor", lp, entries @ ..] if !entries.is_empty() => {
                    for e in entries {
                        if !is_token(e) {
                            return Err(syntax(format!("invalid sensor reference `{e}`")));
                        }
                        sensor_assoc.push(SensorAssoc { logic: EntityId::new(*lp), sensor: EntityId::new(*e) });
                    }
                }
                ["actuator", lp, entries @ ..] if !entries.is_empty() => {
                    for e in entries {
                        let (id, required) = match e.split_once('=') {
                            Some((id, v)) => (id, Some(v.to_string())),
                            None => (*e, None),
                        };
                        if !is_token(id) || required.as_deref().is_some_and(|v| !is_token(v)) {
                            return Err(syntax(format!("invalid actuator reference `{e}`")));
                        }
                        actuator_assoc.push(ActuatorAssoc {
                            logic: EntityId::new(*lp),
                            actuator: EntityId::new(id),
                            required,
                        });
                    }
                }
                _ => return Err(syntax("expected `assoc sensor|actuator <logic> <entity>...`".into())),
            },
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }

    let station = station.ok_or_else(|| ConfigError::MissingSection("station".into()))?;
    ConfigurationDatabase::new(station, sensors, actuators, logic, sensor_assoc, actuator_assoc)
}

enum DeclError {
    Syntax(String),
    Config(ConfigError),
}

fn parse_decl(class: EntityClass, words: &[&str]) -> Result<EntityDecl, DeclError> {
    let (id, kind_clause, clauses) = match words {
        [id, kind, clauses @ ..] => (*id, *kind, clauses),
        _ => return Err(DeclError::Syntax(format!("expected `{class} <id> kind=<kind> ...`"))),
    };
    if !is_token(id) {
        return Err(DeclError::Syntax(format!("invalid identifier `{id}`")));
    }
    let kind = kind_clause
        .strip_prefix("kind=")
        .ok_or_else(|| DeclError::Syntax(format!("expected `kind=<kind>` after `{id}`")))?;
    let schema = registry::kind(kind).ok_or_else(|| DeclError::Config(ConfigError::UnknownKind(kind.to_string())))?;
    let mut attributes = schema.default_attributes();

    for clause in clauses {
        let (lhs, initial) = match clause.split_once('=') {
            Some((l, r)) => (l, Some(r)),
            None => (*clause, None),
        };
        let (attr, domain) = match lhs.split_once(':') {
            Some((a, d)) => (a, Some(d.split('|').map(str::to_string).collect::<Vec<_>>())),
            None => (lhs, None),
        };
        if !is_token(attr) {
            return Err(DeclError::Syntax(format!("invalid attribute clause `{clause}`")));
        }
        let existing = attributes.iter().position(|a| a.attr == attr);
        match (existing, domain) {
            (Some(pos), None) => {
                let initial = initial
                    .ok_or_else(|| DeclError::Syntax(format!("attribute clause `{clause}` sets nothing")))?;
                attributes[pos].initial = initial.to_string();
            }
            (None, None) => return Err(DeclError::Config(ConfigError::UnknownAttribute(attr.to_string()))),
            (existing, Some(domain)) => {
                let initial = match initial {
                    Some(v) => v.to_string(),
                    None => existing
                        .map(|p| attributes[p].initial.clone())
                        .filter(|i| domain.contains(i))
                        .or_else(|| domain.first().cloned())
                        .unwrap_or_default(),
                };
                let schema = AttributeSchema { attr: attr.to_string(), domain, initial };
                match existing {
                    Some(pos) => attributes[pos] = schema,
                    None => attributes.push(schema),
                }
            }
        }
    }

    Ok(EntityDecl { id: EntityId::new(id), kind: kind.to_string(), class, attributes })
}

pub(super) fn render_station(db: &ConfigurationDatabase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "station {}", db.station_name());
    for decl in db.entities() {
        let _ = write!(out, "{} {} kind={}", decl.class, decl.id, decl.kind);
        let defaults = registry::kind(&decl.kind).map(|k| k.default_attributes()).unwrap_or_default();
        for a in &decl.attributes {
            if defaults.iter().any(|d| d == a) {
                continue;
            }
            let _ = write!(out, " {}:{}={}", a.attr, a.domain.join("|"), a.initial);
        }
        out.push('\n');
    }
    let mut last: Option<&EntityId> = None;
    for a in db.sensor_assoc() {
        if last != Some(&a.logic) {
            if last.is_some() {
                out.push('\n');
            }
            let _ = write!(out, "assoc sensor {}", a.logic);
            last = Some(&a.logic);
        }
        let _ = write!(out, " {}", a.sensor);
    }
    if last.is_some() {
        out.push('\n');
    }
    let mut last: Option<&EntityId> = None;
    for a in db.actuator_assoc() {
        if last != Some(&a.logic) {
            if last.is_some() {
                out.push('\n');
            }
            let _ = write!(out, "assoc actuator {}", a.logic);
            last = Some(&a.logic);
        }
        match &a.required {
            Some(v) => {
                let _ = write!(out, " {}={}", a.actuator, v);
            }
            None => {
                let _ = write!(out, " {}", a.actuator);
            }
        }
    }
    if last.is_some() {
        out.push('\n');
    }
    out
}
