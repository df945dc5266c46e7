//! Property-based selection of configuration entities.

use std::collections::BTreeMap;
use std::fmt;

use super::{is_token, registry, ConfigError, ConfigurationDatabase, EntityClass, EntityDecl, EntityId};
use crate::predicate::{Op, Predicate};

/// Variable bindings in scope while evaluating a selector.
pub type Env = BTreeMap<String, EntityId>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Field {
    Kind,
    Id,
    Attr(String),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Kind => f.write_str("kind"),
            Field::Id => f.write_str("id"),
            Field::Attr(a) => f.write_str(a),
        }
    }
}

/// A value appearing on the right of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueExpr {
    Literal(String),
    /// `$var`: the id of the entity bound to `var`.
    Entity(String),
    /// `required(var)`: the value the logic process bound to `var` demands of
    /// the entity under consideration.
    Required(String),
}

impl ValueExpr {
    pub fn variable(&self) -> Option<&str> {
        match self {
            ValueExpr::Literal(_) => None,
            ValueExpr::Entity(v) | ValueExpr::Required(v) => Some(v),
        }
    }

    /// Resolves against the bindings; `subject` is the entity a `required`
    /// lookup refers to.
    pub fn resolve(&self, db: &ConfigurationDatabase, env: &Env, subject: &EntityId) -> Option<String> {
        match self {
            ValueExpr::Literal(v) => Some(v.clone()),
            ValueExpr::Entity(var) => env.get(var).map(|e| e.to_string()),
            ValueExpr::Required(var) => {
                env.get(var).and_then(|lp| db.required_value(lp, subject)).map(str::to_string)
            }
        }
    }
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Literal(v) => f.write_str(v),
            ValueExpr::Entity(v) => write!(f, "${v}"),
            ValueExpr::Required(v) => write!(f, "required({v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EntityAtom {
    /// `kind = TrackCircuit`, `id != tc1`, `status in Clear|Occupied`.
    /// Attribute comparisons read the configured initial value.
    Compare { field: Field, op: Op, values: Vec<ValueExpr> },
    /// The entity and the one bound to the variable share an association
    /// entry.
    Assoc(String),
    /// The entity (a logic process) differs from the one bound to the
    /// variable and both are associated with a common entity of the kind.
    Shares(String, String),
}

impl fmt::Display for EntityAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityAtom::Compare { field, op, values } => {
                let vals: Vec<String> = values.iter().map(ToString::to_string).collect();
                if *op == Op::Eq && matches!(field, Field::Kind | Field::Id) {
                    write!(f, "{field}={}", vals.join("|"))
                } else {
                    write!(f, "{field} {op} {}", vals.join("|"))
                }
            }
            EntityAtom::Assoc(v) => write!(f, "assoc({v})"),
            EntityAtom::Shares(v, k) => write!(f, "shares({v}, {k})"),
        }
    }
}

/// Selects entities of one class by a predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selector {
    pub class: EntityClass,
    pub predicate: Predicate<EntityAtom>,
}

impl Selector {
    pub fn new(class: EntityClass, predicate: Predicate<EntityAtom>) -> Self {
        Selector { class, predicate }
    }

    pub fn of_kind(class: EntityClass, kind: &str) -> Self {
        Selector::new(
            class,
            Predicate::Atom(EntityAtom::Compare {
                field: Field::Kind,
                op: Op::Eq,
                values: vec![ValueExpr::Literal(kind.to_string())],
            }),
        )
    }

    /// Variables referenced anywhere in the predicate.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for atom in self.predicate.atoms() {
            match atom {
                EntityAtom::Compare { values, .. } => out.extend(values.iter().filter_map(ValueExpr::variable)),
                EntityAtom::Assoc(v) | EntityAtom::Shares(v, _) => out.push(v.as_str()),
            }
        }
        out
    }

    /// Kinds the selector can possibly match: those named by a positive
    /// top-level `kind=` conjunct, or every registered kind of the class.
    pub fn candidate_kinds(&self) -> Vec<&str> {
        let mut pinned: Option<Vec<&str>> = None;
        for atom in self.predicate.positive_conjunct_atoms() {
            if let EntityAtom::Compare { field: Field::Kind, op: Op::Eq | Op::In, values } = atom {
                let kinds: Vec<&str> = values
                    .iter()
                    .filter_map(|v| match v {
                        ValueExpr::Literal(k) => Some(k.as_str()),
                        _ => None,
                    })
                    .collect();
                pinned = Some(match pinned {
                    None => kinds,
                    Some(prev) => prev.into_iter().filter(|k| kinds.contains(k)).collect(),
                });
            }
        }
        pinned.unwrap_or_else(|| registry::kinds_of(self.class).map(|k| k.name).collect())
    }

    /// True if an entity of one of the candidate kinds may carry `attr`.
    pub fn may_have_attribute(&self, db: &ConfigurationDatabase, attr: &str) -> bool {
        let kinds = self.candidate_kinds();
        kinds.iter().any(|k| {
            registry::kind(k).is_some_and(|s| s.attributes.iter().any(|(a, _, _)| *a == attr))
                || db.declarations(self.class).iter().any(|d| d.kind == *k && d.attribute(attr).is_some())
        })
    }

    pub(crate) fn matches(&self, db: &ConfigurationDatabase, env: &Env, decl: &EntityDecl) -> bool {
        decl.class == self.class && self.predicate.eval(&mut |atom| eval_atom(db, env, decl, atom))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.predicate {
            Predicate::True => write!(f, "{}", self.class),
            p => write!(f, "{} {p}", self.class),
        }
    }
}

fn eval_atom(db: &ConfigurationDatabase, env: &Env, decl: &EntityDecl, atom: &EntityAtom) -> bool {
    match atom {
        EntityAtom::Compare { field, op, values } => {
            let observed = match field {
                Field::Kind => Some(decl.kind.as_str()),
                Field::Id => Some(decl.id.as_str()),
                Field::Attr(a) => decl.attribute(a).map(|s| s.initial.as_str()),
            };
            let Some(observed) = observed else { return false };
            let expected: Option<Vec<String>> = values.iter().map(|v| v.resolve(db, env, &decl.id)).collect();
            expected.is_some_and(|e| op.holds(observed, &e))
        }
        EntityAtom::Assoc(var) => env.get(var).is_some_and(|other| db.associated(&decl.id, other)),
        EntityAtom::Shares(var, kind) => {
            let Some(other) = env.get(var) else { return false };
            if *other == decl.id {
                return false;
            }
            let mine = db.associates_of(&decl.id);
            db.associates_of(other)
                .into_iter()
                .any(|e| mine.contains(&e) && db.entity(e).is_some_and(|d| d.kind == *kind))
        }
    }
}

/// Checks that a selector references only registered kinds, attributes some
/// entity of the class can carry, and variables in `bound`.
pub fn validate_selector(db: &ConfigurationDatabase, sel: &Selector, bound: &[&str]) -> Result<(), ConfigError> {
    for atom in sel.predicate.atoms() {
        match atom {
            EntityAtom::Compare { field, values, .. } => {
                match field {
                    Field::Kind => {
                        for v in values {
                            if let ValueExpr::Literal(k) = v {
                                match registry::kind(k) {
                                    Some(s) if s.class == sel.class => {}
                                    _ => return Err(ConfigError::UnknownKind(k.clone())),
                                }
                            }
                        }
                    }
                    Field::Id => {}
                    Field::Attr(a) => {
                        if !is_token(a) || !sel.may_have_attribute(db, a) {
                            return Err(ConfigError::UnknownAttribute(a.clone()));
                        }
                    }
                }
                for var in values.iter().filter_map(ValueExpr::variable) {
                    if !bound.contains(&var) {
                        return Err(ConfigError::UnboundVariable(var.to_string()));
                    }
                }
            }
            EntityAtom::Assoc(var) => {
                if !bound.contains(&var.as_str()) {
                    return Err(ConfigError::UnboundVariable(var.clone()));
                }
            }
            EntityAtom::Shares(var, kind) => {
                if !bound.contains(&var.as_str()) {
                    return Err(ConfigError::UnboundVariable(var.clone()));
                }
                if registry::kind(kind).is_none() {
                    return Err(ConfigError::UnknownKind(kind.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Entities of the selector's class satisfying its predicate, in
/// declaration order.
pub fn select_entities(db: &ConfigurationDatabase, sel: &Selector) -> Result<Vec<EntityId>, ConfigError> {
    select_entities_with(db, sel, &Env::new())
}

pub fn select_entities_with(
    db: &ConfigurationDatabase,
    sel: &Selector,
    env: &Env,
) -> Result<Vec<EntityId>, ConfigError> {
    let bound: Vec<&str> = env.keys().map(String::as_str).collect();
    validate_selector(db, sel, &bound)?;
    Ok(select_unchecked(db, sel, env))
}

pub(crate) fn select_unchecked(db: &ConfigurationDatabase, sel: &Selector, env: &Env) -> Vec<EntityId> {
    db.declarations(sel.class).iter().filter(|d| sel.matches(db, env, d)).map(|d| d.id.clone()).collect()
}
