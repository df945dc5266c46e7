use std::collections::{BTreeMap, BTreeSet};

use crate::config::{EntityId, Selector, ValueExpr};
use crate::predicate::{Op, Predicate};

/// One elaboration cycle to process the command, one for switch-point
/// movement confirmation.
pub const DEFAULT_SETTLE_CYCLES: u32 = 2;

/// `bind r : logic kind=Route`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub var: String,
    pub selector: Selector,
}

/// `influence tcs = status of sensor kind=TrackCircuit and assoc(r) : Clear|Occupied`
///
/// Names a group of elementary state variables: the attribute `attr` of every
/// entity the target selects. Each is enumerated over `domain`, or over its
/// full schema domain when none is given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceVarDecl {
    pub name: String,
    pub attr: String,
    pub target: Selector,
    pub domain: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    All,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OwnerRef {
    Var(String),
    Entity(EntityId),
}

/// What a state atom or output-state check refers to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateRef {
    /// An influence group by name.
    Group(String),
    /// One attribute of one owner, `Route_Status_$r` or `status_tc1`.
    Key { attr: String, owner: OwnerRef },
    /// Every homonymous attribute reachable from the test's sensors and
    /// actuators.
    Name(String),
}

impl StateRef {
    pub fn attr(&self) -> Option<&str> {
        match self {
            StateRef::Group(_) => None,
            StateRef::Key { attr, .. } | StateRef::Name(attr) => Some(attr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateAtom {
    pub quant: Option<Quantifier>,
    pub target: StateRef,
    pub op: Op,
    pub values: Vec<String>,
}

/// `input kind=MMI : FormRoute $r`: every selected sensor receives each
/// alternative in turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSpec {
    pub sensors: Selector,
    pub alternatives: Vec<Vec<ValueExpr>>,
}

/// `output kind=SwitchPoint and assoc(r) : position = required(r)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub actuators: Selector,
    pub attr: String,
    pub op: Op,
    pub values: Vec<ValueExpr>,
}

/// `state_out Route_Status_$r = Set_OK`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateOutSpec {
    pub target: StateRef,
    pub op: Op,
    pub values: Vec<String>,
}

/// `condition tc_occupied when any tcs = Occupied`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSpec {
    pub class: String,
    pub when: Option<Predicate<StateAtom>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractTestCase {
    pub name: String,
    pub bindings: Vec<Binding>,
    pub influence: Vec<InfluenceVarDecl>,
    pub state_in: Predicate<StateAtom>,
    pub inputs: Vec<InputSpec>,
    pub outputs: Vec<OutputSpec>,
    pub state_out: Vec<StateOutSpec>,
    pub cycles: u32,
    /// Logic processes (by binding variable) that must refuse the input.
    pub reject: Vec<String>,
    pub conditions: Vec<ConditionSpec>,
}

/// A logic-state prerequisite: a top-level `attr_owner = value` conjunct of
/// the input state naming something other than an influence group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Requirement {
    pub attr: String,
    pub owner: OwnerRef,
    pub value: String,
}

impl AbstractTestCase {
    pub fn expects_rejection(&self) -> bool {
        !self.reject.is_empty()
    }

    pub fn binding(&self, var: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.var == var)
    }

    pub fn influence_group(&self, name: &str) -> Option<&InfluenceVarDecl> {
        self.influence.iter().find(|i| i.name == name)
    }

    /// Top-level positive `Key = value` conjuncts of the input state.
    pub fn requirements(&self) -> Vec<Requirement> {
        self.state_in
            .positive_conjunct_atoms()
            .into_iter()
            .filter(|a| a.quant != Some(Quantifier::Any))
            .filter_map(|a| match (&a.target, a.op, a.values.as_slice()) {
                (StateRef::Key { attr, owner }, Op::Eq | Op::In, [value]) => {
                    Some(Requirement { attr: attr.clone(), owner: owner.clone(), value: value.clone() })
                }
                _ => None,
            })
            .collect()
    }

    /// `(attr, value)` pairs this case's output state pins with an equality.
    pub fn establishes(&self) -> Vec<(String, String)> {
        if self.expects_rejection() {
            return Vec::new();
        }
        self.state_out
            .iter()
            .filter_map(|s| match (s.target.attr(), s.op, s.values.as_slice()) {
                (Some(attr), Op::Eq, [v]) => Some((attr.to_string(), v.clone())),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AbstractSuite {
    pub cases: Vec<AbstractTestCase>,
    /// Initial values of logic-process attributes in the configuration the
    /// suite was resolved against, by attribute name.
    pub logic_initial: BTreeMap<String, BTreeSet<String>>,
    /// Logic-process ids of that configuration, used to classify
    /// prerequisites owned by a concrete entity.
    pub logic_entities: BTreeSet<EntityId>,
}

impl AbstractSuite {
    pub fn case(&self, name: &str) -> Option<&AbstractTestCase> {
        self.cases.iter().find(|c| c.name == name)
    }

    /// Whether a requirement of `case` concerns a logic process.
    pub fn is_logic_requirement(&self, case: &AbstractTestCase, req: &Requirement) -> bool {
        match &req.owner {
            OwnerRef::Var(v) => case.binding(v).is_some_and(|b| b.selector.class == crate::config::EntityClass::Logic),
            OwnerRef::Entity(e) => self.logic_entities.contains(e),
        }
    }

    /// True when every logic process carrying the attribute starts at the
    /// required value.
    pub fn holds_initially(&self, req: &Requirement) -> bool {
        self.logic_initial.get(&req.attr).is_some_and(|vals| vals.len() == 1 && vals.contains(&req.value))
    }

    /// Logic prerequisites of a case that the initial state does not satisfy.
    pub fn open_requirements(&self, case: &AbstractTestCase) -> Vec<Requirement> {
        case.requirements()
            .into_iter()
            .filter(|r| self.is_logic_requirement(case, r) && !self.holds_initially(r))
            .collect()
    }
}
