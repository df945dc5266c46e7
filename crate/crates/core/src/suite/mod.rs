//! The abstract-test language: symbolic test cases written against entity
//! classes rather than concrete entities, their parser, pretty-printer and
//! the ordering that lets every input state be reached from earlier tests.

mod ast;
mod order;
mod parse;
mod print;

use thiserror::Error;

pub use ast::{
    AbstractSuite, AbstractTestCase, Binding, ConditionSpec, InfluenceVarDecl, InputSpec, OutputSpec, OwnerRef,
    Quantifier, Requirement, StateAtom, StateOutSpec, StateRef, DEFAULT_SETTLE_CYCLES,
};
pub use order::order_suite;
pub use parse::parse_suite;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{0}` bound twice")]
    DuplicateVariable(String),
    #[error("test case `{0}` defined twice")]
    DuplicateCase(String),
    #[error("unknown condition class `{0}`")]
    UnknownConditionClass(String),
    #[error("value `{value}` is not in the domain of `{attr}`")]
    DomainViolation { attr: String, value: String },
}

/// A parse or validation failure at a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct SuiteError {
    pub line: usize,
    pub kind: SuiteErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteWarning {
    /// A binding's selector matches nothing in the configuration, so the case
    /// yields no physical tests.
    #[error("test `{case}`: binding `{var}` matches no entity; the case is vacuous on this configuration")]
    Vacuous { case: String, var: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot order suite: no establishing test for the input state of {}", cases.join(", "))]
pub struct Unorderable {
    pub cases: Vec<String>,
}
