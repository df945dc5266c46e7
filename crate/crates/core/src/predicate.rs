//! Boolean expression trees shared by entity selectors and state predicates.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Comparison operator usable in selectors, state predicates and checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "in")]
    In,
}

impl Op {
    pub fn parse(token: &str) -> Option<Op> {
        match token {
            "=" => Some(Op::Eq),
            "!=" => Some(Op::Ne),
            "in" => Some(Op::In),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Eq => "=",
            Op::Ne => "!=",
            Op::In => "in",
        }
    }

    /// Applies the operator to an observed value. `=` and `!=` look at the
    /// first expected value only.
    pub fn holds<S: AsRef<str>>(self, observed: &str, expected: &[S]) -> bool {
        match self {
            Op::Eq => expected.first().is_some_and(|v| v.as_ref() == observed),
            Op::Ne => expected.first().is_some_and(|v| v.as_ref() != observed),
            Op::In => expected.iter().any(|v| v.as_ref() == observed),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A concrete, fully resolved expectation on a single attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValuePredicate {
    pub op: Op,
    pub values: Vec<String>,
}

impl ValuePredicate {
    pub fn eq(value: impl Into<String>) -> Self {
        ValuePredicate { op: Op::Eq, values: vec![value.into()] }
    }

    pub fn holds(&self, observed: &str) -> bool {
        self.op.holds(observed, &self.values)
    }

    /// The single value this predicate pins, if it is an equality.
    pub fn pinned(&self) -> Option<&str> {
        match (self.op, self.values.as_slice()) {
            (Op::Eq, [v]) => Some(v),
            (Op::In, [v]) => Some(v),
            _ => None,
        }
    }

    /// Rendering used for the "expected" side of a failed check.
    pub fn expected_text(&self) -> String {
        match self.op {
            Op::Eq => self.values.join("|"),
            Op::Ne => format!("!= {}", self.values.join("|")),
            Op::In => format!("in {}", self.values.join("|")),
        }
    }
}

impl fmt::Display for ValuePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.op, self.values.join("|"))
    }
}

/// Boolean combination of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate<A> {
    True,
    Atom(A),
    Not(Box<Predicate<A>>),
    And(Vec<Predicate<A>>),
    Or(Vec<Predicate<A>>),
}

impl<A> Predicate<A> {
    pub fn eval<F>(&self, atom: &mut F) -> bool
    where
        F: FnMut(&A) -> bool,
    {
        match self {
            Predicate::True => true,
            Predicate::Atom(a) => atom(a),
            Predicate::Not(p) => !p.eval(atom),
            Predicate::And(ps) => ps.iter().all(|p| p.eval(atom)),
            Predicate::Or(ps) => ps.iter().any(|p| p.eval(atom)),
        }
    }

    /// Fallible evaluation; the first error aborts.
    pub fn try_eval<F, E>(&self, atom: &mut F) -> Result<bool, E>
    where
        F: FnMut(&A) -> Result<bool, E>,
    {
        Ok(match self {
            Predicate::True => true,
            Predicate::Atom(a) => atom(a)?,
            Predicate::Not(p) => !p.try_eval(atom)?,
            Predicate::And(ps) => {
                for p in ps {
                    if !p.try_eval(atom)? {
                        return Ok(false);
                    }
                }
                true
            }
            Predicate::Or(ps) => {
                for p in ps {
                    if p.try_eval(atom)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>) {
        match self {
            Predicate::True => {}
            Predicate::Atom(a) => out.push(a),
            Predicate::Not(p) => p.collect_atoms(out),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
        }
    }

    /// Top-level conjuncts: `a and b and c` yields `[a, b, c]`.
    pub fn conjuncts(&self) -> Vec<&Predicate<A>> {
        match self {
            Predicate::True => Vec::new(),
            Predicate::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            other => vec![other],
        }
    }

    /// Atoms that occur positively in the top-level conjunction.
    pub fn positive_conjunct_atoms(&self) -> Vec<&A> {
        self.conjuncts()
            .into_iter()
            .filter_map(|p| match p {
                Predicate::Atom(a) => Some(a),
                _ => None,
            })
            .collect()
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(_) => 0,
            Predicate::And(_) => 1,
            _ => 2,
        }
    }
}

impl<A: fmt::Display> fmt::Display for Predicate<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child<A: fmt::Display>(
            f: &mut fmt::Formatter<'_>,
            p: &Predicate<A>,
            min: u8,
        ) -> fmt::Result {
            if p.precedence() < min || matches!(p, Predicate::True) {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        }
        match self {
            Predicate::True => f.write_str("true"),
            Predicate::Atom(a) => write!(f, "{a}"),
            Predicate::Not(p) => {
                f.write_str("not ")?;
                child(f, p, 2)
            }
            Predicate::And(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    child(f, p, 2)?;
                }
                Ok(())
            }
            Predicate::Or(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" or ")?;
                    }
                    child(f, p, 1)?;
                }
                Ok(())
            }
        }
    }
}
