//! Line-oriented parser for `.atest` documents. The grammar is documented in
//! `docs/atest.md`.

use std::collections::BTreeSet;

use super::ast::*;
use super::{SuiteError, SuiteErrorKind, SuiteWarning};
use crate::config::{
    registry, validate_selector, ConfigError, ConfigurationDatabase, EntityAtom, EntityClass, Field,
    Selector, ValueExpr,
};
use crate::coverage::is_condition_class;
use crate::instantiate::enumerate_bindings;
use crate::predicate::{Op, Predicate};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    /// `Route_Status_$r`
    KeyPattern(String, String),
    Eq,
    Ne,
    LParen,
    RParen,
    Comma,
    Pipe,
    Colon,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

fn lex(line: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let word = |i: &mut usize| -> String {
        let start = *i;
        while *i < chars.len() && is_word_char(chars[*i]) {
            *i += 1;
        }
        chars[start..*i].iter().collect()
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '=' => {
                toks.push(Tok::Eq);
                i += 1;
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                toks.push(Tok::Ne);
                i += 2;
            }
            '(' | ')' | ',' | '|' | ':' => {
                toks.push(match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '|' => Tok::Pipe,
                    _ => Tok::Colon,
                });
                i += 1;
            }
            '$' => {
                i += 1;
                let v = word(&mut i);
                if v.is_empty() {
                    return Err("`$` must be followed by a variable name".into());
                }
                toks.push(Tok::Var(v));
            }
            c if is_word_char(c) => {
                let w = word(&mut i);
                if w.ends_with('_') && chars.get(i) == Some(&'$') {
                    i += 1;
                    let v = word(&mut i);
                    if v.is_empty() {
                        return Err("`$` must be followed by a variable name".into());
                    }
                    toks.push(Tok::KeyPattern(w.trim_end_matches('_').to_string(), v));
                } else {
                    toks.push(Tok::Word(w));
                }
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

type PResult<T> = Result<T, SuiteErrorKind>;

fn syntax<T>(msg: impl Into<String>) -> PResult<T> {
    Err(SuiteErrorKind::Syntax(msg.into()))
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            syntax(format!("expected {what}"))
        }
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            _ => syntax(format!("expected {what}")),
        }
    }

    fn end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            syntax(format!("unexpected trailing input {:?}", self.toks[self.pos]))
        }
    }

    fn op(&mut self) -> PResult<Op> {
        match self.next() {
            Some(Tok::Eq) => Ok(Op::Eq),
            Some(Tok::Ne) => Ok(Op::Ne),
            Some(Tok::Word(w)) if w == "in" => Ok(Op::In),
            _ => syntax("expected `=`, `!=` or `in`"),
        }
    }

    fn is_pred_end(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::Colon) | Some(Tok::RParen))
    }

    /// `pred := conj {or conj}`, `conj := unary {and unary}`,
    /// `unary := not unary | ( pred ) | atom`
    fn predicate<A>(&mut self, atom: &mut dyn FnMut(&mut Cursor) -> PResult<A>) -> PResult<Predicate<A>> {
        let mut alts = vec![self.conjunction(atom)?];
        while self.peek_word("or") {
            self.pos += 1;
            alts.push(self.conjunction(atom)?);
        }
        Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Predicate::Or(alts) })
    }

    fn conjunction<A>(&mut self, atom: &mut dyn FnMut(&mut Cursor) -> PResult<A>) -> PResult<Predicate<A>> {
        let mut parts = vec![self.unary(atom)?];
        while self.peek_word("and") {
            self.pos += 1;
            parts.push(self.unary(atom)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::And(parts) })
    }

    fn unary<A>(&mut self, atom: &mut dyn FnMut(&mut Cursor) -> PResult<A>) -> PResult<Predicate<A>> {
        if self.peek_word("not") {
            self.pos += 1;
            return Ok(Predicate::Not(Box::new(self.unary(atom)?)));
        }
        if self.eat(&Tok::LParen) {
            let p = self.predicate(atom)?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(p);
        }
        if self.peek_word("true") {
            self.pos += 1;
            return Ok(Predicate::True);
        }
        Ok(Predicate::Atom(atom(self)?))
    }

    fn value_expr(&mut self) -> PResult<ValueExpr> {
        match self.next() {
            Some(Tok::Var(v)) => Ok(ValueExpr::Entity(v)),
            Some(Tok::Word(w)) if w == "required" && self.peek() == Some(&Tok::LParen) => {
                self.pos += 1;
                let v = self.word("variable")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ValueExpr::Required(v))
            }
            Some(Tok::Word(w)) => Ok(ValueExpr::Literal(w)),
            _ => syntax("expected a value"),
        }
    }

    fn value_exprs(&mut self) -> PResult<Vec<ValueExpr>> {
        let mut vals = vec![self.value_expr()?];
        while self.eat(&Tok::Pipe) {
            vals.push(self.value_expr()?);
        }
        Ok(vals)
    }

    fn literals(&mut self) -> PResult<Vec<String>> {
        let mut vals = vec![self.word("a value")?];
        while self.eat(&Tok::Pipe) {
            vals.push(self.word("a value")?);
        }
        Ok(vals)
    }

    fn entity_atom(&mut self) -> PResult<EntityAtom> {
        let head = self.word("a selector atom")?;
        if self.peek() == Some(&Tok::LParen) && (head == "assoc" || head == "shares") {
            self.pos += 1;
            let var = self.word("variable")?;
            let atom = if head == "assoc" {
                EntityAtom::Assoc(var)
            } else {
                self.expect(Tok::Comma, "`,`")?;
                EntityAtom::Shares(var, self.word("kind")?)
            };
            self.expect(Tok::RParen, "`)`")?;
            return Ok(atom);
        }
        let field = match head.as_str() {
            "kind" => Field::Kind,
            "id" => Field::Id,
            _ => Field::Attr(head),
        };
        let op = self.op()?;
        let values = self.value_exprs()?;
        check_arity(op, values.len())?;
        Ok(EntityAtom::Compare { field, op, values })
    }

    fn entity_predicate(&mut self) -> PResult<Predicate<EntityAtom>> {
        if self.is_pred_end() {
            return Ok(Predicate::True);
        }
        self.predicate(&mut |c: &mut Cursor| c.entity_atom())
    }

    fn selector(&mut self) -> PResult<Selector> {
        let class_word = self.word("`sensor`, `actuator` or `logic`")?;
        let class = EntityClass::parse(&class_word)
            .ok_or_else(|| SuiteErrorKind::Syntax(format!("unknown entity class `{class_word}`")))?;
        Ok(Selector::new(class, self.entity_predicate()?))
    }
}

fn check_arity(op: Op, n: usize) -> PResult<()> {
    if op != Op::In && n != 1 {
        return syntax(format!("`{op}` takes exactly one value"));
    }
    Ok(())
}

fn config_error(e: ConfigError) -> SuiteErrorKind {
    match e {
        ConfigError::UnknownKind(k) => SuiteErrorKind::UnknownKind(k),
        ConfigError::UnknownAttribute(a) => SuiteErrorKind::UnknownAttribute(a),
        ConfigError::UnboundVariable(v) => SuiteErrorKind::UnboundVariable(v),
        other => SuiteErrorKind::Syntax(other.to_string()),
    }
}

/// Every value the configuration allows for an attribute name.
fn domain_union(db: &ConfigurationDatabase, attr: &str) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = db
        .entities()
        .filter_map(|d| d.attribute(attr))
        .flat_map(|s| s.domain.iter().cloned())
        .collect();
    for k in registry::KINDS {
        for (a, dom, _) in k.attributes {
            if *a == attr {
                out.extend(dom.iter().map(|v| v.to_string()));
            }
        }
    }
    out
}

struct CaseBuilder<'a> {
    db: &'a ConfigurationDatabase,
    case: AbstractTestCase,
    cycles_set: bool,
}

impl<'a> CaseBuilder<'a> {
    fn bound(&self) -> Vec<&str> {
        self.case.bindings.iter().map(|b| b.var.as_str()).collect()
    }

    fn require_bound(&self, var: &str) -> PResult<()> {
        if self.case.binding(var).is_some() {
            Ok(())
        } else {
            Err(SuiteErrorKind::UnboundVariable(var.to_string()))
        }
    }

    fn check_values(&self, attr: &str, values: &[String]) -> PResult<()> {
        let domain = domain_union(self.db, attr);
        match values.iter().find(|v| !domain.contains(*v)) {
            Some(v) => Err(SuiteErrorKind::DomainViolation { attr: attr.to_string(), value: v.clone() }),
            None => Ok(()),
        }
    }

    fn validate(&self, sel: &Selector) -> PResult<()> {
        validate_selector(self.db, sel, &self.bound()).map_err(config_error)
    }

    /// Resolves the reference of a state atom. Influence groups win over
    /// concrete keys; bare attribute names are allowed only where
    /// `allow_name` is set.
    fn state_ref(&self, tok: Tok, allow_name: bool, allow_group: bool) -> PResult<StateRef> {
        match tok {
            Tok::KeyPattern(attr, var) => {
                self.require_bound(&var)?;
                if !self.db.knows_attribute(&attr) {
                    return Err(SuiteErrorKind::UnknownAttribute(attr));
                }
                Ok(StateRef::Key { attr, owner: OwnerRef::Var(var) })
            }
            Tok::Word(w) => {
                if allow_group && self.case.influence_group(&w).is_some() {
                    return Ok(StateRef::Group(w));
                }
                if let Some(key) = self.db.resolve_key(&w) {
                    return Ok(StateRef::Key { attr: key.attr.clone(), owner: OwnerRef::Entity(key.owner.clone()) });
                }
                if allow_name && self.db.knows_attribute(&w) {
                    return Ok(StateRef::Name(w));
                }
                if allow_name {
                    Err(SuiteErrorKind::UnknownAttribute(w))
                } else {
                    syntax(format!("`{w}` is neither an influence group nor an attribute key"))
                }
            }
            _ => syntax("expected an influence group or attribute key"),
        }
    }

    fn state_values_ok(&self, target: &StateRef, values: &[String]) -> PResult<()> {
        let attr = match target {
            StateRef::Group(g) => self.case.influence_group(g).map(|i| i.attr.as_str()),
            other => other.attr(),
        };
        match attr {
            Some(a) => self.check_values(a, values),
            None => Ok(()),
        }
    }

    fn state_predicate(&self, cur: &mut Cursor) -> PResult<Predicate<StateAtom>> {
        cur.predicate(&mut |c: &mut Cursor| {
            let quant = if c.peek_word("all") && c.peek_at(1).is_some_and(|t| !matches!(t, Tok::Eq | Tok::Ne)) {
                c.pos += 1;
                Some(Quantifier::All)
            } else if c.peek_word("any") && c.peek_at(1).is_some_and(|t| !matches!(t, Tok::Eq | Tok::Ne)) {
                c.pos += 1;
                Some(Quantifier::Any)
            } else {
                None
            };
            let tok = c.next().ok_or_else(|| SuiteErrorKind::Syntax("expected a state reference".into()))?;
            let target = self.state_ref(tok, false, true)?;
            if quant.is_some() && !matches!(target, StateRef::Group(_)) {
                return syntax("`all`/`any` apply to influence groups only");
            }
            let op = c.op()?;
            let values = c.literals()?;
            check_arity(op, values.len())?;
            self.state_values_ok(&target, &values)?;
            Ok(StateAtom { quant, target, op, values })
        })
    }

    fn line(&mut self, head: &str, cur: &mut Cursor) -> PResult<()> {
        match head {
            "bind" => {
                let var = cur.word("variable name")?;
                if self.case.binding(&var).is_some() {
                    return Err(SuiteErrorKind::DuplicateVariable(var));
                }
                cur.expect(Tok::Colon, "`:`")?;
                let selector = cur.selector()?;
                cur.end()?;
                self.validate(&selector)?;
                self.case.bindings.push(Binding { var, selector });
            }
            "influence" => {
                let name = cur.word("influence group name")?;
                if self.case.influence_group(&name).is_some() {
                    return Err(SuiteErrorKind::DuplicateVariable(name));
                }
                cur.expect(Tok::Eq, "`=`")?;
                let attr = cur.word("attribute name")?;
                if !cur.peek_word("of") {
                    return syntax("expected `of`");
                }
                cur.pos += 1;
                let target = cur.selector()?;
                let domain = if cur.eat(&Tok::Colon) { Some(cur.literals()?) } else { None };
                cur.end()?;
                self.validate(&target)?;
                if !target.may_have_attribute(self.db, &attr) {
                    return Err(SuiteErrorKind::UnknownAttribute(attr));
                }
                if let Some(d) = &domain {
                    self.check_values(&attr, d)?;
                }
                self.case.influence.push(InfluenceVarDecl { name, attr, target, domain });
            }
            "state_in" => {
                let p = self.state_predicate(cur)?;
                cur.end()?;
                self.case.state_in = match std::mem::replace(&mut self.case.state_in, Predicate::True) {
                    Predicate::True => p,
                    Predicate::And(mut ps) => {
                        ps.push(p);
                        Predicate::And(ps)
                    }
                    prev => Predicate::And(vec![prev, p]),
                };
            }
            "input" => {
                let sensors = Selector::new(EntityClass::Sensor, cur.entity_predicate()?);
                cur.expect(Tok::Colon, "`:` before input values")?;
                let mut alternatives = vec![Vec::new()];
                loop {
                    match cur.next() {
                        None => break,
                        Some(Tok::Pipe) => alternatives.push(Vec::new()),
                        Some(Tok::Word(w)) => alternatives.last_mut().unwrap().push(ValueExpr::Literal(w)),
                        Some(Tok::Var(v)) => {
                            self.require_bound(&v)?;
                            alternatives.last_mut().unwrap().push(ValueExpr::Entity(v));
                        }
                        Some(t) => return syntax(format!("unexpected {t:?} in input value")),
                    }
                }
                if alternatives.iter().any(Vec::is_empty) {
                    return syntax("empty input value");
                }
                self.validate(&sensors)?;
                self.case.inputs.push(InputSpec { sensors, alternatives });
            }
            "output" => {
                let actuators = Selector::new(EntityClass::Actuator, cur.entity_predicate()?);
                cur.expect(Tok::Colon, "`:` before the expected output")?;
                let attr = cur.word("attribute name")?;
                let op = cur.op()?;
                let values = cur.value_exprs()?;
                check_arity(op, values.len())?;
                cur.end()?;
                self.validate(&actuators)?;
                if !actuators.may_have_attribute(self.db, &attr) {
                    return Err(SuiteErrorKind::UnknownAttribute(attr));
                }
                for v in &values {
                    match v {
                        ValueExpr::Literal(l) => self.check_values(&attr, std::slice::from_ref(l))?,
                        other => self.require_bound(other.variable().unwrap_or_default())?,
                    }
                }
                self.case.outputs.push(OutputSpec { actuators, attr, op, values });
            }
            "state_out" => {
                let tok = cur.next().ok_or_else(|| SuiteErrorKind::Syntax("expected an attribute".into()))?;
                let target = self.state_ref(tok, true, false)?;
                let op = cur.op()?;
                let values = cur.literals()?;
                check_arity(op, values.len())?;
                cur.end()?;
                self.state_values_ok(&target, &values)?;
                self.case.state_out.push(StateOutSpec { target, op, values });
            }
            "cycles" => {
                let n = cur.word("cycle count")?;
                cur.end()?;
                if self.cycles_set {
                    return syntax("`cycles` given twice");
                }
                self.case.cycles =
                    n.parse().map_err(|_| SuiteErrorKind::Syntax(format!("invalid cycle count `{n}`")))?;
                self.cycles_set = true;
            }
            "reject" => {
                let var = cur.word("variable")?;
                cur.end()?;
                match self.case.binding(&var) {
                    None => return Err(SuiteErrorKind::UnboundVariable(var)),
                    Some(b) if b.selector.class != EntityClass::Logic => {
                        return syntax(format!("`reject {var}`: only logic processes can refuse a command"))
                    }
                    Some(_) => {}
                }
                if !self.case.reject.contains(&var) {
                    self.case.reject.push(var);
                }
            }
            "condition" => {
                let class = cur.word("condition class")?;
                if !is_condition_class(&class) {
                    return Err(SuiteErrorKind::UnknownConditionClass(class));
                }
                let when = if cur.peek_word("when") {
                    cur.pos += 1;
                    Some(self.state_predicate(cur)?)
                } else {
                    None
                };
                cur.end()?;
                self.case.conditions.push(ConditionSpec { class, when });
            }
            other => return syntax(format!("unknown directive `{other}`")),
        }
        Ok(())
    }
}

/// Parses an `.atest` document and resolves it against a configuration.
/// Returns the suite together with warnings for vacuous bindings.
pub fn parse_suite(
    document: &str,
    db: &ConfigurationDatabase,
) -> Result<(AbstractSuite, Vec<SuiteWarning>), SuiteError> {
    let mut suite = AbstractSuite::default();
    for decl in db.logic() {
        suite.logic_entities.insert(decl.id.clone());
        for a in &decl.attributes {
            suite.logic_initial.entry(a.attr.clone()).or_default().insert(a.initial.clone());
        }
    }

    let mut current: Option<(usize, CaseBuilder)> = None;
    for (n, raw) in document.lines().enumerate() {
        let line = n + 1;
        let err = |kind| SuiteError { line, kind };
        let toks = lex(raw).map_err(|m| err(SuiteErrorKind::Syntax(m)))?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks, pos: 0 };
        let head = cur.word("a directive").map_err(err)?;
        match (head.as_str(), current.as_mut()) {
            ("test", None) => {
                let name = cur.word("test name").map_err(err)?;
                if suite.case(&name).is_some() {
                    return Err(err(SuiteErrorKind::DuplicateCase(name)));
                }
                let mut conditions = Vec::new();
                while cur.peek_word("condition") {
                    cur.pos += 1;
                    cur.expect(Tok::Eq, "`=` after `condition`").map_err(err)?;
                    let class = cur.word("condition class").map_err(err)?;
                    if !is_condition_class(&class) {
                        return Err(err(SuiteErrorKind::UnknownConditionClass(class)));
                    }
                    conditions.push(ConditionSpec { class, when: None });
                }
                cur.end().map_err(err)?;
                current = Some((
                    line,
                    CaseBuilder {
                        db,
                        case: AbstractTestCase {
                            name,
                            bindings: Vec::new(),
                            influence: Vec::new(),
                            state_in: Predicate::True,
                            inputs: Vec::new(),
                            outputs: Vec::new(),
                            state_out: Vec::new(),
                            cycles: DEFAULT_SETTLE_CYCLES,
                            reject: Vec::new(),
                            conditions,
                        },
                        cycles_set: false,
                    },
                ));
            }
            ("test", Some(_)) => return Err(err(SuiteErrorKind::Syntax("`test` inside an open test; missing `end`".into()))),
            ("end", Some(_)) => {
                cur.end().map_err(err)?;
                let (_, builder) = current.take().expect("open case");
                suite.cases.push(builder.case);
            }
            (_, None) => return Err(err(SuiteErrorKind::Syntax(format!("`{head}` outside a test case")))),
            (_, Some((_, builder))) => builder.line(&head, &mut cur).map_err(err)?,
        }
    }
    if let Some((line, _)) = current {
        return Err(SuiteError { line, kind: SuiteErrorKind::Syntax("test case not closed with `end`".into()) });
    }

    let mut warnings = Vec::new();
    for case in &suite.cases {
        if let Some(var) = vacuous_binding(case, db) {
            warnings.push(SuiteWarning::Vacuous { case: case.name.clone(), var });
        }
    }
    Ok((suite, warnings))
}

/// First binding variable at which the binding product becomes empty.
fn vacuous_binding(case: &AbstractTestCase, db: &ConfigurationDatabase) -> Option<String> {
    for n in 1..=case.bindings.len() {
        let prefix = AbstractTestCase { bindings: case.bindings[..n].to_vec(), ..case.clone() };
        if enumerate_bindings(&prefix, db).is_empty() {
            return Some(case.bindings[n - 1].var.clone());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::t2;
    use crate::config::EntityId;

    pub(crate) const NOMINAL: &str = "\
test nominal condition=formation
  bind r : logic kind=Route
  influence tcs = status of sensor kind=TrackCircuit and assoc(r)
  influence spc = control of actuator kind=SwitchPoint and assoc(r)
  influence lsc = control of actuator kind=LightSignal and assoc(r)
  state_in all tcs = Clear and all spc = Controlled and all lsc = Controlled
  input kind=MMI : FormRoute $r
  output kind=SwitchPoint and assoc(r) : position = required(r)
  output kind=LightSignal and assoc(r) : aspect = Green
  state_out Route_Status_$r = Set_OK
end
";

    #[test]
    fn nominal_formation_case() {
        let db = t2();
        let (suite, warnings) = parse_suite(NOMINAL, &db).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(suite.cases.len(), 1);
        let case = &suite.cases[0];
        assert_eq!(case.bindings.len(), 1);
        assert_eq!(case.influence.len(), 3);
        assert_eq!(case.inputs.len(), 1);
        assert_eq!(case.outputs.len(), 2);
        assert_eq!(case.cycles, DEFAULT_SETTLE_CYCLES);
        assert_eq!(
            case.state_out,
            vec![StateOutSpec {
                target: StateRef::Key { attr: "Route_Status".into(), owner: OwnerRef::Var("r".into()) },
                op: Op::Eq,
                values: vec!["Set_OK".into()],
            }]
        );
        assert_eq!(case.conditions[0].class, "formation");
        assert!(matches!(&case.state_in, Predicate::And(v) if v.len() == 3));
    }

    #[test]
    fn unknown_attribute_on_light_signal() {
        let doc = "test t\n  bind r : logic kind=Route\n  output kind=LightSignal and assoc(r) : colour = Red\nend\n";
        let err = parse_suite(doc, &t2()).unwrap_err();
        assert_eq!(err, SuiteError { line: 3, kind: SuiteErrorKind::UnknownAttribute("colour".into()) });
    }

    #[test]
    fn vacuous_binding_warns() {
        let doc = "test lines\n  bind x : logic kind=Line\nend\n";
        let (suite, warnings) = parse_suite(doc, &t2()).unwrap();
        assert_eq!(suite.cases.len(), 1);
        assert_eq!(warnings, vec![SuiteWarning::Vacuous { case: "lines".into(), var: "x".into() }]);
    }

    #[test]
    fn unbound_variables() {
        let db = t2();
        let doc = "test t\n  output kind=LightSignal and assoc(r) : aspect = Red\nend\n";
        assert_eq!(parse_suite(doc, &db).unwrap_err().kind, SuiteErrorKind::UnboundVariable("r".into()));
        let doc = "test t\n  state_out Route_Status_$q = Idle\nend\n";
        assert_eq!(parse_suite(doc, &db).unwrap_err().kind, SuiteErrorKind::UnboundVariable("q".into()));
        let doc = "test t\n  input kind=MMI : FormRoute $r\nend\n";
        assert_eq!(parse_suite(doc, &db).unwrap_err().kind, SuiteErrorKind::UnboundVariable("r".into()));
    }

    #[test]
    fn unknown_kind_and_domain_typos() {
        let db = t2();
        let doc = "test t\n  bind r : logic kind=Rout\nend\n";
        let err = parse_suite(doc, &db).unwrap_err();
        assert_eq!(err, SuiteError { line: 2, kind: SuiteErrorKind::UnknownKind("Rout".into()) });
        let doc = "test t\n  bind r : logic kind=Route\n  influence tcs = status of sensor assoc(r)\n  state_in all tcs = Clean\nend\n";
        assert_eq!(
            parse_suite(doc, &db).unwrap_err().kind,
            SuiteErrorKind::DomainViolation { attr: "status".into(), value: "Clean".into() }
        );
    }

    #[test]
    fn structural_errors() {
        let db = t2();
        assert!(matches!(parse_suite("bind r : logic\n", &db).unwrap_err().kind, SuiteErrorKind::Syntax(_)));
        assert_eq!(parse_suite("test a\n", &db).unwrap_err().line, 1);
        assert_eq!(
            parse_suite("test a\nend\ntest a\nend\n", &db).unwrap_err().kind,
            SuiteErrorKind::DuplicateCase("a".into())
        );
        assert_eq!(
            parse_suite("test a condition=teleport\nend\n", &db).unwrap_err().kind,
            SuiteErrorKind::UnknownConditionClass("teleport".into())
        );
        assert!(matches!(
            parse_suite("test a\n  bind r : logic\n  bind r : sensor\nend\n", &db).unwrap_err().kind,
            SuiteErrorKind::DuplicateVariable(_)
        ));
    }

    #[test]
    fn lexer_recognises_key_patterns() {
        assert_eq!(
            lex("state_out Route_Status_$r != Idle # c").unwrap(),
            vec![
                Tok::Word("state_out".into()),
                Tok::KeyPattern("Route_Status".into(), "r".into()),
                Tok::Ne,
                Tok::Word("Idle".into()),
            ]
        );
        assert!(lex("a ; b").is_err());
    }

    #[test]
    fn concrete_keys_and_names() {
        let db = t2();
        let doc = "test t\n  state_in Route_Status_routeA = Set_OK\n  state_out Route_Status = Occupied\nend\n";
        let (suite, _) = parse_suite(doc, &db).unwrap();
        let case = &suite.cases[0];
        assert_eq!(
            case.requirements(),
            vec![Requirement {
                attr: "Route_Status".into(),
                owner: OwnerRef::Entity(EntityId::new("routeA")),
                value: "Set_OK".into()
            }]
        );
        assert_eq!(case.state_out[0].target, StateRef::Name("Route_Status".into()));
    }
}
