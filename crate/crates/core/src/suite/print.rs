//! Canonical `.atest` rendering. Parsing the output against the same
//! configuration yields a structurally equal suite.

use std::fmt;

use super::ast::*;
use crate::predicate::Predicate;

impl fmt::Display for OwnerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwnerRef::Var(v) => write!(f, "${v}"),
            OwnerRef::Entity(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateRef::Group(g) => f.write_str(g),
            StateRef::Key { attr, owner } => write!(f, "{attr}_{owner}"),
            StateRef::Name(n) => f.write_str(n),
        }
    }
}

impl fmt::Display for StateAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.quant {
            Some(Quantifier::All) => f.write_str("all ")?,
            Some(Quantifier::Any) => f.write_str("any ")?,
            None => {}
        }
        write!(f, "{} {} {}", self.target, self.op, self.values.join("|"))
    }
}

fn predicate_clause<A: fmt::Display>(p: &Predicate<A>) -> String {
    match p {
        Predicate::True => String::new(),
        p => format!(" {p}"),
    }
}

impl fmt::Display for AbstractTestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "test {}", self.name)?;
        for b in &self.bindings {
            writeln!(f, "  bind {} : {}", b.var, b.selector)?;
        }
        for i in &self.influence {
            write!(f, "  influence {} = {} of {}", i.name, i.attr, i.target)?;
            if let Some(d) = &i.domain {
                write!(f, " : {}", d.join("|"))?;
            }
            writeln!(f)?;
        }
        if self.state_in != Predicate::True {
            writeln!(f, "  state_in {}", self.state_in)?;
        }
        for input in &self.inputs {
            let alts: Vec<String> = input
                .alternatives
                .iter()
                .map(|words| words.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                .collect();
            writeln!(f, "  input{} : {}", predicate_clause(&input.sensors.predicate), alts.join(" | "))?;
        }
        for o in &self.outputs {
            let vals: Vec<String> = o.values.iter().map(ToString::to_string).collect();
            writeln!(
                f,
                "  output{} : {} {} {}",
                predicate_clause(&o.actuators.predicate),
                o.attr,
                o.op,
                vals.join("|")
            )?;
        }
        for s in &self.state_out {
            writeln!(f, "  state_out {} {} {}", s.target, s.op, s.values.join("|"))?;
        }
        writeln!(f, "  cycles {}", self.cycles)?;
        for r in &self.reject {
            writeln!(f, "  reject {r}")?;
        }
        for c in &self.conditions {
            match &c.when {
                Some(w) => writeln!(f, "  condition {} when {w}", c.class)?,
                None => writeln!(f, "  condition {}", c.class)?,
            }
        }
        writeln!(f, "end")
    }
}

impl fmt::Display for AbstractSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, case) in self.cases.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{case}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::config::fixtures::t2;
    use crate::suite::parse_suite;

    #[test]
    fn print_then_reparse_is_identity() {
        let db = t2();
        let doc = "\
test conflict
  bind r : logic kind=Route
  bind s : logic kind=Route and shares(r, SwitchPoint) and not (id = $r or kind != Route)
  influence tcs = status of sensor kind=TrackCircuit and assoc(r) : Clear|Occupied
  state_in Route_Status_$s = Set_OK and (any tcs in Occupied|Broken or not all tcs != Clear)
  input kind=MMI : FormRoute $r | FormRoute $s
  input kind=TrackCircuit and assoc(s) : Occupied
  output kind=SwitchPoint : position in Straight|required(r)
  state_out Route_Status_$r = Idle
  state_out Route_Status != Occupied
  cycles 3
  reject r
  condition sp_locked_conflict when all tcs = Clear
  condition formation
end
";
        let (first, _) = parse_suite(doc, &db).unwrap();
        let printed = first.to_string();
        let (second, _) = parse_suite(&printed, &db).unwrap();
        assert_eq!(first, second);
        assert_eq!(printed, second.to_string());
    }
}
