use std::collections::BTreeSet;

use super::ast::AbstractSuite;
use super::Unorderable;

/// Reorders the cases so that every case's logic-state prerequisites are
/// either true in the initial state or established by the output state of a
/// case placed before it. Among cases that are free to go, input order is
/// kept.
pub fn order_suite(suite: &AbstractSuite) -> Result<AbstractSuite, Unorderable> {
    let mut remaining: Vec<usize> = (0..suite.cases.len()).collect();
    let mut established: BTreeSet<(String, String)> = BTreeSet::new();
    let mut order = Vec::with_capacity(remaining.len());

    while !remaining.is_empty() {
        let ready = remaining.iter().position(|&i| {
            let case = &suite.cases[i];
            suite
                .open_requirements(case)
                .iter()
                .all(|r| established.contains(&(r.attr.clone(), r.value.clone())))
        });
        match ready {
            Some(pos) => {
                let i = remaining.remove(pos);
                established.extend(suite.cases[i].establishes());
                order.push(i);
            }
            None => {
                return Err(Unorderable { cases: remaining.iter().map(|&i| suite.cases[i].name.clone()).collect() });
            }
        }
    }

    Ok(AbstractSuite {
        cases: order.into_iter().map(|i| suite.cases[i].clone()).collect(),
        logic_initial: suite.logic_initial.clone(),
        logic_entities: suite.logic_entities.clone(),
    })
}
