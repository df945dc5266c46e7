use std::collections::BTreeMap;

use super::check::{check_actuators, check_output_state_recorded, CheckError, CheckOutcome};
use super::{CheckFailure, RunReport, StateSnapshot, SutContract, SutError, Tallies, TestResult, Verdict};
use crate::config::{AttributeKey, ConfigurationDatabase, EntityId};
use crate::coverage::CoverageLedger;
use crate::instantiate::{ExpectedVerdict, InputStep, PhysicalTest, Stimulus, TestPlan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Stop after the first Failed or Error verdict. Forces one worker.
    pub fail_fast: bool,
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { fail_fast: false, workers: 1 }
    }
}

fn apply(sut: &mut dyn SutContract, s: &Stimulus) -> Result<(), SutError> {
    match s {
        Stimulus::Inject { key, value } => sut.inject(key, value),
        Stimulus::Stimulate { sensor, value } => sut.stimulate(sensor, value),
    }
}

/// Attributes a rejecting logic process must leave untouched: its own and
/// those of its actuators.
fn guarded_keys(db: &ConfigurationDatabase, logic: &EntityId) -> Vec<AttributeKey> {
    let mut owners = vec![logic.clone()];
    owners.extend(db.actuators_of(logic).map(|a| a.actuator.clone()));
    owners
        .iter()
        .filter_map(|o| db.entity(o))
        .flat_map(|d| d.attributes.iter().map(|a| d.key(&a.attr)))
        .collect()
}

fn rejection_checks(db: &ConfigurationDatabase, logic: &[EntityId], before: &StateSnapshot, after: &StateSnapshot) -> Vec<CheckOutcome> {
    logic
        .iter()
        .map(|lp| {
            let changed: Vec<String> = guarded_keys(db, lp)
                .into_iter()
                .filter(|k| before.get(k) != after.get(k))
                .map(|k| format!("{}={}", k, after.get(&k).unwrap_or("?")))
                .collect();
            CheckOutcome {
                check: format!("rejected {lp}"),
                expected: "unchanged".into(),
                observed: if changed.is_empty() { "unchanged".into() } else { changed.join(",") },
                passed: changed.is_empty(),
            }
        })
        .collect()
}

enum Outcome {
    Checks(Vec<CheckOutcome>),
    Sut(SutError),
    Check(CheckError),
}

fn execute(test: &PhysicalTest, db: &ConfigurationDatabase, sut: &mut dyn SutContract, ledger: &mut CoverageLedger) -> Outcome {
    sut.reset();
    let steps = test.preamble.steps.iter().cloned().chain(test.injections().map(InputStep::Apply));
    for step in steps {
        let r = match &step {
            InputStep::Apply(s) => apply(sut, s),
            InputStep::Cycle(n) => {
                sut.cycle(*n);
                Ok(())
            }
        };
        if let Err(e) = r {
            return Outcome::Sut(e);
        }
    }
    let before = match test.expected_verdict {
        ExpectedVerdict::RejectExpected { .. } => Some(sut.snapshot()),
        ExpectedVerdict::Pass => None,
    };
    for s in test.stimuli() {
        if let Err(e) = apply(sut, &s) {
            return Outcome::Sut(e);
        }
    }
    if test.settle_cycles > 0 {
        sut.cycle(test.settle_cycles);
    }
    let after = sut.snapshot();

    let mut outcomes = match check_actuators(&test.actuator_checks, &after) {
        Ok(o) => o,
        Err(e) => return Outcome::Check(e),
    };
    match check_output_state_recorded(&test.state_checks, &after, db, test, ledger) {
        Ok(o) => outcomes.extend(o),
        Err(e) => return Outcome::Check(e),
    }
    if let (ExpectedVerdict::RejectExpected { logic }, Some(before)) = (&test.expected_verdict, &before) {
        outcomes.extend(rejection_checks(db, logic, before, &after));
    }
    Outcome::Checks(outcomes)
}

/// Runs one test from reset. Returns the result, the coverage it produced
/// and whether the output-state strategies diverged.
pub fn run_test(test: &PhysicalTest, db: &ConfigurationDatabase, sut: &mut dyn SutContract) -> (TestResult, CoverageLedger, bool) {
    let mut ledger = CoverageLedger::default();
    let outcome = execute(test, db, sut, &mut ledger);
    let cycles = sut.snapshot().cycle;
    ledger.merge(sut.take_coverage());
    let mut result = TestResult {
        id: test.id.clone(),
        verdict: Verdict::Error,
        checks: 0,
        failures: Vec::new(),
        cycles,
        error: None,
    };
    let mut diverged = false;
    match outcome {
        Outcome::Sut(e) => result.error = Some(e.to_string()),
        Outcome::Check(e) => {
            diverged = matches!(e, CheckError::StrategyDivergence { .. });
            result.error = Some(e.to_string());
        }
        Outcome::Checks(outcomes) => {
            result.checks = outcomes.len();
            result.failures = outcomes
                .into_iter()
                .filter(|o| !o.passed)
                .map(|o| CheckFailure { check: o.check, expected: o.expected, observed: o.observed })
                .collect();
            result.verdict = if result.checks == 0 {
                Verdict::Vacuous
            } else if result.failures.is_empty() {
                Verdict::Passed
            } else {
                Verdict::Failed
            };
        }
    }
    (result, ledger, diverged)
}

fn report(plan: &TestPlan, results: Vec<TestResult>, coverage: CoverageLedger, divergences: usize, aborted: bool) -> RunReport {
    RunReport {
        station: plan.station_name.clone(),
        plan_fingerprint: plan.fingerprint(),
        tallies: Tallies::of(&results),
        results,
        divergences,
        aborted,
        coverage,
    }
}

/// Runs every test in plan order on one system under test.
pub fn run_plan(plan: &TestPlan, db: &ConfigurationDatabase, sut: &mut dyn SutContract, options: &RunOptions) -> RunReport {
    let mut results = Vec::with_capacity(plan.tests.len());
    let mut coverage = CoverageLedger::default();
    let mut divergences = 0;
    let mut aborted = false;
    for test in &plan.tests {
        let (result, ledger, diverged) = run_test(test, db, sut);
        coverage.merge(ledger);
        divergences += usize::from(diverged);
        let stop = options.fail_fast && matches!(result.verdict, Verdict::Failed | Verdict::Error);
        results.push(result);
        if stop {
            aborted = results.len() < plan.tests.len();
            break;
        }
    }
    report(plan, results, coverage, divergences, aborted)
}

type TestRun = (TestResult, CoverageLedger, bool);

/// Shards the plan over `options.workers` threads, each owning a system
/// built by `make_sut`. Results come back in plan order.
pub fn run_plan_parallel<S, F>(plan: &TestPlan, db: &ConfigurationDatabase, make_sut: F, options: &RunOptions) -> RunReport
where
    S: SutContract,
    F: Fn() -> S + Sync,
{
    let workers = options.workers.max(1).min(plan.tests.len().max(1));
    if workers == 1 || options.fail_fast {
        let mut sut = make_sut();
        return run_plan(plan, db, &mut sut, options);
    }
    let chunk = plan.tests.len().div_ceil(workers);
    let shards: Vec<(usize, Vec<TestRun>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .tests
            .chunks(chunk)
            .enumerate()
            .map(|(i, tests)| {
                let make_sut = &make_sut;
                scope.spawn(move || {
                    let mut sut = make_sut();
                    (i, tests.iter().map(|t| run_test(t, db, &mut sut)).collect())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let ordered: BTreeMap<usize, _> = shards.into_iter().collect();
    let mut results = Vec::with_capacity(plan.tests.len());
    let mut coverage = CoverageLedger::default();
    let mut divergences = 0;
    for (result, ledger, diverged) in ordered.into_values().flatten() {
        coverage.merge(ledger);
        divergences += usize::from(diverged);
        results.push(result);
    }
    report(plan, results, coverage, divergences, false)
}
