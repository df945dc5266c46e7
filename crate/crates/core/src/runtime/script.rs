//! `.pts` test scripts: one file per physical test, plus the plan manifest.
//!
//! ```text
//! TEST nominal#routeA#0#0 FROM nominal BIND r=routeA
//! CONDITION formation
//! RESET
//! PHASE preamble
//! PHASE setup
//! INJECT status_tc1 Clear
//! PHASE stimuli
//! STIMULATE mmi FormRoute routeA
//! CYCLE 2
//! PHASE actuators
//! EXPECT position_sp1 = Straight
//! PHASE state
//! EXPECT Route_Status_routeA = Set_OK
//! END
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{run_test, SutContract, TestResult};
use crate::config::{AttributeKey, ConfigurationDatabase, EntityId};
use crate::instantiate::{
    script_name, ActuatorCheck, ExpectedVerdict, InputSequence, InputStep, PhysicalTest, StateCheck, Stimulus,
    SystemStateAssignment, TestPlan,
};
use crate::predicate::{Op, ValuePredicate};

pub const MANIFEST: &str = "plan.manifest";

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
}

fn expect_line(out: &mut String, target: &str, p: &ValuePredicate) {
    let _ = writeln!(out, "EXPECT {target} {} {}", p.op, p.values.join("|"));
}

fn stimulus_line(out: &mut String, s: &Stimulus) {
    let _ = match s {
        Stimulus::Inject { key, value } => writeln!(out, "INJECT {key} {value}"),
        Stimulus::Stimulate { sensor, value } => writeln!(out, "STIMULATE {sensor} {value}"),
    };
}

pub fn write_script(test: &PhysicalTest) -> String {
    let mut out = format!("TEST {} FROM {}", test.id, test.source_case);
    if !test.binding.is_empty() {
        out.push_str(" BIND");
        for (v, e) in &test.binding {
            let _ = write!(out, " {v}={e}");
        }
    }
    out.push('\n');
    for c in &test.conditions {
        let _ = writeln!(out, "CONDITION {c}");
    }
    out.push_str("RESET\nPHASE preamble\n");
    for step in &test.preamble.steps {
        match step {
            InputStep::Apply(s) => stimulus_line(&mut out, s),
            InputStep::Cycle(n) => {
                let _ = writeln!(out, "CYCLE {n}");
            }
        }
    }
    out.push_str("PHASE setup\n");
    for s in test.injections() {
        stimulus_line(&mut out, &s);
    }
    out.push_str("PHASE stimuli\n");
    for s in test.stimuli() {
        stimulus_line(&mut out, &s);
    }
    if test.settle_cycles > 0 {
        let _ = writeln!(out, "CYCLE {}", test.settle_cycles);
    }
    out.push_str("PHASE actuators\n");
    for c in &test.actuator_checks {
        expect_line(&mut out, &c.key().rendered(), &c.expected);
    }
    out.push_str("PHASE state\n");
    for c in &test.state_checks {
        let target = match &c.owner {
            Some(o) => AttributeKey::new(o.clone(), c.attr.clone()).rendered(),
            None => c.attr.clone(),
        };
        expect_line(&mut out, &target, &c.expected);
    }
    if let ExpectedVerdict::RejectExpected { logic } = &test.expected_verdict {
        for lp in logic {
            let _ = writeln!(out, "EXPECT_REJECTED {lp}");
        }
    }
    out.push_str("END\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Header,
    Preamble,
    Setup,
    Stimuli,
    Actuators,
    State,
    Done,
}

/// Parses one script. Attribute keys are split against `db`; a state
/// expectation that is not a declared key is an unqualified attribute name.
pub fn parse_script(text: &str, db: &ConfigurationDatabase) -> Result<PhysicalTest, ScriptError> {
    parse_named(text, db, "<script>")
}

fn parse_named(text: &str, db: &ConfigurationDatabase, file: &str) -> Result<PhysicalTest, ScriptError> {
    let mut test = PhysicalTest {
        id: String::new(),
        source_case: String::new(),
        binding: Vec::new(),
        preamble: InputSequence::default(),
        state_setup: SystemStateAssignment::default(),
        stimuli: Vec::new(),
        settle_cycles: 0,
        actuator_checks: Vec::new(),
        state_checks: Vec::new(),
        expected_verdict: ExpectedVerdict::Pass,
        conditions: Vec::new(),
    };
    let mut rejected: Vec<EntityId> = Vec::new();
    let mut phase = Phase::Header;
    let mut seen_test = false;

    for (n, raw) in text.lines().enumerate() {
        let err = |message: String| ScriptError::Syntax { file: file.to_string(), line: n + 1, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if phase == Phase::Done {
            return Err(err("content after END".into()));
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let key = |tok: &str| db.resolve_key(tok).cloned().ok_or_else(|| err(format!("unknown attribute key `{tok}`")));
        let predicate = |w: &[&str]| -> Result<ValuePredicate, ScriptError> {
            match w {
                [op, values] => {
                    let op = Op::parse(op).ok_or_else(|| err(format!("unknown operator `{op}`")))?;
                    Ok(ValuePredicate { op, values: values.split('|').map(str::to_string).collect() })
                }
                _ => Err(err("expected `<op> <values>`".into())),
            }
        };
        match (words[0], phase) {
            ("TEST", Phase::Header) if !seen_test => {
                seen_test = true;
                match &words[1..] {
                    [id, "FROM", case, rest @ ..] => {
                        test.id = id.to_string();
                        test.source_case = case.to_string();
                        match rest {
                            [] => {}
                            ["BIND", binds @ ..] if !binds.is_empty() => {
                                for b in binds {
                                    let (v, e) = b.split_once('=').ok_or_else(|| err(format!("bad binding `{b}`")))?;
                                    test.binding.push((v.to_string(), EntityId::from(e)));
                                }
                            }
                            _ => return Err(err("expected `BIND <var>=<entity>...`".into())),
                        }
                    }
                    _ => return Err(err("expected `TEST <id> FROM <case>`".into())),
                }
            }
            ("CONDITION", Phase::Header) if seen_test => match &words[1..] {
                [c] => test.conditions.push(c.to_string()),
                _ => return Err(err("expected `CONDITION <class>`".into())),
            },
            ("RESET", Phase::Header) if seen_test => {}
            ("PHASE", _) => {
                let next = match words.get(1..) {
                    Some(["preamble"]) => Phase::Preamble,
                    Some(["setup"]) => Phase::Setup,
                    Some(["stimuli"]) => Phase::Stimuli,
                    Some(["actuators"]) => Phase::Actuators,
                    Some(["state"]) => Phase::State,
                    _ => return Err(err(format!("unknown phase in `{line}`"))),
                };
                if (next as u8) <= (phase as u8) || !seen_test {
                    return Err(err("phases out of order".into()));
                }
                phase = next;
            }
            ("INJECT", Phase::Preamble | Phase::Setup) => {
                let [_, k, v] = words[..] else { return Err(err("expected `INJECT <key> <value>`".into())) };
                let (k, v) = (key(k)?, v.to_string());
                if phase == Phase::Preamble {
                    test.preamble.steps.push(InputStep::Apply(Stimulus::Inject { key: k, value: v }));
                } else {
                    test.state_setup.assignments.push((k, v));
                }
            }
            ("STIMULATE", Phase::Preamble | Phase::Stimuli) if words.len() >= 3 => {
                let sensor = EntityId::from(words[1]);
                let value = words[2..].join(" ");
                if phase == Phase::Preamble {
                    test.preamble.steps.push(InputStep::Apply(Stimulus::Stimulate { sensor, value }));
                } else {
                    test.stimuli.push((sensor, value));
                }
            }
            ("CYCLE", Phase::Preamble | Phase::Stimuli) => {
                let n: u32 = match words[1..] {
                    [n] => n.parse().map_err(|_| err(format!("bad cycle count `{n}`")))?,
                    _ => return Err(err("expected `CYCLE <n>`".into())),
                };
                if phase == Phase::Preamble {
                    test.preamble.steps.push(InputStep::Cycle(n));
                } else {
                    test.settle_cycles += n;
                }
            }
            ("EXPECT", Phase::Actuators) if words.len() >= 2 => {
                let k = key(words[1])?;
                test.actuator_checks.push(ActuatorCheck { entity: k.owner, attr: k.attr, expected: predicate(&words[2..])? });
            }
            ("EXPECT", Phase::State) if words.len() >= 2 => {
                let expected = predicate(&words[2..])?;
                let check = match db.resolve_key(words[1]) {
                    Some(k) => StateCheck { attr: k.attr.clone(), owner: Some(k.owner.clone()), expected },
                    None => StateCheck { attr: words[1].to_string(), owner: None, expected },
                };
                test.state_checks.push(check);
            }
            ("EXPECT_REJECTED", Phase::State) => match words[1..] {
                [lp] => rejected.push(EntityId::from(lp)),
                _ => return Err(err("expected `EXPECT_REJECTED <logic>`".into())),
            },
            ("END", Phase::State) => phase = Phase::Done,
            _ => return Err(err(format!("unexpected `{line}`"))),
        }
    }
    if phase != Phase::Done {
        return Err(ScriptError::Syntax { file: file.to_string(), line: text.lines().count(), message: "missing END".into() });
    }
    if !rejected.is_empty() {
        test.expected_verdict = ExpectedVerdict::RejectExpected { logic: rejected };
    }
    Ok(test)
}

/// Parses a script and runs it from reset.
pub fn replay_script(text: &str, db: &ConfigurationDatabase, sut: &mut dyn SutContract) -> Result<TestResult, ScriptError> {
    let test = parse_script(text, db)?;
    Ok(run_test(&test, db, sut).0)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> ScriptError + '_ {
    move |source| ScriptError::Io { path: path.display().to_string(), source }
}

/// Writes one script per test and the manifest into `dir`, returning the
/// manifest text.
pub fn emit_scripts(plan: &TestPlan, dir: &Path) -> Result<String, ScriptError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    for (i, t) in plan.tests.iter().enumerate() {
        let path = dir.join(script_name(i));
        fs::write(&path, write_script(t)).map_err(io_error(&path))?;
    }
    let cases: Vec<String> = plan.case_counts().into_iter().map(|(c, _)| c).collect();
    let manifest = plan.manifest(&cases);
    let path = dir.join(MANIFEST);
    fs::write(&path, &manifest).map_err(io_error(&path))?;
    Ok(manifest)
}

/// Rebuilds a plan from a directory written by [`emit_scripts`].
pub fn load_scripts(dir: &Path, db: &ConfigurationDatabase) -> Result<TestPlan, ScriptError> {
    let path = dir.join(MANIFEST);
    let manifest = fs::read_to_string(&path).map_err(io_error(&path))?;
    let mut station = None;
    let mut suite = None;
    let mut fingerprint = None;
    let mut count = None;
    let mut tests = Vec::new();
    for line in manifest.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[..] {
            ["station", s] => station = Some(s.to_string()),
            ["suite", s] => suite = Some(s.to_string()),
            ["plan", s] => fingerprint = Some(s.to_string()),
            ["tests", n] => count = n.parse::<usize>().ok(),
            ["case", _, _] => {}
            ["test", id, _, _, script] => {
                let path = dir.join(script);
                let text = fs::read_to_string(&path).map_err(io_error(&path))?;
                let t = parse_named(&text, db, script)?;
                if t.id != id {
                    return Err(ScriptError::Manifest(format!("{script} holds test `{}`, manifest says `{id}`", t.id)));
                }
                tests.push(t);
            }
            _ => return Err(ScriptError::Manifest(format!("unexpected line `{line}`"))),
        }
    }
    let missing = |what: &str| ScriptError::Manifest(format!("missing `{what}` line"));
    let plan = TestPlan {
        station_name: station.ok_or_else(|| missing("station"))?,
        suite_fingerprint: suite.ok_or_else(|| missing("suite"))?,
        tests,
    };
    if count != Some(plan.tests.len()) {
        return Err(ScriptError::Manifest("test count does not match the listed tests".into()));
    }
    if fingerprint.as_deref() != Some(plan.fingerprint().as_str()) {
        return Err(ScriptError::Manifest("scripts do not reproduce the recorded plan fingerprint".into()));
    }
    Ok(plan)
}
