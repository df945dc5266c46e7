use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn abstest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abstest")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_the_fixtures() {
    let o = abstest(&["validate", p(&fixture("t2.station")), p(&fixture("t2_full.atest"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn validate_reports_unknown_kind_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("bad.atest");
    std::fs::write(&suite, "test t\n  bind r : logic kind=Rout\nend\n").unwrap();
    let o = abstest(&["validate", p(&fixture("t2.station")), p(&suite)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.atest:2: unknown kind `Rout`"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_error() {
    let o = abstest(&["validate", "/nonexistent/station"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn instantiate_writes_plan_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = abstest(&["instantiate", p(&fixture("t2.station")), p(&fixture("t2_full.atest")), "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("case negative: 70 tests"));
    let manifest = std::fs::read_to_string(dir.path().join("plan.manifest")).unwrap();
    assert!(manifest.contains("case nominal 2"));
    assert!(dir.path().join("plan.json").exists());
}

#[test]
fn instantiate_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = abstest(&["emit", p(&fixture("t2.station")), p(&fixture("t2_full.atest")), "-o", p(dir.path())]);
        assert_eq!(o.status.code(), Some(0));
        let o = abstest(&["instantiate", p(&fixture("t2.station")), p(&fixture("t2_full.atest")), "-o", p(dir.path())]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 82);
    for name in names {
        assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn run_passes_on_the_matching_simulator() {
    let o = abstest(&["run", p(&fixture("t2.station")), p(&fixture("t2_full.atest")), "--min-condition-coverage", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("80 passed"), "{}", stdout(&o));
}

#[test]
fn run_against_a_mutated_simulator_fails() {
    let o = abstest(&[
        "run",
        p(&fixture("t2.station")),
        p(&fixture("t2_full.atest")),
        "--sim-station",
        p(&fixture("t2_mutated.station")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn coverage_threshold_sets_the_exit_code() {
    let o = abstest(&["run", p(&fixture("t2.station")), p(&fixture("nominal.atest")), "--min-condition-coverage", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("below the required"));
}

#[test]
fn emitted_scripts_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = abstest(&["emit", p(&fixture("t2.station")), p(&fixture("t2_full.atest")), "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let o = abstest(&["run", p(&fixture("t2.station")), "--scripts", p(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn gen_station_is_deterministic() {
    let a = abstest(&["gen-station", "--routes", "10", "--seed", "11"]);
    let b = abstest(&["gen-station", "--routes", "10", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("station gen10s11\n"));
    assert_ne!(a.stdout, abstest(&["gen-station", "--routes", "10", "--seed", "12"]).stdout);
}

#[test]
fn report_renders_a_saved_run() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("run.json");
    let o = abstest(&[
        "run",
        p(&fixture("t2.station")),
        p(&fixture("nominal.atest")),
        "--sim-station",
        p(&fixture("t2_mutated.station")),
        "--json",
        p(&json),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let r = abstest(&["report", p(&json)]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(stdout(&r), stdout(&o));
}

#[test]
fn mutate_reports_kills() {
    let dir = tempfile::tempdir().unwrap();
    let station = dir.path().join("g.station");
    assert_eq!(abstest(&["gen-station", "--routes", "4", "--seed", "3", "-o", p(&station)]).status.code(), Some(0));
    let o = abstest(&["mutate", p(&station), p(&fixture("t2_full.atest")), "--count", "5", "--seed", "1"]);
    assert!(stdout(&o).contains("5 mutants"), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(o.status.code(), Some(0));
}
