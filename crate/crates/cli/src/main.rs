use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abstest::config::{gen_station, parse_station, AttributeKey, ConfigurationDatabase, EntityId};
use abstest::coverage::{condition_coverage, ConditionTable, CoverageLedger, CoverageSummary};
use abstest::instantiate::{instantiate_suite_with, InstantiateOptions, TestPlan};
use abstest::ixl::{route_transitions, IxlSim, SimOptions};
use abstest::mutation::{affects_behavior, apply_mutation, generate_mutations, MutantOutcome, MutationReport};
use abstest::runtime::{
    emit_scripts, load_scripts, run_plan, run_plan_parallel, RunOptions, RunReport, StateSnapshot, SutContract,
    SutError,
};
use abstest::suite::{order_suite, parse_suite, AbstractSuite};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "abstest", version, about = "Instantiate abstract functional tests for a station and run them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Enumeration {
    /// Cap on input states per binding.
    #[arg(long, value_name = "N")]
    max_states: Option<usize>,
    /// Keep the first N states instead of failing when the cap is exceeded.
    #[arg(long, requires = "max_states")]
    truncate: bool,
}

impl Enumeration {
    fn options(&self) -> InstantiateOptions {
        InstantiateOptions { max_states: self.max_states, truncate: self.truncate }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and cross-check a station and, optionally, a suite.
    Validate { station: PathBuf, suite: Option<PathBuf> },
    /// Expand a suite into a plan (plan.json and plan.manifest).
    Instantiate {
        station: PathBuf,
        suite: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Write one .pts script per physical test plus the manifest.
    Emit {
        station: PathBuf,
        suite: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Run a suite, or previously emitted scripts, on the built-in simulator.
    Run {
        station: PathBuf,
        /// Suite to instantiate; omit when replaying --scripts.
        #[arg(required_unless_present = "scripts", conflicts_with = "scripts")]
        suite: Option<PathBuf>,
        /// Replay the scripts in this directory.
        #[arg(long)]
        scripts: Option<PathBuf>,
        /// Configure the simulator from a different station document.
        #[arg(long)]
        sim_station: Option<PathBuf>,
        /// Also write the run report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        fail_fast: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Exit 1 when condition-table coverage falls below this fraction.
        #[arg(long, value_name = "F")]
        min_condition_coverage: Option<f64>,
        /// Log attribute changes per cycle to standard error.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Write a synthetic station.
    GenStation {
        #[arg(long)]
        routes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a run report written by `run --json`.
    Report { report: PathBuf },
    /// Run a suite against seeded single-entry configuration faults.
    Mutate {
        station: PathBuf,
        suite: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

/// Report written by `run --json` and read by `report`.
#[derive(Serialize, Deserialize)]
struct RunDocument {
    run: RunReport,
    coverage: CoverageSummary,
    conditions: ConditionTable,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_station(path: &Path) -> Result<ConfigurationDatabase> {
    parse_station(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_suite(path: &Path, db: &ConfigurationDatabase) -> Result<AbstractSuite> {
    let (suite, warnings) = parse_suite(&read(path)?, db).map_err(|e| anyhow!("{}:{}: {}", path.display(), e.line, e.kind))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    order_suite(&suite).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn build_plan(station: &Path, suite: &Path, enumeration: &Enumeration) -> Result<(ConfigurationDatabase, TestPlan)> {
    let db = load_station(station)?;
    let suite = load_suite(suite, &db)?;
    let (plan, warnings) = instantiate_suite_with(&suite, &db, &enumeration.options())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok((db, plan))
}

fn print_counts(plan: &TestPlan) {
    for (case, n) in plan.case_counts() {
        println!("case {case}: {n} tests");
    }
    println!("total: {} tests", plan.tests.len());
}

/// Simulator wrapper printing the change log after every cycle.
struct Traced(IxlSim);

impl SutContract for Traced {
    fn reset(&mut self) {
        self.0.reset();
        eprintln!("trace: reset");
    }
    fn inject(&mut self, key: &AttributeKey, value: &str) -> Result<(), SutError> {
        let r = self.0.inject(key, value);
        self.flush();
        r
    }
    fn stimulate(&mut self, sensor: &EntityId, value: &str) -> Result<(), SutError> {
        self.0.stimulate(sensor, value)
    }
    fn cycle(&mut self, n: u32) {
        for _ in 0..n {
            self.0.cycle(1);
            self.flush();
        }
    }
    fn snapshot(&self) -> StateSnapshot {
        self.0.snapshot()
    }
    fn take_coverage(&mut self) -> CoverageLedger {
        self.0.take_coverage()
    }
}

impl Traced {
    fn flush(&mut self) {
        let mut err = std::io::stderr().lock();
        for line in self.0.take_trace() {
            let _ = writeln!(err, "trace: {line}");
        }
    }
}

fn render_coverage(summary: &CoverageSummary, table: &ConditionTable) -> String {
    format!(
        "sensor_assoc entries   {}\nactuator_assoc entries {}\nattributes             {}\nroute transitions      {}\n\ncondition table\n{}",
        summary.sensor_assoc,
        summary.actuator_assoc,
        summary.attributes,
        summary.transitions,
        table.render_text()
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    station: &Path,
    suite: Option<&Path>,
    scripts: Option<&Path>,
    sim_station: Option<&Path>,
    json: Option<&Path>,
    options: RunOptions,
    min_condition_coverage: Option<f64>,
    trace: bool,
    enumeration: &Enumeration,
) -> Result<i32> {
    let (db, plan) = match (suite, scripts) {
        (Some(suite), _) => build_plan(station, suite, enumeration)?,
        (None, Some(dir)) => {
            let db = load_station(station)?;
            let plan = load_scripts(dir, &db)?;
            (db, plan)
        }
        (None, None) => bail!("either a suite or --scripts is required"),
    };
    let sim_db = match sim_station {
        Some(p) => load_station(p)?,
        None => db.clone(),
    };
    let report = if trace {
        let mut sut = Traced(IxlSim::with_options(&sim_db, SimOptions { trace: true, ..SimOptions::default() }));
        run_plan(&plan, &db, &mut sut, &options)
    } else {
        run_plan_parallel(&plan, &db, || IxlSim::new(&sim_db), &options)
    };
    let table = condition_coverage(&plan, &report.results, &db);
    let summary = report.coverage.summary(&db, &route_transitions());
    print!("{}", report.render_table());
    println!();
    print!("{}", render_coverage(&summary, &table));

    let mut code = report.exit_code();
    if let Some(min) = min_condition_coverage {
        if table.fraction() < min {
            eprintln!("condition coverage {:.3} is below the required {min:.3}", table.fraction());
            code = code.max(1);
        }
    }
    if let Some(path) = json {
        let doc = RunDocument { run: report, coverage: summary, conditions: table };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        write(path, &text)?;
    }
    Ok(code)
}

fn cmd_mutate(station: &Path, suite: &Path, count: usize, seed: u64, workers: usize) -> Result<i32> {
    let (db, plan) = build_plan(station, suite, &Enumeration { max_states: None, truncate: false })?;
    let options = RunOptions { fail_fast: false, workers };
    let mut report = MutationReport::default();
    for m in generate_mutations(&db, count, seed) {
        let mutated = apply_mutation(&db, &m)?;
        let run = run_plan_parallel(&plan, &db, || IxlSim::new(&mutated), &options);
        report.outcomes.push(MutantOutcome {
            affects_behavior: affects_behavior(&db, &mutated),
            failed_tests: run.tallies.failed + run.tallies.error,
            mutation: m,
        });
    }
    print!("{}", report.render());
    Ok(if report.kill_rate() < 1.0 { 1 } else { 0 })
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { station, suite } => {
            let db = load_station(&station)?;
            println!(
                "station {}: {} sensors, {} actuators, {} logic processes",
                db.station_name(),
                db.sensors().len(),
                db.actuators().len(),
                db.logic().len()
            );
            if let Some(suite) = suite {
                let suite = load_suite(&suite, &db)?;
                println!("suite: {} test cases", suite.cases.len());
            }
            Ok(0)
        }
        Command::Instantiate { station, suite, output, enumeration } => {
            let (_, plan) = build_plan(&station, &suite, &enumeration)?;
            fs::create_dir_all(&output).with_context(|| format!("cannot create {}", output.display()))?;
            write(&output.join("plan.json"), &plan.to_json())?;
            let cases: Vec<String> = plan.case_counts().into_iter().map(|(c, _)| c).collect();
            write(&output.join("plan.manifest"), &plan.manifest(&cases))?;
            print_counts(&plan);
            Ok(0)
        }
        Command::Emit { station, suite, output, enumeration } => {
            let (_, plan) = build_plan(&station, &suite, &enumeration)?;
            emit_scripts(&plan, &output)?;
            print_counts(&plan);
            Ok(0)
        }
        Command::Run {
            station,
            suite,
            scripts,
            sim_station,
            json,
            fail_fast,
            workers,
            min_condition_coverage,
            trace,
            enumeration,
        } => {
            let trace = trace || std::env::var("ABSTEST_TRACE").is_ok_and(|v| v == "1");
            cmd_run(
                &station,
                suite.as_deref(),
                scripts.as_deref(),
                sim_station.as_deref(),
                json.as_deref(),
                RunOptions { fail_fast, workers },
                min_condition_coverage,
                trace,
                &enumeration,
            )
        }
        Command::GenStation { routes, seed, output } => {
            let doc = gen_station(routes, seed)?;
            match output {
                Some(path) => write(&path, &doc)?,
                None => print!("{doc}"),
            }
            Ok(0)
        }
        Command::Report { report } => {
            let doc: RunDocument = serde_json::from_str(&read(&report)?)
                .with_context(|| format!("{} is not a run report", report.display()))?;
            print!("{}", doc.run.render_table());
            println!();
            print!("{}", render_coverage(&doc.coverage, &doc.conditions));
            Ok(doc.run.exit_code())
        }
        Command::Mutate { station, suite, count, seed, workers } => cmd_mutate(&station, &suite, count, seed, workers),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
