//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use anka_bench::{aggregate, load_suite, parse_suite, run_suite, BenchConfig, RunReport, SampleResult};
use anka_core::interp::{run_pipeline, RunError, RunOptions};
use anka_core::io::RecordingIo;
use anka_core::value::{table_equal, Decimal, Schema, Table, Value, ValueType};
use anka_core::{parse, validate};
use anka_testkit::checks::{self, Outcome};
use anka_testkit::corpus;
use anka_testkit::gen::{self, TableSpec};
use chrono::NaiveDate;

const SEED: u64 = 20_240_601;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn outcome(label: &str, o: &Outcome) -> Verdict {
    if o.all_passed() {
        Ok(format!("{label} {}/{}", o.passed, o.total))
    } else {
        Err(format!("{label} {}/{}; first failures: {:?}", o.passed, o.total, o.failures))
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../bench/fixtures")
}

const REFERENCE: &str = "PIPELINE transform_sales:
    INPUT orders: TABLE[order_id: INT, customer: STRING,
        amount: DECIMAL, date: DATE]
    STEP filter_large:
        FILTER orders WHERE amount > 1000 INTO large_orders
    STEP add_tax:
        MAP large_orders WITH tax => amount * 0.08 INTO with_tax
    STEP summarize:
        AGGREGATE with_tax
        GROUP_BY customer
        COMPUTE SUM(amount) AS total, COUNT() AS num_orders
        INTO summary
    OUTPUT summary
";

fn dec(s: &str) -> Value {
    Value::Decimal(s.parse::<Decimal>().unwrap())
}

fn c1_reference_pipeline() -> Verdict {
    let schema = Schema::of(&[
        ("order_id", ValueType::Int),
        ("customer", ValueType::String),
        ("amount", ValueType::Decimal),
        ("date", ValueType::Date),
    ]);
    let day = |d| Value::Date(NaiveDate::from_ymd_opt(2024, 1, d).unwrap());
    let orders = Table::new(
        schema,
        vec![
            vec![Value::Int(1), Value::str("alice"), dec("1500.00"), day(1)],
            vec![Value::Int(2), Value::str("bob"), dec("800.00"), day(2)],
            vec![Value::Int(3), Value::str("alice"), dec("2000.00"), day(3)],
        ],
    )
    .unwrap();
    let expected = Table::new(
        Schema::of(&[("customer", ValueType::String), ("total", ValueType::Decimal), ("num_orders", ValueType::Int)]),
        vec![vec![Value::str("alice"), dec("3500.00"), Value::Int(2)]],
    )
    .unwrap();

    let started = Instant::now();
    let ast = parse(REFERENCE).map_err(|e| e.to_string())?;
    validate(&ast).map_err(|e| format!("{e:?}"))?;
    let inputs = HashMap::from([("orders".to_string(), orders)]);
    let got = run_pipeline(&ast, &inputs, &RecordingIo::new(), &RunOptions::default()).map_err(|e| format!("{e:?}"))?;
    let elapsed = started.elapsed();

    if !table_equal(&got, &expected) {
        return Err(format!("got {got:?}"));
    }
    if got.rows()[0][1].to_string() != "3500.00" {
        return Err(format!("total printed as {}", got.rows()[0][1]));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("[(alice, 3500.00, 2)] in {elapsed:?}"))
}

fn c2_grammar_round_trip() -> Verdict {
    let files = corpus::load();
    if files.len() < 40 {
        return Err(format!("only {} corpus pipelines", files.len()));
    }
    let mut o = Outcome::default();
    let mut asts = Vec::new();
    for (stem, src) in &files {
        o.record(checks::round_trip(src).map_err(|e| format!("{stem}: {e}")));
        if let Ok(ast) = parse(src) {
            asts.push(ast);
        }
    }
    let thin: Vec<_> = corpus::coverage(&asts).into_iter().filter(|(_, n)| *n < 2).collect();
    if !thin.is_empty() {
        return Err(format!("constructs with fewer than 2 pipelines: {thin:?}"));
    }
    outcome("pipelines round-tripped", &o)
}

fn c3_parser_totality() -> Verdict {
    let seeds: Vec<String> = corpus::load().into_iter().map(|(_, s)| s).collect();
    let o = checks::parser_totality(&seeds, 10_000, SEED, Duration::from_secs(1));
    outcome("fuzzed inputs handled", &o)
}

fn c4_oracle_equivalence() -> Verdict {
    let started = Instant::now();
    let results = checks::oracle_equivalence(500, SEED);
    let elapsed = started.elapsed();
    let mut bad = Vec::new();
    let mut total = 0;
    for (op, o) in &results {
        total += o.total;
        if !o.all_passed() || o.total < 500 {
            bad.push(format!("{}: {}/{} {:?}", op.keyword(), o.passed, o.total, o.failures));
        }
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{total} cases over {} operations in {elapsed:?}", results.len()))
}

fn c5_validator_soundness() -> Verdict {
    outcome("pipelines sound", &checks::validator_soundness(1000, SEED))
}

fn c6_decimal_exactness() -> Verdict {
    outcome("pairs exact", &checks::decimal_exactness(1000, SEED))
}

/// Every corpus pipeline that touches I/O, run sandboxed on random inputs.
fn sandbox_calls() -> Result<(usize, usize), String> {
    let io_ops = ["READ", "WRITE", "FETCH", "POST"];
    let mut r = checks::rng(SEED);
    let (mut runs, mut calls) = (0, 0);
    for (stem, src) in corpus::load() {
        let ast = parse(&src).map_err(|e| format!("{stem}: {e}"))?;
        if !corpus::keywords(&ast).iter().any(|k| io_ops.contains(k)) {
            continue;
        }
        let env = validate(&ast).map_err(|e| format!("{stem}: {e:?}"))?;
        let inputs: HashMap<String, Table> = ast
            .inputs
            .iter()
            .map(|i| {
                let schema = env.schema_of(&i.name.name).unwrap();
                (i.name.name.clone(), gen::table(&mut r, schema, &TableSpec::default()))
            })
            .collect();
        let io = RecordingIo::new();
        let options = RunOptions { sandbox: true, ..RunOptions::default() };
        if let Err(RunError::Input(e)) = run_pipeline(&ast, &inputs, &io, &options) {
            return Err(format!("{stem}: {e}"));
        }
        runs += 1;
        calls += io.call_count();
    }
    Ok((runs, calls))
}

fn c7_io_round_trip() -> Verdict {
    let (json, csv) = checks::io_round_trips(500, SEED);
    let json = outcome("JSON", &json)?;
    let csv = outcome("CSV", &csv)?;
    let (runs, calls) = sandbox_calls()?;
    if runs == 0 || calls != 0 {
        return Err(format!("{calls} adapter calls across {runs} sandboxed runs"));
    }
    Ok(format!("{json}, {csv}, 0 adapter calls in {runs} sandboxed runs"))
}

fn sample(name: &str, parse: bool, execute: bool, correct: bool) -> SampleResult {
    SampleResult { sample: name.into(), parse, execute, correct, detail: None }
}

/// `n` samples, the first `p` parse, the first `e` execute, the first `c` are correct.
fn samples(n: usize, p: usize, e: usize, c: usize) -> Vec<SampleResult> {
    (0..n).map(|i| sample(&format!("s{i}"), i < p, i < e, i < c)).collect()
}

fn c8_metrics() -> Verdict {
    let suite = parse_suite(
        r#"{"name": "m", "tasks": [
            {"id": "a", "category": "filter", "description": "", "inputs": {"t": "TABLE[x: INT]"},
             "output": "TABLE[x: INT]", "tests": [{"inputs": {"t": []}, "expected": []}]},
            {"id": "b", "category": "filter", "description": "", "inputs": {"t": "TABLE[x: INT]"},
             "output": "TABLE[x: INT]", "tests": [{"inputs": {"t": []}, "expected": []}]},
            {"id": "c", "category": "hard", "description": "", "inputs": {"t": "TABLE[x: INT]"},
             "output": "TABLE[x: INT]", "tests": [{"inputs": {"t": []}, "expected": []}]}
        ]}"#,
    )
    .map_err(|e| e.to_string())?;

    // a: 10 samples, 9 parse, 7 run, 5 correct -> accurate.
    // b: 10 samples, 8 parse, 6 run, 4 correct -> not accurate.
    // c: no samples.
    let report = aggregate(&suite, vec![samples(10, 9, 7, 5), samples(10, 8, 6, 4), Vec::new()]);
    let o = &report.overall;
    let got = (o.samples, o.parsed, o.executed, o.correct, o.accurate_tasks);
    if got != (20, 17, 13, 9, 1) {
        return Err(format!("counts {got:?}"));
    }
    let rates = (o.parse_rate, o.execution_rate, o.correctness_rate, o.task_accuracy);
    if rates != (17.0 / 20.0, 13.0 / 20.0, 9.0 / 20.0, 1.0 / 3.0) {
        return Err(format!("overall rates {rates:?}"));
    }
    let filter = &report.categories[0];
    if (filter.label.as_str(), filter.task_accuracy, filter.parse_rate) != ("filter", 0.5, 17.0 / 20.0) {
        return Err(format!("filter summary {filter:?}"));
    }
    let hard = &report.categories[1];
    if (hard.samples, hard.parse_rate, hard.task_accuracy) != (0, 0.0, 0.0) || report.tasks[2].flags != ["no samples"] {
        return Err(format!("empty task {hard:?} {:?}", report.tasks[2].flags));
    }
    let accurate: Vec<bool> = report.tasks.iter().map(|t| t.accurate).collect();
    if accurate != [true, false, false] {
        return Err(format!("5/10 and 4/10 gave {accurate:?}"));
    }

    // Every evaluated fixture sample obeys correct => execute => parse.
    let broken = run_suite(&load_fixture_suite()?, &fixtures().join("broken"), &BenchConfig::default())
        .map_err(|e| e.to_string())?;
    for t in &broken.tasks {
        for s in &t.samples {
            if (s.correct && !s.execute) || (s.execute && !s.parse) {
                return Err(format!("{}/{} flags not monotone: {s:?}", t.id, s.sample));
            }
        }
        if !(t.correct <= t.executed && t.executed <= t.parsed && t.parsed <= t.samples.len()) {
            return Err(format!("{} counts not monotone", t.id));
        }
    }
    Ok("hand-computed rates reproduced, 5/10 accurate, 4/10 not".into())
}

fn load_fixture_suite() -> Result<anka_bench::Suite, String> {
    load_suite(&fixtures().join("suite.json")).map_err(|e| e.to_string())
}

fn bench_via_cli(jobs: usize, report: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_anka"))
        .arg("bench")
        .arg(fixtures().join("suite.json"))
        .arg(fixtures().join("broken"))
        .args(["--jobs", &jobs.to_string(), "--report"])
        .arg(report)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("anka bench exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok((std::fs::read(report).map_err(|e| e.to_string())?, out.stdout))
}

fn metrics(report: &[u8]) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value = serde_json::from_slice(report).map_err(|e| e.to_string())?;
    for t in v["tasks"].as_array_mut().ok_or("no tasks")? {
        t.as_object_mut().unwrap().remove("samples");
    }
    Ok(v)
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = bench_via_cli(1, &dir.path().join("a.json"))?;
    let second = bench_via_cli(1, &dir.path().join("b.json"))?;
    if first != second {
        return Err("reports differ between two --jobs 1 runs".into());
    }
    let parallel = bench_via_cli(8, &dir.path().join("c.json"))?;
    if metrics(&first.0)? != metrics(&parallel.0)? {
        return Err("metrics differ between --jobs 1 and --jobs 8".into());
    }
    Ok(format!("{}-byte report identical at --jobs 1, metrics equal at --jobs 8", first.0.len()))
}

fn c10_fixture_suite() -> Verdict {
    let suite = load_fixture_suite()?;
    if suite.tasks.len() != 16 {
        return Err(format!("{} fixture tasks", suite.tasks.len()));
    }
    let run = |dir: &str| -> Result<RunReport, String> {
        run_suite(&suite, &fixtures().join(dir), &BenchConfig::default()).map_err(|e| e.to_string())
    };
    let correct = run("correct")?;
    for s in correct.categories.iter().chain([&correct.overall]) {
        let rates = (s.parse_rate, s.execution_rate, s.correctness_rate, s.task_accuracy);
        if rates != (1.0, 1.0, 1.0, 1.0) {
            return Err(format!("correct candidates: {} scored {rates:?}", s.label));
        }
    }

    // First task of each category: the good sample plus a syntax error.
    // Second: the good sample, a runtime error and a wrong answer.
    let broken = run("broken")?;
    for (i, t) in broken.tasks.iter().enumerate() {
        let predicted = if i % 2 == 0 { (2, 1, 1, 1, true) } else { (3, 3, 2, 1, false) };
        let got = (t.samples.len(), t.parsed, t.executed, t.correct, t.accurate);
        if got != predicted {
            return Err(format!("{}: predicted {predicted:?}, got {got:?}", t.id));
        }
    }
    for s in broken.categories.iter() {
        let got = (s.samples, s.parse_rate, s.execution_rate, s.correctness_rate, s.task_accuracy);
        if got != (5, 0.8, 0.6, 0.4, 0.5) {
            return Err(format!("broken {}: {got:?}", s.label));
        }
    }
    let o = &broken.overall;
    let got = (o.samples, o.parse_rate, o.execution_rate, o.correctness_rate, o.task_accuracy);
    if got != (40, 0.8, 0.6, 0.4, 0.5) {
        return Err(format!("broken overall: {got:?}"));
    }
    Ok("16/16 correct; broken variants as predicted".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1 reference pipeline", c1_reference_pipeline),
        ("C2 grammar round-trip", c2_grammar_round_trip),
        ("C3 parser totality", c3_parser_totality),
        ("C4 operator oracle", c4_oracle_equivalence),
        ("C5 validator soundness", c5_validator_soundness),
        ("C6 decimal exactness", c6_decimal_exactness),
        ("C7 I/O round-trip and sandbox", c7_io_round_trip),
        ("C8 metric definitions", c8_metrics),
        ("C9 bench determinism", c9_determinism),
        ("C10 fixture suite", c10_fixture_suite),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
