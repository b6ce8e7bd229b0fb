use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

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

const ORDERS: &str = r#"[
  {"order_id": 1, "customer": "alice", "amount": "1500.00", "date": "2024-01-01"},
  {"order_id": 2, "customer": "bob", "amount": "800.00", "date": "2024-01-02"},
  {"order_id": 3, "customer": "alice", "amount": "2000.00", "date": "2024-01-03"}
]"#;

fn anka(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anka")).args(args).env_remove("ANKA_WHILE_CAP").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_string_lossy().into_owned()
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../bench/fixtures")
}

#[test]
fn parse_exit_codes() {
    let w = Work::new();
    let ok = w.file("ok.anka", REFERENCE);
    assert_eq!(code(&anka(&["parse", &ok])), 0);

    let bad = w.file("bad.anka", &REFERENCE.replace("INTO large_orders", "large_orders"));
    let out = anka(&["parse", &bad]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains(":5:43:"), "{}", stderr(&out));

    assert_eq!(code(&anka(&["parse", &w.path("missing.anka")])), 2);
}

#[test]
fn parse_prints_json_ast() {
    let w = Work::new();
    let out = anka(&["parse", "--ast", &w.file("ok.anka", REFERENCE)]);
    let ast: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(ast["name"]["name"], "transform_sales");
    assert_eq!(ast["steps"][2]["body"][0]["op"], "AGGREGATE");
}

#[test]
fn json_diagnostics_are_located() {
    let w = Work::new();
    let src = REFERENCE.replace("amount > 1000", "amout > 1000");
    let out = anka(&["check", "--json-diagnostics", &w.file("p.anka", &src)]);
    assert_eq!(code(&out), 1);
    let diags: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diags[0]["kind"], "UnknownColumn");
    assert_eq!((diags[0]["line"].as_u64(), diags[0]["column"].as_u64()), (Some(5), Some(29)));
}

#[test]
fn check_prints_schema_or_fails() {
    let w = Work::new();
    let out = anka(&["check", &w.file("ok.anka", REFERENCE)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "OUTPUT summary: TABLE[customer: STRING, total: DECIMAL, num_orders: INT]");

    let dup = REFERENCE.replace("INTO with_tax", "INTO large_orders").replace("AGGREGATE with_tax", "AGGREGATE large_orders");
    let out = anka(&["check", &w.file("dup.anka", &dup)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("DuplicateBinding"), "{}", stderr(&out));

    let unknown = REFERENCE.replace("GROUP_BY customer", "GROUP_BY client");
    let out = anka(&["check", &w.file("u.anka", &unknown)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains(":10:18: validate UnknownColumn"), "{}", stderr(&out));
}

#[test]
fn run_reference_pipeline_to_stdout() {
    let w = Work::new();
    let p = w.file("ref.anka", REFERENCE);
    let orders = w.file("orders.json", ORDERS);
    let out = anka(&["run", &p, "--input", &format!("orders={orders}")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v, serde_json::json!([{"customer": "alice", "total": "3500.00", "num_orders": 2}]));
}

#[test]
fn run_writes_csv_by_extension_and_reads_csv_inputs() {
    let w = Work::new();
    let p = w.file("ref.anka", REFERENCE);
    let orders = w.file(
        "orders.csv",
        "order_id,customer,amount,date\n1,alice,1500.00,2024-01-01\n2,bob,800.00,2024-01-02\n3,alice,2000.00,2024-01-03\n",
    );
    let target = w.path("summary.csv");
    let out = anka(&["run", &p, "--input", &format!("orders={orders}"), "--output", &target]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(target).unwrap(), "customer,total,num_orders\nalice,3500.00,2\n");
}

#[test]
fn run_input_and_config_errors_exit_2() {
    let w = Work::new();
    let p = w.file("ref.anka", REFERENCE);
    let orders = w.file("orders.json", ORDERS);
    assert_eq!(code(&anka(&["run", &p])), 2);
    assert_eq!(code(&anka(&["run", &p, "--input", "orders"])), 2);
    assert_eq!(code(&anka(&["run", &p, "--input", &format!("orders={}", w.path("none.json"))])), 2);
    let extra = format!("extra={orders}");
    assert_eq!(code(&anka(&["run", &p, "--input", &format!("orders={orders}"), "--input", &extra])), 2);
    let bad = w.file("bad.json", r#"[{"order_id": "x"}]"#);
    let out = anka(&["run", &p, "--input", &format!("orders={bad}")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("row 0, field order_id"), "{}", stderr(&out));
    let out = anka(&["run", &p, "--input", &format!("orders={orders}"), "--output", &w.path("x.txt")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn run_runtime_errors_exit_3() {
    let w = Work::new();
    let orders = w.file("orders.json", ORDERS);
    let div = REFERENCE.replace("amount * 0.08", "amount / 0");
    let out = anka(&["run", &w.file("div.anka", &div), "--input", &format!("orders={orders}")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("DivisionByZero"), "{}", stderr(&out));
}

#[test]
fn sandbox_flag_denies_io() {
    let w = Work::new();
    let data = w.file("t.json", r#"[{"a": 1}]"#);
    let src = format!(
        "PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\nREAD \"{data}\" FORMAT JSON SCHEMA TABLE[a: INT] INTO r\nOUTPUT r\n"
    );
    let p = w.file("read.anka", &src);
    let input = format!("t={data}");
    let out = anka(&["run", &p, "--input", &input]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = anka(&["run", &p, "--input", &input, "--sandbox"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("sandboxed"));
    assert_eq!(code(&anka(&["run", &p, "--input", &input, "--sandbox", "--no-sandbox"])), 0);
}

#[test]
fn while_cap_comes_from_the_environment() {
    let w = Work::new();
    let data = w.file("t.json", r#"[{"a": 1}]"#);
    let src = "PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\nWHILE TRUE DO\nDISTINCT t INTO d\nEND_WHILE\nDISTINCT t INTO r\nOUTPUT r\n";
    let p = w.file("loop.anka", src);
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_anka"))
            .args(["run", &p, "--input", &format!("t={data}")])
            .env("ANKA_WHILE_CAP", cap)
            .output()
            .unwrap()
    };
    let out = run("5");
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("AssertionFailed"), "{}", stderr(&out));
    assert_eq!(code(&run("lots")), 2);
}

#[test]
fn bench_writes_report() {
    let w = Work::new();
    let report = w.path("report.json");
    let suite = fixtures().join("suite.json");
    let out = anka(&["bench", suite.to_str().unwrap(), fixtures().join("correct").to_str().unwrap(), "--report", &report]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["overall"]["task_accuracy"], 1.0);
    assert!(stdout(&out).contains("| **Overall** | 16 | 16 | 100.0% | 100.0% | 100.0% | 100.0% |"));
}

#[test]
fn bench_with_empty_candidates_scores_zero() {
    let w = Work::new();
    std::fs::create_dir(w.path("empty")).unwrap();
    let report = w.path("report.json");
    let suite = fixtures().join("suite.json");
    let out = anka(&["bench", suite.to_str().unwrap(), &w.path("empty"), "--report", &report]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["parse_rate", "execution_rate", "correctness_rate", "task_accuracy"] {
        assert_eq!(v["overall"][key], 0.0);
    }
    assert!(v["tasks"].as_array().unwrap().iter().all(|t| t["flags"][0] == "no samples"));
}

#[test]
fn bench_rejects_bad_suites() {
    let w = Work::new();
    let cands = fixtures().join("correct");
    let c = cands.to_str().unwrap();
    assert_eq!(code(&anka(&["bench", &w.path("nope.json"), c])), 2);
    assert_eq!(code(&anka(&["bench", &w.file("bad.json", "{\"name\": 1}"), c])), 2);
    let out = anka(&["bench", &w.file("empty.json", r#"{"name": "e", "tasks": []}"#), c]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("suite must contain at least one task"));
}
