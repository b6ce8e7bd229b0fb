//! `anka` command-line tool.
//!
//! Exit codes: 0 success, 1 parse or validation failure, 2 input or
//! configuration problem, 3 runtime error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anka_bench::{load_suite, run_suite, BenchConfig, EvalConfig};
use anka_core::interp::{run_pipeline, RunError, RunOptions, DEFAULT_WHILE_CAP};
use anka_core::io::{table_from_csv, table_from_json, table_to_csv, table_to_json, StdIo};
use anka_core::syntax::{parse, Pipeline, SourceLocation};
use anka_core::validate::{validate, Environment};
use anka_core::value::Table;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const OK: u8 = 0;
const INVALID: u8 = 1;
const CONFIG: u8 = 2;
const RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "anka", version, about = "Parse, check, run and benchmark Anka pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a pipeline and report syntax errors.
    Parse {
        file: PathBuf,
        /// Print the syntax tree as JSON.
        #[arg(long)]
        ast: bool,
        #[command(flatten)]
        diag: Diagnostics,
    },
    /// Parse and validate a pipeline; prints the inferred output schema.
    Check {
        file: PathBuf,
        #[command(flatten)]
        diag: Diagnostics,
    },
    /// Run a pipeline on input files.
    Run {
        file: PathBuf,
        /// Bind an INPUT to a .json or .csv file.
        #[arg(long = "input", value_name = "NAME=PATH")]
        inputs: Vec<String>,
        /// Write the output table here (.json or .csv) instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        sandbox: Sandbox,
        #[command(flatten)]
        diag: Diagnostics,
    },
    /// Score candidate programs against a task suite.
    Bench {
        suite: PathBuf,
        /// Directory holding <task_id>/<sample>.anka files.
        candidates: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Samples evaluated concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Compare outputs ignoring row order for every task.
        #[arg(long)]
        order_insensitive: bool,
        #[command(flatten)]
        sandbox: Sandbox,
    },
}

#[derive(Args)]
struct Diagnostics {
    /// Print diagnostics as JSON on stdout.
    #[arg(long)]
    json_diagnostics: bool,
}

#[derive(Args)]
struct Sandbox {
    /// Deny all file and network access.
    #[arg(long, overrides_with = "no_sandbox")]
    sandbox: bool,
    /// Allow file and network access.
    #[arg(long, overrides_with = "sandbox")]
    no_sandbox: bool,
}

impl Sandbox {
    fn enabled(&self, default: bool) -> bool {
        if self.sandbox {
            true
        } else if self.no_sandbox {
            false
        } else {
            default
        }
    }
}

#[derive(Serialize)]
struct Diagnostic {
    stage: &'static str,
    kind: String,
    message: String,
    line: u32,
    column: u32,
}

impl Diagnostics {
    fn report(&self, file: &Path, items: &[Diagnostic]) {
        if self.json_diagnostics {
            println!("{}", serde_json::to_string_pretty(items).unwrap());
        } else {
            for d in items {
                eprintln!("{}:{}:{}: {} {}: {}", file.display(), d.line, d.column, d.stage, d.kind, d.message);
            }
        }
    }
}

fn diagnostic(stage: &'static str, kind: String, message: String, at: SourceLocation) -> Diagnostic {
    Diagnostic { stage, kind, message, line: at.line, column: at.column }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("anka: {msg}");
    code
}

fn read_source(file: &Path) -> Result<String, u8> {
    fs::read_to_string(file).map_err(|e| fail(CONFIG, format!("cannot read {}: {e}", file.display())))
}

fn parse_file(file: &Path, diag: &Diagnostics) -> Result<Pipeline, u8> {
    let source = read_source(file)?;
    parse(&source).map_err(|e| {
        let kind = if e.expected.is_empty() { "SyntaxError".into() } else { format!("expected {}", e.expected.join(", ")) };
        diag.report(file, &[diagnostic("parse", kind, e.message.clone(), e.location)]);
        INVALID
    })
}

fn check_file(file: &Path, diag: &Diagnostics) -> Result<(Pipeline, Environment), u8> {
    let ast = parse_file(file, diag)?;
    match validate(&ast) {
        Ok(env) => Ok((ast, env)),
        Err(errors) => {
            let items: Vec<_> = errors
                .iter()
                .map(|e| diagnostic("validate", format!("{:?}", e.kind), e.message.clone(), e.location))
                .collect();
            diag.report(file, &items);
            Err(INVALID)
        }
    }
}

fn while_cap() -> Result<u64, u8> {
    match std::env::var("ANKA_WHILE_CAP") {
        Err(_) => Ok(DEFAULT_WHILE_CAP),
        Ok(v) => v.trim().parse().map_err(|_| fail(CONFIG, format!("ANKA_WHILE_CAP must be a non-negative integer, got {v:?}"))),
    }
}

enum Format {
    Json,
    Csv,
}

fn format_of(path: &Path) -> Result<Format, String> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        _ => Err(format!("{}: expected a .json or .csv file", path.display())),
    }
}

fn load_inputs(ast: &Pipeline, bindings: &[String]) -> Result<HashMap<String, Table>, String> {
    let mut paths: HashMap<&str, &str> = HashMap::new();
    for b in bindings {
        let (name, path) = b.split_once('=').ok_or_else(|| format!("--input expects NAME=PATH, got {b:?}"))?;
        if paths.insert(name, path).is_some() {
            return Err(format!("input {name} bound twice"));
        }
    }
    let mut tables = HashMap::new();
    for decl in &ast.inputs {
        let name = decl.name.as_str();
        let path = Path::new(paths.remove(name).ok_or_else(|| format!("no --input binding for INPUT {name}"))?);
        let schema = decl.schema.to_schema().map_err(|e| format!("INPUT {name}: {e}"))?;
        let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let table = match format_of(path)? {
            Format::Json => table_from_json(&bytes, &schema),
            Format::Csv => table_from_csv(&bytes, &schema),
        }
        .map_err(|e| format!("input {name} ({}): {e}", path.display()))?;
        tables.insert(name.to_string(), table);
    }
    if let Some(extra) = paths.keys().min() {
        return Err(format!("input {extra} is not declared by the pipeline"));
    }
    Ok(tables)
}

fn cmd_parse(file: &Path, ast_flag: bool, diag: &Diagnostics) -> u8 {
    match parse_file(file, diag) {
        Ok(ast) => {
            if ast_flag {
                println!("{}", serde_json::to_string_pretty(&ast).unwrap());
            } else if diag.json_diagnostics {
                println!("[]");
            }
            OK
        }
        Err(code) => code,
    }
}

fn cmd_check(file: &Path, diag: &Diagnostics) -> u8 {
    match check_file(file, diag) {
        Ok((ast, env)) => {
            if diag.json_diagnostics {
                println!("[]");
            } else if let Some(schema) = env.output_schema() {
                println!("OUTPUT {}: {schema}", ast.output);
            }
            OK
        }
        Err(code) => code,
    }
}

fn cmd_run(file: &Path, inputs: &[String], output: Option<&Path>, sandbox: bool, diag: &Diagnostics) -> u8 {
    let (ast, _) = match check_file(file, diag) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let while_cap = match while_cap() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let output_format = match output.map(format_of).transpose() {
        Ok(f) => f,
        Err(e) => return fail(CONFIG, e),
    };
    let tables = match load_inputs(&ast, inputs) {
        Ok(t) => t,
        Err(e) => return fail(CONFIG, e),
    };
    let options = RunOptions { sandbox, while_cap, deadline: None };
    let result = match run_pipeline(&ast, &tables, &StdIo::default(), &options) {
        Ok(t) => t,
        Err(RunError::Input(e)) => return fail(CONFIG, e),
        Err(RunError::Runtime(e)) => {
            diag.report(file, &[diagnostic("run", format!("{:?}", e.kind), e.message.clone(), e.location)]);
            return RUNTIME;
        }
    };
    match (output, output_format) {
        (Some(path), Some(format)) => {
            let bytes = match format {
                Format::Json => table_to_json(&result),
                Format::Csv => table_to_csv(&result),
            };
            if let Err(e) = fs::write(path, bytes) {
                return fail(CONFIG, format!("cannot write {}: {e}", path.display()));
            }
        }
        _ => print!("{}", String::from_utf8(table_to_json(&result)).unwrap()),
    }
    OK
}

fn cmd_bench(suite: &Path, candidates: &Path, report: Option<&Path>, jobs: usize, unordered: bool, sandbox: bool) -> u8 {
    let suite = match load_suite(suite) {
        Ok(s) => s,
        Err(e) => return fail(CONFIG, e),
    };
    let while_cap = match while_cap() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let config = BenchConfig {
        eval: EvalConfig { while_cap, order_insensitive: unordered, sandbox, ..EvalConfig::default() },
        jobs,
    };
    let result = match run_suite(&suite, candidates, &config) {
        Ok(r) => r,
        Err(e) => return fail(CONFIG, format!("cannot read candidates in {}: {e}", candidates.display())),
    };
    if let Some(path) = report {
        if let Err(e) = fs::write(path, result.to_json()) {
            return fail(CONFIG, format!("cannot write {}: {e}", path.display()));
        }
    }
    print!("{}", result.to_markdown());
    OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Parse { file, ast, diag } => cmd_parse(file, *ast, diag),
        Command::Check { file, diag } => cmd_check(file, diag),
        Command::Run { file, inputs, output, sandbox, diag } => {
            cmd_run(file, inputs, output.as_deref(), sandbox.enabled(false), diag)
        }
        Command::Bench { suite, candidates, report, jobs, order_insensitive, sandbox } => {
            cmd_bench(suite, candidates, report.as_deref(), *jobs, *order_insensitive, sandbox.enabled(true))
        }
    };
    ExitCode::from(code)
}
