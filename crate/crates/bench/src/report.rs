//! Suite runs and their reports.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::evaluate::{evaluate_sample, task_accuracy, EvalConfig, SampleResult};
use crate::suite::{Category, Suite, TaskSpec};

pub const NO_SAMPLES: &str = "no samples";

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub eval: EvalConfig,
    /// Samples evaluated concurrently.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { eval: EvalConfig::default(), jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub id: String,
    pub category: Category,
    pub order_insensitive: bool,
    pub samples: Vec<SampleResult>,
    pub parsed: usize,
    pub executed: usize,
    pub correct: usize,
    pub accurate: bool,
    pub flags: Vec<String>,
}

/// Rates are over samples; task accuracy is over tasks. All are 0 when
/// the denominator is 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub label: String,
    pub tasks: usize,
    pub samples: usize,
    pub parsed: usize,
    pub executed: usize,
    pub correct: usize,
    pub accurate_tasks: usize,
    pub parse_rate: f64,
    pub execution_rate: f64,
    pub correctness_rate: f64,
    pub task_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub tasks: Vec<TaskReport>,
    pub categories: Vec<Summary>,
    pub overall: Summary,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn summarize<'a>(label: &str, tasks: impl Iterator<Item = &'a TaskReport>) -> Summary {
    let mut s = Summary {
        label: label.into(),
        tasks: 0,
        samples: 0,
        parsed: 0,
        executed: 0,
        correct: 0,
        accurate_tasks: 0,
        parse_rate: 0.0,
        execution_rate: 0.0,
        correctness_rate: 0.0,
        task_accuracy: 0.0,
    };
    for t in tasks {
        s.tasks += 1;
        s.samples += t.samples.len();
        s.parsed += t.parsed;
        s.executed += t.executed;
        s.correct += t.correct;
        s.accurate_tasks += t.accurate as usize;
    }
    s.parse_rate = ratio(s.parsed, s.samples);
    s.execution_rate = ratio(s.executed, s.samples);
    s.correctness_rate = ratio(s.correct, s.samples);
    s.task_accuracy = ratio(s.accurate_tasks, s.tasks);
    s
}

fn task_report(task: &TaskSpec, samples: Vec<SampleResult>) -> TaskReport {
    let count = |f: fn(&SampleResult) -> bool| samples.iter().filter(|s| f(s)).count();
    let flags = if samples.is_empty() { vec![NO_SAMPLES.to_string()] } else { Vec::new() };
    TaskReport {
        id: task.id.clone(),
        category: task.category,
        order_insensitive: task.order_insensitive,
        parsed: count(|s| s.parse),
        executed: count(|s| s.execute),
        correct: count(|s| s.correct),
        accurate: task_accuracy(&samples),
        flags,
        samples,
    }
}

/// Builds the report from per-task sample results, in suite order.
pub fn aggregate(suite: &Suite, results: Vec<Vec<SampleResult>>) -> RunReport {
    let tasks: Vec<TaskReport> =
        suite.tasks.iter().zip(results).map(|(t, r)| task_report(t, r)).collect();
    let categories = Category::ALL
        .iter()
        .filter(|c| tasks.iter().any(|t| t.category == **c))
        .map(|c| summarize(c.name(), tasks.iter().filter(|t| t.category == *c)))
        .collect();
    let overall = summarize("overall", tasks.iter());
    RunReport { suite: suite.name.clone(), tasks, categories, overall }
}

/// `(sample name, source)` pairs for one task, sorted by file name. A
/// missing task directory means no samples.
fn candidate_files(dir: &Path) -> io::Result<Vec<(String, Result<String, String>)>> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "anka") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let source = std::fs::read(&p)
                .map_err(|e| format!("cannot read candidate: {e}"))
                .and_then(|b| String::from_utf8(b).map_err(|_| "candidate is not UTF-8".to_string()));
            (name, source)
        })
        .collect())
}

/// Evaluates every candidate under `candidates/<task_id>/`. Samples run
/// on `config.jobs` threads; results are reduced in suite and file order,
/// so the report does not depend on the job count.
pub fn run_suite(suite: &Suite, candidates: &Path, config: &BenchConfig) -> io::Result<RunReport> {
    let mut work = Vec::new();
    for (ti, task) in suite.tasks.iter().enumerate() {
        for (name, source) in candidate_files(&candidates.join(&task.id))? {
            work.push((ti, name, source));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(io::Error::other)?;
    let scored: Vec<(usize, SampleResult)> = pool.install(|| {
        work.par_iter()
            .map(|(ti, name, source)| {
                let result = match source {
                    Ok(src) => evaluate_sample(&suite.tasks[*ti], name, src, &config.eval),
                    Err(e) => SampleResult::failed_parse(name, e.clone()),
                };
                (*ti, result)
            })
            .collect()
    });
    let mut per_task: Vec<Vec<SampleResult>> = vec![Vec::new(); suite.tasks.len()];
    for (ti, r) in scored {
        per_task[ti].push(r);
    }
    Ok(aggregate(suite, per_task))
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let pct = |x: f64| format!("{:.1}%", x * 100.0);
        let mut out = format!("# Benchmark report: {}\n\n", self.suite);
        out.push_str("| Category | Tasks | Samples | Parse | Execute | Correct | Task accuracy |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
        let row = |out: &mut String, s: &Summary, label: &str| {
            let _ = writeln!(
                out,
                "| {label} | {} | {} | {} | {} | {} | {} |",
                s.tasks,
                s.samples,
                pct(s.parse_rate),
                pct(s.execution_rate),
                pct(s.correctness_rate),
                pct(s.task_accuracy)
            );
        };
        for c in &self.categories {
            row(&mut out, c, &c.label);
        }
        row(&mut out, &self.overall, "**Overall**");

        let empty: Vec<&str> =
            self.tasks.iter().filter(|t| t.samples.is_empty()).map(|t| t.id.as_str()).collect();
        if !empty.is_empty() {
            let _ = write!(out, "\nTasks with no samples: {}\n", empty.join(", "));
        }
        let failing: Vec<(&str, &SampleResult)> = self
            .tasks
            .iter()
            .flat_map(|t| t.samples.iter().filter(|s| !s.correct).map(move |s| (t.id.as_str(), s)))
            .collect();
        if !failing.is_empty() {
            out.push_str("\n## Failing samples\n\n");
            for (task, s) in failing {
                let _ = writeln!(out, "- {task}/{}: {}", s.sample, s.detail.as_deref().unwrap_or("incorrect"));
            }
        }
        out
    }
}
