//! Scoring of a single candidate program.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use anka_core::interp::{run_pipeline, RunOptions, DEFAULT_WHILE_CAP};
use anka_core::io::{IoAdapter, RecordingIo, StdIo};
use anka_core::syntax::parse;
use anka_core::validate;
use anka_core::value::{table_equal, table_equal_unordered, Table};
use serde::Serialize;

use crate::suite::TaskSpec;

pub const DEFAULT_SAMPLE_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// Wall-clock cap for each test case.
    pub timeout: Duration,
    pub while_cap: u64,
    /// Compare outputs as multisets for every task, not just flagged ones.
    pub order_insensitive: bool,
    /// Deny file and network access. With it off, candidates get real I/O.
    pub sandbox: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            timeout: DEFAULT_SAMPLE_TIMEOUT,
            while_cap: DEFAULT_WHILE_CAP,
            order_insensitive: false,
            sandbox: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleResult {
    pub sample: String,
    pub parse: bool,
    pub execute: bool,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl SampleResult {
    pub fn failed_parse(sample: &str, detail: String) -> Self {
        SampleResult { sample: sample.into(), parse: false, execute: false, correct: false, detail: Some(detail) }
    }
}

/// Parse means parse and validate; execute means every test case ran
/// without error; correct means every output equals its
/// expected table.
pub fn evaluate_sample(task: &TaskSpec, sample: &str, source: &str, config: &EvalConfig) -> SampleResult {
    let ast = match parse(source) {
        Ok(ast) => ast,
        Err(e) => return SampleResult::failed_parse(sample, format!("parse error at {e}")),
    };
    if let Err(errors) = validate(&ast) {
        let more = match errors.len() {
            1 => String::new(),
            n => format!(" (+{} more)", n - 1),
        };
        return SampleResult::failed_parse(sample, format!("validation error at {}{more}", errors[0]));
    }
    let mut result = SampleResult { sample: sample.into(), parse: true, execute: true, correct: true, detail: None };
    let unordered = config.order_insensitive || task.order_insensitive;
    for (i, test) in task.tests.iter().enumerate() {
        let options = RunOptions {
            sandbox: config.sandbox,
            while_cap: config.while_cap,
            deadline: Some(Instant::now() + config.timeout),
        };
        let io: Box<dyn IoAdapter> =
            if config.sandbox { Box::new(RecordingIo::new()) } else { Box::new(StdIo::default()) };
        let outcome = catch_unwind(AssertUnwindSafe(|| run_pipeline(&ast, &test.inputs, io.as_ref(), &options)));
        let output = match outcome {
            Ok(Ok(t)) => t,
            Ok(Err(e)) => {
                result.execute = false;
                result.correct = false;
                result.detail = Some(format!("test {i}: {e}"));
                return result;
            }
            Err(_) => {
                result.execute = false;
                result.correct = false;
                result.detail = Some(format!("test {i}: interpreter panicked"));
                return result;
            }
        };
        if result.correct && !outputs_match(&output, &test.expected, unordered) {
            result.correct = false;
            result.detail = Some(mismatch(i, &output, &test.expected));
        }
    }
    result
}

fn outputs_match(actual: &Table, expected: &Table, unordered: bool) -> bool {
    if unordered {
        table_equal_unordered(actual, expected)
    } else {
        table_equal(actual, expected)
    }
}

fn mismatch(test: usize, actual: &Table, expected: &Table) -> String {
    if actual.schema() != expected.schema() {
        format!("test {test}: output schema {} differs from expected {}", actual.schema(), expected.schema())
    } else if actual.len() != expected.len() {
        format!("test {test}: {} rows, expected {}", actual.len(), expected.len())
    } else {
        let row = actual.rows().iter().zip(expected.rows()).position(|(a, b)| a != b);
        match row {
            Some(r) => format!("test {test}: row {r} differs from expected"),
            None => format!("test {test}: rows match only in a different order"),
        }
    }
}

/// At least half of the samples are correct. No samples is not accurate.
pub fn task_accuracy(results: &[SampleResult]) -> bool {
    let correct = results.iter().filter(|r| r.correct).count();
    !results.is_empty() && 2 * correct >= results.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::parse_suite;

    fn task() -> TaskSpec {
        parse_suite(
            r#"{"name": "s", "tasks": [{
            "id": "t", "category": "filter", "description": "",
            "inputs": {"xs": "TABLE[a: INT]"}, "output": "TABLE[a: INT]",
            "tests": [
                {"inputs": {"xs": [{"a": 1}, {"a": 2}, {"a": 3}]}, "expected": [{"a": 2}, {"a": 3}]},
                {"inputs": {"xs": [{"a": 0}]}, "expected": []}
            ]}]}"#,
        )
        .unwrap()
        .tasks
        .remove(0)
    }

    fn flags(src: &str) -> (bool, bool, bool) {
        let r = evaluate_sample(&task(), "s", src, &EvalConfig::default());
        (r.parse, r.execute, r.correct)
    }

    const HEAD: &str = "PIPELINE p:\nINPUT xs: TABLE[a: INT]\nSTEP s:\n";

    #[test]
    fn scores_by_stage() {
        assert_eq!(flags(&format!("{HEAD}FILTER xs WHERE a > 1 INTO r\nOUTPUT r")), (true, true, true));
        assert_eq!(flags(&format!("{HEAD}FILTER xs WHERE a > INTO r\nOUTPUT r")), (false, false, false));
        assert_eq!(flags(&format!("{HEAD}FILTER xs WHERE b > 1 INTO r\nOUTPUT r")), (false, false, false));
        assert_eq!(flags(&format!("{HEAD}FILTER xs WHERE a / 0 > 1 INTO r\nOUTPUT r")), (true, false, false));
        assert_eq!(flags(&format!("{HEAD}FILTER xs WHERE a > 0 INTO r\nOUTPUT r")), (true, true, false));
    }

    #[test]
    fn io_is_sandboxed() {
        let src = format!("{HEAD}READ \"x.json\" FORMAT JSON SCHEMA TABLE[a: INT] INTO r\nOUTPUT r");
        let r = evaluate_sample(&task(), "s", &src, &EvalConfig::default());
        assert!(r.parse && !r.execute);
        assert!(r.detail.unwrap().contains("sandboxed"));
    }

    #[test]
    fn runaway_loops_hit_the_cap() {
        let src = format!("{HEAD}WHILE TRUE DO\nDISTINCT xs INTO d\nEND_WHILE\nDISTINCT xs INTO r\nOUTPUT r");
        let config = EvalConfig { while_cap: 50, ..EvalConfig::default() };
        let r = evaluate_sample(&task(), "s", &src, &config);
        assert!(r.parse && !r.execute, "{r:?}");
        let config = EvalConfig { timeout: Duration::from_millis(20), ..EvalConfig::default() };
        let r = evaluate_sample(&task(), "s", &src, &config);
        assert!(r.detail.unwrap().contains("Timeout"));
    }

    #[test]
    fn wrong_input_declaration_fails_execution() {
        let src = "PIPELINE p:\nINPUT xs: TABLE[a: STRING]\nSTEP s:\nDISTINCT xs INTO r\nOUTPUT r";
        assert_eq!(flags(src), (true, false, false));
    }

    #[test]
    fn accuracy_threshold() {
        let sample = |correct| SampleResult { sample: String::new(), parse: true, execute: true, correct, detail: None };
        let of = |k: usize, n: usize| (0..n).map(|i| sample(i < k)).collect::<Vec<_>>();
        assert!(task_accuracy(&of(5, 10)));
        assert!(!task_accuracy(&of(4, 10)));
        assert!(task_accuracy(&of(1, 1)));
        assert!(task_accuracy(&of(1, 2)));
        assert!(!task_accuracy(&of(1, 3)));
        assert!(!task_accuracy(&[]));
    }
}
