//! Scores candidate Anka programs against a task suite.
//!
//! A suite is a JSON document of tasks (see [`suite`]). Candidates live in
//! `<candidates>/<task_id>/<sample>.anka`. Each sample gets three flags
//! (parse, execute, correct); a task is accurate when at least half of its
//! samples are correct.

pub mod evaluate;
pub mod report;
pub mod suite;

pub use evaluate::{evaluate_sample, task_accuracy, EvalConfig, SampleResult};
pub use report::{aggregate, run_suite, BenchConfig, RunReport, Summary, TaskReport};
pub use suite::{load_suite, parse_suite, Category, Suite, SuiteError, TaskSpec, TestCase};
