use std::path::{Path, PathBuf};

use anka_bench::{load_suite, run_suite, BenchConfig, Category, RunReport, Suite};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn suite() -> Suite {
    load_suite(&fixtures().join("suite.json")).unwrap()
}

fn run(dir: &str, jobs: usize) -> RunReport {
    let config = BenchConfig { jobs, ..BenchConfig::default() };
    run_suite(&suite(), &fixtures().join(dir), &config).unwrap()
}

#[test]
fn fixture_suite_has_two_tasks_per_category() {
    let s = suite();
    assert_eq!(s.tasks.len(), 16);
    for c in Category::ALL {
        assert_eq!(s.tasks.iter().filter(|t| t.category == c).count(), 2, "{c}");
    }
}

#[test]
fn correct_candidates_score_full_marks() {
    let r = run("correct", 1);
    for t in &r.tasks {
        assert_eq!(t.samples.len(), 1, "{}", t.id);
        assert!(t.samples[0].correct, "{}: {:?}", t.id, t.samples[0].detail);
    }
    for s in r.categories.iter().chain([&r.overall]) {
        assert_eq!(
            (s.parse_rate, s.execution_rate, s.correctness_rate, s.task_accuracy),
            (1.0, 1.0, 1.0, 1.0),
            "{}",
            s.label
        );
    }
}

#[test]
fn broken_variants_score_as_predicted() {
    let r = run("broken", 1);
    for t in &r.tasks {
        for s in &t.samples {
            let expected = match s.sample.as_str() {
                "sample_1" => (true, true, true),
                "syntax_error" => (false, false, false),
                "runtime_error" => (true, false, false),
                "wrong_output" => (true, true, false),
                other => panic!("unexpected sample {other}"),
            };
            assert_eq!((s.parse, s.execute, s.correct), expected, "{}/{}: {:?}", t.id, s.sample, s.detail);
        }
    }
    // Per category: one task with {correct, syntax} and one with
    // {correct, runtime, wrong}. 5 samples, 4 parse, 3 run, 2 correct;
    // the first task is accurate (1/2), the second is not (1/3).
    for s in r.categories.iter().chain([&r.overall]) {
        let k = s.tasks / 2;
        assert_eq!((s.samples, s.parsed, s.executed, s.correct, s.accurate_tasks), (5 * k, 4 * k, 3 * k, 2 * k, k));
        assert_eq!((s.parse_rate, s.execution_rate, s.correctness_rate, s.task_accuracy), (0.8, 0.6, 0.4, 0.5));
    }
}

#[test]
fn empty_candidate_dir_scores_zero_and_flags_every_task() {
    let r = run("no_such_dir", 1);
    assert!(r.tasks.iter().all(|t| t.flags == ["no samples"] && !t.accurate));
    let o = &r.overall;
    assert_eq!((o.parse_rate, o.execution_rate, o.correctness_rate, o.task_accuracy), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn reports_are_deterministic() {
    let a = run("broken", 1).to_json();
    let b = run("broken", 1).to_json();
    assert_eq!(a, b);
    let wide = run("broken", 8);
    assert_eq!(wide.to_json(), a);
}

#[test]
fn markdown_has_one_row_per_category_plus_overall() {
    let md = run("broken", 1).to_markdown();
    let rows = md.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| Category")).count();
    assert_eq!(rows, 9);
    assert!(md.contains("| **Overall** | 16 | 40 | 80.0% | 60.0% | 40.0% | 50.0% |"), "{md}");
}
