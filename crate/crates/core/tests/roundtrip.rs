use anka_core::syntax::parse;
use anka_core::validate;
use anka_testkit::{checks, corpus};

#[test]
fn corpus_covers_every_statement_twice() {
    let entries = corpus::load();
    assert!(entries.len() >= 40, "only {} corpus pipelines", entries.len());
    let asts: Vec<_> = entries.iter().map(|(n, s)| parse(s).unwrap_or_else(|e| panic!("{n}: {e}"))).collect();
    let thin: Vec<_> = corpus::coverage(&asts).into_iter().filter(|(_, n)| *n < 2).collect();
    assert!(thin.is_empty(), "under-covered: {thin:?}");
}

#[test]
fn corpus_pipelines_validate() {
    for (name, src) in corpus::load() {
        let ast = parse(&src).unwrap();
        if let Err(errs) = validate(&ast) {
            panic!("{name}: {errs:?}");
        }
    }
}

#[test]
fn corpus_round_trips_through_the_formatter() {
    for (name, src) in corpus::load() {
        checks::round_trip(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn generated_pipelines_round_trip() {
    let mut r = checks::rng(99);
    for _ in 0..300 {
        let g = anka_testkit::pipelines::random_pipeline(&mut r);
        checks::round_trip(&g.source).unwrap_or_else(|e| panic!("{e}\n{}", g.source));
    }
}
