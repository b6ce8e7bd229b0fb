use std::time::Duration;

use anka_core::syntax::parse;
use anka_testkit::{checks, corpus};

#[test]
fn parser_is_total_on_mutated_and_random_input() {
    let seeds: Vec<String> = corpus::load().into_iter().map(|(_, s)| s).collect();
    let out = checks::parser_totality(&seeds, 3000, 17, Duration::from_secs(1));
    assert!(
        out.all_passed(),
        "{}/{}\n{}",
        out.passed,
        out.total,
        out.failures.join("\n")
    );
}

#[test]
fn deep_nesting_is_an_error_not_a_stack_overflow() {
    let open = "(".repeat(100_000);
    let src = format!(
        "PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\nFILTER t WHERE {open}1 INTO r\nOUTPUT r"
    );
    assert!(parse(&src).is_err());
    let ifs = "IF TRUE THEN\n".repeat(10_000);
    let src = format!("PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\n{ifs}\nOUTPUT r");
    assert!(parse(&src).is_err());
}

#[test]
fn error_points_at_offending_token() {
    let err = parse(
        "PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\n  FILTER t WHERE a > INTO r\nOUTPUT r",
    )
    .unwrap_err();
    assert_eq!((err.location.line, err.location.column), (4, 22));
}

#[test]
fn deepest_accepted_nesting_survives_every_stage() {
    use anka_core::{format_ast, run_pipeline, validate, RecordingIo, RunOptions, Table};
    // Blocks and parentheses share one nesting budget.
    let max = anka_core::syntax::MAX_NESTING;
    for (ifs, parens) in [(max / 2 - 1, max / 2 - 1), (max - 2, 0), (0, max - 2)] {
        let cond = format!("{}TRUE{}", "(".repeat(parens), ")".repeat(parens));
        let src = format!(
        "PIPELINE p:\nINPUT t: TABLE[a: INT]\nSTEP s:\n{}FILTER t WHERE {cond} INTO r\n{}DISTINCT t INTO out\nOUTPUT out",
        "IF TRUE THEN\n".repeat(ifs),
        "END_IF\n".repeat(ifs)
    );
        let ast = parse(&src).unwrap();
        validate(&ast).unwrap();
        checks::round_trip(&format_ast(&ast)).unwrap();
        let inputs = [(
            "t".to_string(),
            Table::empty(anka_core::Schema::of(&[("a", anka_core::ValueType::Int)])),
        )]
        .into();
        run_pipeline(&ast, &inputs, &RecordingIo::new(), &RunOptions::default()).unwrap();
    }
}
