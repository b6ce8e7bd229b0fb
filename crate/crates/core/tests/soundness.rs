use anka_testkit::checks;

#[test]
fn validated_pipelines_run_with_the_inferred_schema() {
    let out = checks::validator_soundness(400, 5);
    assert!(out.all_passed(), "{}/{}\n{}", out.passed, out.total, out.failures.join("\n---\n"));
}
