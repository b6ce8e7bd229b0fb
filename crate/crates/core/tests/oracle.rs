use anka_testkit::checks;

#[test]
fn interpreter_matches_brute_force_oracle() {
    let mut failed = Vec::new();
    for (op, out) in checks::oracle_equivalence(200, 11) {
        if !out.all_passed() {
            failed.push(format!("{}: {}/{} {:#?}", op.keyword(), out.passed, out.total, out.failures));
        }
    }
    assert!(failed.is_empty(), "{}", failed.join("\n"));
}
