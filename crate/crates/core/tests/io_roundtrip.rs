use anka_core::io::{table_from_csv, table_from_json, table_to_csv, table_to_json};
use anka_core::value::{table_equal, Schema, ValueType};
use anka_testkit::checks;

#[test]
fn json_and_csv_round_trip_random_tables() {
    let (json, csv) = checks::io_round_trips(500, 21);
    assert!(json.all_passed(), "{:?}", json.failures);
    assert!(csv.all_passed(), "{:?}", csv.failures);
}

#[test]
fn csv_with_quotes_and_newlines() {
    let schema = Schema::of(&[("s", ValueType::String), ("n", ValueType::Int)]);
    let text = b"s,n\n\"a,\"\"b\"\"\nc\",1\n,\n";
    let t = table_from_csv(text, &schema).unwrap();
    assert_eq!(t.rows()[0][0].to_string(), "a,\"b\"\nc");
    assert_eq!(t.rows()[1][0].to_string(), "");
    assert!(t.rows()[1][1].is_null());
    assert!(table_equal(&table_from_csv(&table_to_csv(&t), &schema).unwrap(), &t));
}

#[test]
fn json_decimals_keep_their_scale() {
    let schema = Schema::of(&[("d", ValueType::Decimal)]);
    let t = table_from_json(br#"[{"d": "1.50"}, {"d": 2.250}, {"d": null}]"#, &schema).unwrap();
    let text = String::from_utf8(table_to_json(&t)).unwrap();
    assert!(text.contains("\"1.50\"") && text.contains("\"2.250\""), "{text}");
}

#[test]
fn json_type_errors_name_row_and_field() {
    let schema = Schema::of(&[("n", ValueType::Int)]);
    let err = table_from_json(br#"[{"n": 1}, {"n": "x"}]"#, &schema).unwrap_err();
    assert!(err.to_string().contains("row 1, field n"), "{err}");
}
