use serde_json::{Map, Number, Value as Json};

use super::FormatError;
use crate::value::{Decimal, Schema, Table, Value, ValueType};

/// Parses a JSON array of objects against `schema`. Missing keys and
/// `null` become null; keys not in the schema are ignored. DECIMAL cells
/// accept a number or a numeric string.
pub fn table_from_json(bytes: &[u8], schema: &Schema) -> Result<Table, FormatError> {
    let doc: Json = serde_json::from_slice(bytes)
        .map_err(|e| FormatError(format!("invalid JSON: {e}")))?;
    let Json::Array(items) = doc else {
        return Err(FormatError("expected a JSON array of objects".into()));
    };
    let mut rows = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let Json::Object(obj) = item else {
            return Err(FormatError(format!("row {i}: expected an object")));
        };
        let row = schema
            .fields()
            .iter()
            .map(|f| {
                let cell = obj.get(&f.name).unwrap_or(&Json::Null);
                cell_from_json(cell, f.ty)
                    .map_err(|msg| FormatError(format!("row {i}, field {}: {msg}", f.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Table::new(schema.clone(), rows).map_err(|e| FormatError(e.to_string()))
}

fn cell_from_json(cell: &Json, ty: ValueType) -> Result<Value, String> {
    let wrong = || format!("expected {ty}, got {cell}");
    match (ty, cell) {
        (_, Json::Null) => Ok(Value::Null),
        (ValueType::Int, Json::Number(n)) => n.as_i64().map(Value::Int).ok_or_else(wrong),
        (ValueType::Decimal, Json::Number(n)) => {
            n.to_string().parse::<Decimal>().map(Value::Decimal).map_err(|e| e.to_string())
        }
        (ValueType::Decimal, Json::String(s)) => Value::parse_as(ty, s.trim()),
        (ValueType::Bool, Json::Bool(b)) => Ok(Value::Bool(*b)),
        (ValueType::String | ValueType::Date | ValueType::DateTime, Json::String(s)) => {
            Value::parse_as(ty, s)
        }
        _ => Err(wrong()),
    }
}

fn cell_to_json(v: &Value) -> Json {
    match v {
        Value::Null => Json::Null,
        Value::Int(i) => Json::Number(Number::from(*i)),
        Value::Bool(b) => Json::Bool(*b),
        Value::Str(s) => Json::String(s.clone()),
        Value::Decimal(_) | Value::Date(_) | Value::DateTime(_) => Json::String(v.to_string()),
    }
}

/// Serializes as a pretty-printed array of objects with keys in schema
/// order. DECIMAL cells are strings so no precision is lost.
pub fn table_to_json(table: &Table) -> Vec<u8> {
    let names: Vec<&str> = table.schema().names().collect();
    let rows: Vec<Json> = table
        .rows()
        .iter()
        .map(|row| {
            let obj: Map<String, Json> =
                names.iter().zip(row).map(|(n, v)| (n.to_string(), cell_to_json(v))).collect();
            Json::Object(obj)
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&Json::Array(rows)).expect("JSON values serialize");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::table_equal;

    fn ints() -> Schema {
        Schema::of(&[("a", ValueType::Int)])
    }

    #[test]
    fn reads_objects() {
        let t = table_from_json(br#"[{"a":1},{"a":2}]"#, &ints()).unwrap();
        assert_eq!(t.rows(), &[vec![Value::Int(1)], vec![Value::Int(2)]]);
        assert!(table_from_json(b"[]", &ints()).unwrap().is_empty());
    }

    #[test]
    fn conversion_error_names_row_and_field() {
        let err = table_from_json(br#"[{"a":"x"}]"#, &ints()).unwrap_err();
        assert!(err.0.starts_with("row 0, field a"), "{err}");
        assert!(table_from_json(br#"[{"a":1.5}]"#, &ints()).is_err());
        assert!(table_from_json(br#"{"a":1}"#, &ints()).is_err());
    }

    #[test]
    fn missing_key_is_null_and_decimal_forms() {
        let s = Schema::of(&[("a", ValueType::Int), ("d", ValueType::Decimal)]);
        let t = table_from_json(br#"[{"d":1.10},{"a":3,"d":"2.500"},{"a":null,"d":0.1e1}]"#, &s)
            .unwrap();
        assert_eq!(t.rows()[0][0], Value::Null);
        assert_eq!(t.rows()[0][1].to_string(), "1.10");
        assert_eq!(t.rows()[1][1].to_string(), "2.500");
        assert_eq!(t.rows()[2][1], Value::Decimal(Decimal::from_i64(1)));
    }

    #[test]
    fn round_trip_all_types() {
        use chrono::NaiveDate;
        let s = Schema::of(&[
            ("i", ValueType::Int),
            ("s", ValueType::String),
            ("d", ValueType::Decimal),
            ("b", ValueType::Bool),
            ("dt", ValueType::Date),
            ("ts", ValueType::DateTime),
        ]);
        let date = NaiveDate::from_ymd_opt(2024, 2, 29).unwrap();
        let rows = vec![
            vec![
                Value::Int(-7),
                Value::str("q\"uo,te\n"),
                Value::Decimal("-0.0800".parse().unwrap()),
                Value::Bool(true),
                Value::Date(date),
                Value::DateTime(date.and_hms_opt(23, 59, 1).unwrap()),
            ],
            vec![Value::Null; 6],
        ];
        let t = Table::new(s.clone(), rows).unwrap();
        let json = table_to_json(&t);
        let back = table_from_json(&json, &s).unwrap();
        assert!(table_equal(&t, &back));
        assert_eq!(back.rows()[0][2].to_string(), "-0.0800");
        let text = String::from_utf8(json).unwrap();
        assert!(text.find("\"i\"").unwrap() < text.find("\"ts\"").unwrap());
    }
}
