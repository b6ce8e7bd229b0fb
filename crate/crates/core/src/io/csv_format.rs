use super::FormatError;
use crate::value::{Schema, Table, Value, ValueType};

/// Parses RFC 4180 CSV whose header must list the schema's columns in
/// order. An empty field is null, except in STRING columns where it is the
/// empty string.
pub fn table_from_csv(bytes: &[u8], schema: &Schema) -> Result<Table, FormatError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let line = |pos: Option<&csv::Position>| pos.map_or(0, |p| p.line());
    let header = reader.headers().map_err(|e| FormatError(format!("line 1: {e}")))?.clone();
    let expected: Vec<&str> = schema.names().collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(FormatError(format!(
            "line 1: header [{}] does not match schema columns [{}]",
            header.iter().collect::<Vec<_>>().join(", "),
            expected.join(", ")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FormatError(format!("line {}: {e}", line(e.position()))))?;
        let ln = line(record.position());
        let row = record
            .iter()
            .zip(schema.fields())
            .map(|(text, f)| {
                if text.is_empty() && f.ty != ValueType::String {
                    return Ok(Value::Null);
                }
                Value::parse_as(f.ty, text)
                    .map_err(|msg| FormatError(format!("line {ln}, field {}: {msg}", f.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Table::new(schema.clone(), rows).map_err(|e| FormatError(e.to_string()))
}

/// Writes a header line then one record per row, LF-terminated. Null is
/// the empty field, so a null STRING cell reads back as "".
pub fn table_to_csv(table: &Table) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
        w.write_record(&rec).expect("writing to memory cannot fail")
    };
    write(&mut writer, table.schema().names().map(str::to_string).collect());
    for row in table.rows() {
        write(&mut writer, row.iter().map(Value::to_string).collect());
    }
    writer.into_inner().expect("in-memory writer flushes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::table_equal;

    fn ints() -> Schema {
        Schema::of(&[("a", ValueType::Int)])
    }

    #[test]
    fn reads_simple() {
        let t = table_from_csv(b"a\n1\n2\n", &ints()).unwrap();
        assert_eq!(t.len(), 2);
        let t = table_from_csv(b"a\r\n1\r\n\r\n", &ints()).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn header_mismatch() {
        let err = table_from_csv(b"b\n1\n", &ints()).unwrap_err();
        assert!(err.0.contains("header"), "{err}");
    }

    #[test]
    fn field_count_and_value_errors_have_lines() {
        let s = Schema::of(&[("a", ValueType::Int), ("b", ValueType::String)]);
        let err = table_from_csv(b"a,b\n1,x\n2\n", &s).unwrap_err();
        assert!(err.0.starts_with("line 3"), "{err}");
        let err = table_from_csv(b"a,b\n1,x\nz,y\n", &s).unwrap_err();
        assert!(err.0.starts_with("line 3, field a"), "{err}");
    }

    #[test]
    fn quoted_comma_round_trips() {
        let s = Schema::of(&[("s", ValueType::String), ("n", ValueType::Int)]);
        let t = Table::new(
            s.clone(),
            vec![vec![Value::str("a,b \"c\"\r\nd"), Value::Null], vec![Value::str(""), Value::Int(1)]],
        )
        .unwrap();
        let bytes = table_to_csv(&t);
        assert!(table_equal(&t, &table_from_csv(&bytes, &s).unwrap()));
    }

    #[test]
    fn single_empty_column_is_not_a_blank_line() {
        for ty in [ValueType::String, ValueType::Int] {
            let s = Schema::of(&[("x", ty)]);
            let cell = if ty == ValueType::String { Value::str("") } else { Value::Null };
            let t = Table::new(s.clone(), vec![vec![cell.clone()], vec![cell]]).unwrap();
            let back = table_from_csv(&table_to_csv(&t), &s).unwrap();
            assert!(table_equal(&t, &back), "{ty}");
        }
    }

    #[test]
    fn null_string_reads_back_empty() {
        let s = Schema::of(&[("s", ValueType::String), ("n", ValueType::Int)]);
        let t = Table::new(s.clone(), vec![vec![Value::Null, Value::Int(1)]]).unwrap();
        let back = table_from_csv(&table_to_csv(&t), &s).unwrap();
        assert_eq!(back.rows()[0][0], Value::str(""));
    }
}
