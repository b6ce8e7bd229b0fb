//! Random values, schemas and tables. Domains are deliberately small so
//! that duplicates, ties and join matches are common.

use anka_core::syntax::{format_literal, Literal};
use anka_core::value::{Decimal, Field, Row, Schema, Table, Value, ValueType};
use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;

/// Column names for generated left-hand tables.
pub const LEFT_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
/// Column names for generated right-hand tables; disjoint from the left.
pub const RIGHT_NAMES: [&str; 8] = ["p", "q", "r", "s", "t", "u", "v", "w"];

const STRING_ALPHABET: [&str; 10] = ["a", "b", "x", "Z", " ", ",", "\"", "\n", "é", "ß"];

/// Generation knobs.
#[derive(Debug, Clone, Copy)]
pub struct TableSpec {
    pub max_rows: usize,
    pub max_cols: usize,
    pub null_rate: f64,
    /// Allow null in STRING columns.
    pub null_strings: bool,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec { max_rows: 20, max_cols: 5, null_rate: 0.15, null_strings: true }
    }
}

pub fn value_type<R: Rng>(rng: &mut R) -> ValueType {
    *ValueType::ALL.choose(rng).unwrap()
}

pub fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
}

/// A non-null value of type `ty`.
pub fn value<R: Rng>(rng: &mut R, ty: ValueType) -> Value {
    match ty {
        ValueType::Int => {
            if rng.gen_bool(0.8) {
                Value::Int(rng.gen_range(-5..=5))
            } else {
                Value::Int(rng.gen_range(-1_000_000..=1_000_000))
            }
        }
        ValueType::Decimal => {
            let scale = rng.gen_range(0..=2);
            let mantissa = rng.gen_range(-600i128..=600);
            Value::Decimal(Decimal::new(mantissa, scale).unwrap())
        }
        ValueType::String => {
            let len = rng.gen_range(0..=3);
            Value::Str((0..len).map(|_| *STRING_ALPHABET.choose(rng).unwrap()).collect())
        }
        ValueType::Bool => Value::Bool(rng.gen()),
        ValueType::Date => Value::Date(base_date() + Duration::days(rng.gen_range(0..6))),
        ValueType::DateTime => {
            let day = base_date() + Duration::days(rng.gen_range(0..3));
            let secs = rng.gen_range(0..86_400);
            Value::DateTime(day.and_hms_opt(0, 0, 0).unwrap() + Duration::seconds(secs))
        }
    }
}

/// A non-null value whose literal text parses back to the same value:
/// DECIMAL literals always carry a fractional part.
pub fn literal<R: Rng>(rng: &mut R, ty: ValueType) -> Value {
    match value(rng, ty) {
        Value::Decimal(d) if d.scale() == 0 => Value::Decimal(d.rescale_up(1).unwrap()),
        v => v,
    }
}

pub fn cell<R: Rng>(rng: &mut R, ty: ValueType, spec: &TableSpec) -> Value {
    let nullable = ty != ValueType::String || spec.null_strings;
    if nullable && rng.gen_bool(spec.null_rate) {
        Value::Null
    } else {
        value(rng, ty)
    }
}

/// Between 1 and `max_cols` columns named from `names`, in random order.
pub fn schema_from<R: Rng>(rng: &mut R, names: &[&str], max_cols: usize) -> Schema {
    let n = rng.gen_range(1..=max_cols.min(names.len()));
    let mut pool = names.to_vec();
    pool.shuffle(rng);
    Schema::new(pool[..n].iter().map(|name| Field::new(*name, value_type(rng))).collect()).unwrap()
}

pub fn schema<R: Rng>(rng: &mut R, max_cols: usize) -> Schema {
    schema_from(rng, &LEFT_NAMES, max_cols)
}

pub fn row<R: Rng>(rng: &mut R, schema: &Schema, spec: &TableSpec) -> Row {
    schema.fields().iter().map(|f| cell(rng, f.ty, spec)).collect()
}

/// Up to `spec.max_rows` rows; about a third of tables repeat some rows.
pub fn table<R: Rng>(rng: &mut R, schema: &Schema, spec: &TableSpec) -> Table {
    let n = rng.gen_range(0..=spec.max_rows);
    let mut rows: Vec<Row> = Vec::with_capacity(n);
    let repeat = rng.gen_bool(0.35);
    for _ in 0..n {
        if repeat && !rows.is_empty() && rng.gen_bool(0.4) {
            let pick = rows[rng.gen_range(0..rows.len())].clone();
            rows.push(pick);
        } else {
            rows.push(row(rng, schema, spec));
        }
    }
    Table::new(schema.clone(), rows).unwrap()
}

pub fn random_table<R: Rng>(rng: &mut R, spec: &TableSpec) -> Table {
    let s = schema(rng, spec.max_cols);
    table(rng, &s, spec)
}

/// Source text for a non-null value.
pub fn literal_text(v: &Value) -> String {
    format_literal(&Literal::from_value(v).expect("null has no literal form"))
}

/// `TABLE[a: INT, ...]`.
pub fn table_type_text(schema: &Schema) -> String {
    schema.to_string()
}
