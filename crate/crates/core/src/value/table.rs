use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::scalar::{compare_values, Comparison, Value, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Field {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ValueType,
}

impl Field {
    pub fn new(name: impl Into<String>, ty: ValueType) -> Self {
        Field { name: name.into(), ty }
    }
}

/// Ordered, uniquely named column list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Schema {
    fields: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("duplicate column {0:?} in schema")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} values, got {actual}")]
    ArityMismatch { row: usize, expected: usize, actual: usize },
    #[error("row {row}, column {column:?}: expected {expected}, got {actual}")]
    TypeMismatch { row: usize, column: String, expected: ValueType, actual: ValueType },
}

impl Schema {
    pub fn new(fields: Vec<Field>) -> Result<Self, TableError> {
        for (i, f) in fields.iter().enumerate() {
            if fields[..i].iter().any(|g| g.name == f.name) {
                return Err(TableError::DuplicateColumn(f.name.clone()));
            }
        }
        Ok(Schema { fields })
    }

    /// Convenience for tests and fixtures; panics on duplicate names.
    pub fn of(fields: &[(&str, ValueType)]) -> Self {
        Schema::new(fields.iter().map(|(n, t)| Field::new(*n, *t)).collect())
            .expect("duplicate column in Schema::of")
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.name.as_str())
    }
}

impl fmt::Display for Schema {
    /// `TABLE[a: INT, b: STRING]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TABLE[")?;
        for (i, field) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", field.name, field.ty)?;
        }
        f.write_str("]")
    }
}

pub type Row = Vec<Value>;

/// A schema plus rows. Construction validates every cell; afterwards the
/// table is never mutated in place.
#[derive(Debug, Clone)]
pub struct Table {
    schema: Schema,
    rows: Vec<Row>,
}

impl Table {
    /// Validates arity and cell types; null is admitted in any column.
    pub fn new(schema: Schema, rows: Vec<Row>) -> Result<Self, TableError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(TableError::ArityMismatch {
                    row: i,
                    expected: schema.len(),
                    actual: row.len(),
                });
            }
            for (value, field) in row.iter().zip(schema.fields()) {
                if let Some(actual) = value.value_type() {
                    if actual != field.ty {
                        return Err(TableError::TypeMismatch {
                            row: i,
                            column: field.name.clone(),
                            expected: field.ty,
                            actual,
                        });
                    }
                }
            }
        }
        Ok(Table { schema, rows })
    }

    pub fn empty(schema: Schema) -> Self {
        Table { schema, rows: Vec::new() }
    }

    /// Skips validation. Callers guarantee the invariants, which debug
    /// builds still check.
    pub(crate) fn from_parts_unchecked(schema: Schema, rows: Vec<Row>) -> Self {
        debug_assert!(Table::new(schema.clone(), rows.clone()).is_ok());
        Table { schema, rows }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_parts(self) -> (Schema, Vec<Row>) {
        (self.schema, self.rows)
    }

    pub fn column(&self, name: &str) -> Option<impl Iterator<Item = &Value>> {
        let idx = self.schema.index_of(name)?;
        Some(self.rows.iter().map(move |r| &r[idx]))
    }
}

/// Shorthand for [`Table::new`].
pub fn make_table(schema: Schema, rows: Vec<Row>) -> Result<Table, TableError> {
    Table::new(schema, rows)
}

/// Order-sensitive equality: same schema (names, types, order) and pairwise
/// equal rows. Decimals compare by value; null equals null.
pub fn table_equal(left: &Table, right: &Table) -> bool {
    left.schema == right.schema && left.rows == right.rows
}

/// Row-order-insensitive equality: same schema and equal row multisets.
pub fn table_equal_unordered(left: &Table, right: &Table) -> bool {
    if left.schema != right.schema || left.rows.len() != right.rows.len() {
        return false;
    }
    let mut a: Vec<&Row> = left.rows.iter().collect();
    let mut b: Vec<&Row> = right.rows.iter().collect();
    a.sort_by(|x, y| compare_rows(x, y));
    b.sort_by(|x, y| compare_rows(x, y));
    a == b
}

/// Lexicographic row order for rows of one schema.
pub fn compare_rows(a: &Row, b: &Row) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match compare_values(x, y) {
            Comparison::Ordered(Ordering::Equal) => continue,
            Comparison::Ordered(o) => return o,
            // Unreachable for same-schema rows; keep the order total anyway.
            Comparison::Incomparable => {
                let o = x.value_type().cmp(&y.value_type());
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
    }
    a.len().cmp(&b.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_schema() -> Schema {
        Schema::of(&[("a", ValueType::Int)])
    }

    #[test]
    fn empty_table() {
        let t = make_table(int_schema(), vec![]).unwrap();
        assert_eq!(t.len(), 0);
    }

    #[test]
    fn rows_keep_order() {
        let t = make_table(int_schema(), vec![vec![1.into()], vec![2.into()]]).unwrap();
        let col: Vec<_> = t.column("a").unwrap().cloned().collect();
        assert_eq!(col, vec![Value::Int(1), Value::Int(2)]);
    }

    #[test]
    fn type_mismatch_names_cell() {
        let err = make_table(int_schema(), vec![vec![Value::str("x")]]).unwrap_err();
        assert_eq!(
            err,
            TableError::TypeMismatch {
                row: 0,
                column: "a".into(),
                expected: ValueType::Int,
                actual: ValueType::String
            }
        );
    }

    #[test]
    fn arity_mismatch_names_row() {
        let err = make_table(int_schema(), vec![vec![1.into()], vec![]]).unwrap_err();
        assert_eq!(err, TableError::ArityMismatch { row: 1, expected: 1, actual: 0 });
    }

    #[test]
    fn null_allowed_anywhere() {
        assert!(make_table(int_schema(), vec![vec![Value::Null]]).is_ok());
    }

    #[test]
    fn duplicate_column_rejected() {
        let f = vec![Field::new("a", ValueType::Int), Field::new("a", ValueType::Int)];
        assert!(matches!(Schema::new(f), Err(TableError::DuplicateColumn(_))));
    }

    #[test]
    fn equality_is_order_sensitive() {
        let s = int_schema();
        let a = make_table(s.clone(), vec![vec![1.into()], vec![2.into()]]).unwrap();
        let b = make_table(s.clone(), vec![vec![2.into()], vec![1.into()]]).unwrap();
        assert!(table_equal(&Table::empty(s.clone()), &Table::empty(s)));
        assert!(!table_equal(&a, &b));
        assert!(table_equal_unordered(&a, &b));
    }

    #[test]
    fn equality_is_column_order_sensitive() {
        let ab = Schema::of(&[("a", ValueType::Int), ("b", ValueType::Int)]);
        let ba = Schema::of(&[("b", ValueType::Int), ("a", ValueType::Int)]);
        let x = make_table(ab, vec![vec![1.into(), 1.into()]]).unwrap();
        let y = make_table(ba, vec![vec![1.into(), 1.into()]]).unwrap();
        assert!(!table_equal(&x, &y));
    }

    #[test]
    fn schema_display() {
        let s = Schema::of(&[("a", ValueType::Int), ("when", ValueType::DateTime)]);
        assert_eq!(s.to_string(), "TABLE[a: INT, when: DATETIME]");
    }
}
