//! Typed cells, schemas and immutable tables.

mod decimal;
mod scalar;
mod table;

pub use decimal::{Decimal, DecimalError, DIVISION_EXTRA_SCALE, MAX_SCALE};
pub use scalar::{compare_values, Comparison, Value, ValueType, DATETIME_FORMAT, DATE_FORMAT};
pub use table::{
    compare_rows, make_table, table_equal, table_equal_unordered, Field, Row, Schema, Table,
    TableError,
};
