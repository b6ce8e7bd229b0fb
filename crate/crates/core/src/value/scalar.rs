use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{NaiveDate, NaiveDateTime};
use serde::Serialize;

use super::decimal::Decimal;

pub const DATE_FORMAT: &str = "%Y-%m-%d";
pub const DATETIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

/// Column type. The language has exactly these six.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ValueType {
    Int,
    String,
    Decimal,
    Bool,
    Date,
    DateTime,
}

impl ValueType {
    pub const ALL: [ValueType; 6] = [
        ValueType::Int,
        ValueType::String,
        ValueType::Decimal,
        ValueType::Bool,
        ValueType::Date,
        ValueType::DateTime,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Int => "INT",
            ValueType::String => "STRING",
            ValueType::Decimal => "DECIMAL",
            ValueType::Bool => "BOOL",
            ValueType::Date => "DATE",
            ValueType::DateTime => "DATETIME",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ValueType> {
        ValueType::ALL.into_iter().find(|t| t.keyword() == s)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Int | ValueType::Decimal)
    }

    /// Whether values of the two types can be ordered against each other.
    pub fn comparable_with(self, other: ValueType) -> bool {
        self == other || (self.is_numeric() && other.is_numeric())
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A single cell.
#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Int(i64),
    Str(String),
    Decimal(Decimal),
    Bool(bool),
    Date(NaiveDate),
    DateTime(NaiveDateTime),
}

impl Value {
    /// `None` for null.
    pub fn value_type(&self) -> Option<ValueType> {
        Some(match self {
            Value::Null => return None,
            Value::Int(_) => ValueType::Int,
            Value::Str(_) => ValueType::String,
            Value::Decimal(_) => ValueType::Decimal,
            Value::Bool(_) => ValueType::Bool,
            Value::Date(_) => ValueType::Date,
            Value::DateTime(_) => ValueType::DateTime,
        })
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    /// Parses `s` as a value of type `ty` using the textual wire formats
    /// (ISO dates, plain decimals, `true`/`false`).
    pub fn parse_as(ty: ValueType, s: &str) -> Result<Value, String> {
        match ty {
            ValueType::Int => s
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|_| format!("{s:?} is not a valid INT")),
            ValueType::String => Ok(Value::Str(s.to_string())),
            ValueType::Decimal => s
                .parse::<Decimal>()
                .map(Value::Decimal)
                .map_err(|e| format!("{s:?} is not a valid DECIMAL: {e}")),
            ValueType::Bool => match s {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(format!("{s:?} is not a valid BOOL")),
            },
            ValueType::Date => NaiveDate::parse_from_str(s, DATE_FORMAT)
                .map(Value::Date)
                .map_err(|_| format!("{s:?} is not a valid DATE (YYYY-MM-DD)")),
            ValueType::DateTime => NaiveDateTime::parse_from_str(s, DATETIME_FORMAT)
                .map(Value::DateTime)
                .map_err(|_| format!("{s:?} is not a valid DATETIME (YYYY-MM-DDTHH:MM:SS)")),
        }
    }
}

/// Text form used by CSV and `TO_STRING`. Null renders as the empty string.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => f.write_str(s),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Date(d) => write!(f, "{}", d.format(DATE_FORMAT)),
            Value::DateTime(d) => write!(f, "{}", d.format(DATETIME_FORMAT)),
        }
    }
}

/// Result of [`compare_values`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Ordered(Ordering),
    Incomparable,
}

/// Orders two values of compatible type. INT and DECIMAL compare
/// numerically; null sorts after every non-null value and equals null.
/// Any other cross-type pair is incomparable.
pub fn compare_values(left: &Value, right: &Value) -> Comparison {
    use Value::*;
    let ord = match (left, right) {
        (Null, Null) => Ordering::Equal,
        (Null, _) => Ordering::Greater,
        (_, Null) => Ordering::Less,
        (Int(a), Int(b)) => a.cmp(b),
        (Int(a), Decimal(b)) => super::Decimal::from_i64(*a).cmp(b),
        (Decimal(a), Int(b)) => a.cmp(&super::Decimal::from_i64(*b)),
        (Decimal(a), Decimal(b)) => a.cmp(b),
        (Str(a), Str(b)) => a.cmp(b),
        (Bool(a), Bool(b)) => a.cmp(b),
        (Date(a), Date(b)) => a.cmp(b),
        (DateTime(a), DateTime(b)) => a.cmp(b),
        _ => return Comparison::Incomparable,
    };
    Comparison::Ordered(ord)
}

/// Structural equality: null equals null, INT 2 equals DECIMAL 2.0,
/// decimals compare by value.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        compare_values(self, other) == Comparison::Ordered(Ordering::Equal)
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Null => 0u8.hash(state),
            // INT and DECIMAL share a hash domain since they may compare equal.
            Value::Int(v) => {
                1u8.hash(state);
                Decimal::from_i64(*v).hash(state);
            }
            Value::Decimal(d) => {
                1u8.hash(state);
                d.hash(state);
            }
            Value::Str(s) => {
                2u8.hash(state);
                s.hash(state);
            }
            Value::Bool(b) => {
                3u8.hash(state);
                b.hash(state);
            }
            Value::Date(d) => {
                4u8.hash(state);
                d.hash(state);
            }
            Value::DateTime(d) => {
                5u8.hash(state);
                d.hash(state);
            }
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<Decimal> for Value {
    fn from(v: Decimal) -> Self {
        Value::Decimal(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<NaiveDate> for Value {
    fn from(v: NaiveDate) -> Self {
        Value::Date(v)
    }
}
