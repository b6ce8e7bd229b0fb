//! Scalar functions callable from expressions. Signatures are shared by the
//! validator (typing) and the interpreter (evaluation). Every builtin returns
//! null when any argument is null.

use chrono::Datelike;

use crate::interp::RuntimeErrorKind;
use crate::value::{Decimal, Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Concat,
    Upper,
    Lower,
    Trim,
    Length,
    Substring,
    Replace,
    ToString,
    ToInt,
    ToDecimal,
    Year,
    Month,
    Day,
    Round,
    Abs,
}

/// Failure signature for argument checks: the message names the offending
/// argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureError {
    Arity { expected: &'static str, actual: usize },
    ArgType { index: usize, expected: &'static str, actual: ValueType },
}

impl std::fmt::Display for SignatureError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SignatureError::Arity { expected, actual } => {
                write!(f, "expects {expected} argument(s), got {actual}")
            }
            SignatureError::ArgType { index, expected, actual } => {
                write!(f, "argument {} must be {expected}, got {actual}", index + 1)
            }
        }
    }
}

impl Builtin {
    pub const ALL: [Builtin; 15] = [
        Builtin::Concat,
        Builtin::Upper,
        Builtin::Lower,
        Builtin::Trim,
        Builtin::Length,
        Builtin::Substring,
        Builtin::Replace,
        Builtin::ToString,
        Builtin::ToInt,
        Builtin::ToDecimal,
        Builtin::Year,
        Builtin::Month,
        Builtin::Day,
        Builtin::Round,
        Builtin::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Concat => "CONCAT",
            Builtin::Upper => "UPPER",
            Builtin::Lower => "LOWER",
            Builtin::Trim => "TRIM",
            Builtin::Length => "LENGTH",
            Builtin::Substring => "SUBSTRING",
            Builtin::Replace => "REPLACE",
            Builtin::ToString => "TO_STRING",
            Builtin::ToInt => "TO_INT",
            Builtin::ToDecimal => "TO_DECIMAL",
            Builtin::Year => "YEAR",
            Builtin::Month => "MONTH",
            Builtin::Day => "DAY",
            Builtin::Round => "ROUND",
            Builtin::Abs => "ABS",
        }
    }

    pub fn lookup(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Result type for the given argument types.
    pub fn result_type(self, args: &[ValueType]) -> Result<ValueType, SignatureError> {
        use ValueType as T;
        let arity = |n: usize, expected: &'static str| {
            if args.len() == n {
                Ok(())
            } else {
                Err(SignatureError::Arity { expected, actual: args.len() })
            }
        };
        let want = |index: usize, ok: &dyn Fn(T) -> bool, expected: &'static str| {
            if ok(args[index]) {
                Ok(())
            } else {
                Err(SignatureError::ArgType { index, expected, actual: args[index] })
            }
        };
        let string = |t: T| t == T::String;
        let int = |t: T| t == T::Int;
        let numeric = |t: T| t.is_numeric();
        let convertible = |t: T| t == T::String || t.is_numeric();
        let temporal = |t: T| matches!(t, T::Date | T::DateTime);
        match self {
            Builtin::Concat => {
                if args.len() < 2 {
                    return Err(SignatureError::Arity { expected: "at least 2", actual: args.len() });
                }
                for i in 0..args.len() {
                    want(i, &string, "STRING")?;
                }
                Ok(T::String)
            }
            Builtin::Upper | Builtin::Lower | Builtin::Trim => {
                arity(1, "1")?;
                want(0, &string, "STRING")?;
                Ok(T::String)
            }
            Builtin::Length => {
                arity(1, "1")?;
                want(0, &string, "STRING")?;
                Ok(T::Int)
            }
            Builtin::Substring => {
                arity(3, "3")?;
                want(0, &string, "STRING")?;
                want(1, &int, "INT")?;
                want(2, &int, "INT")?;
                Ok(T::String)
            }
            Builtin::Replace => {
                arity(3, "3")?;
                for i in 0..3 {
                    want(i, &string, "STRING")?;
                }
                Ok(T::String)
            }
            Builtin::ToString => {
                arity(1, "1")?;
                Ok(T::String)
            }
            Builtin::ToInt => {
                arity(1, "1")?;
                want(0, &convertible, "STRING, INT or DECIMAL")?;
                Ok(T::Int)
            }
            Builtin::ToDecimal => {
                arity(1, "1")?;
                want(0, &convertible, "STRING, INT or DECIMAL")?;
                Ok(T::Decimal)
            }
            Builtin::Year | Builtin::Month | Builtin::Day => {
                arity(1, "1")?;
                want(0, &temporal, "DATE or DATETIME")?;
                Ok(T::Int)
            }
            Builtin::Round => {
                arity(2, "2")?;
                want(0, &numeric, "INT or DECIMAL")?;
                want(1, &int, "INT")?;
                Ok(T::Decimal)
            }
            Builtin::Abs => {
                arity(1, "1")?;
                want(0, &numeric, "INT or DECIMAL")?;
                Ok(args[0])
            }
        }
    }

    /// Evaluates on already-typechecked arguments.
    pub fn eval(self, args: &[Value]) -> Result<Value, (RuntimeErrorKind, String)> {
        if args.iter().any(Value::is_null) {
            return Ok(Value::Null);
        }
        let conv = |msg: String| (RuntimeErrorKind::ConversionError, msg);
        let internal = || {
            (
                RuntimeErrorKind::Internal,
                format!("{} called with ill-typed arguments", self.name()),
            )
        };
        let s = |i: usize| match &args[i] {
            Value::Str(s) => Ok(s.as_str()),
            _ => Err(internal()),
        };
        let n = |i: usize| match &args[i] {
            Value::Int(v) => Ok(*v),
            _ => Err(internal()),
        };
        Ok(match self {
            Builtin::Concat => {
                let mut out = String::new();
                for i in 0..args.len() {
                    out.push_str(s(i)?);
                }
                Value::Str(out)
            }
            Builtin::Upper => Value::Str(s(0)?.to_uppercase()),
            Builtin::Lower => Value::Str(s(0)?.to_lowercase()),
            Builtin::Trim => Value::Str(s(0)?.trim().to_string()),
            Builtin::Length => Value::Int(s(0)?.chars().count() as i64),
            Builtin::Substring => {
                let (start, len) = (n(1)?, n(2)?);
                if start < 0 || len < 0 {
                    return Err(conv(format!(
                        "SUBSTRING start and length must be non-negative, got {start} and {len}"
                    )));
                }
                Value::Str(s(0)?.chars().skip(start as usize).take(len as usize).collect())
            }
            Builtin::Replace => {
                let (text, from, to) = (s(0)?, s(1)?, s(2)?);
                if from.is_empty() {
                    Value::Str(text.to_string())
                } else {
                    Value::Str(text.replace(from, to))
                }
            }
            Builtin::ToString => Value::Str(args[0].to_string()),
            Builtin::ToInt => match &args[0] {
                Value::Int(v) => Value::Int(*v),
                Value::Decimal(d) => Value::Int(
                    d.trunc_to_i64().ok_or_else(|| conv(format!("{d} does not fit in INT")))?,
                ),
                Value::Str(text) => Value::Int(
                    text.trim()
                        .parse::<i64>()
                        .map_err(|_| conv(format!("cannot convert {text:?} to INT")))?,
                ),
                _ => return Err(internal()),
            },
            Builtin::ToDecimal => match &args[0] {
                Value::Int(v) => Value::Decimal(Decimal::from_i64(*v)),
                Value::Decimal(d) => Value::Decimal(*d),
                Value::Str(text) => Value::Decimal(
                    text.trim()
                        .parse::<Decimal>()
                        .map_err(|_| conv(format!("cannot convert {text:?} to DECIMAL")))?,
                ),
                _ => return Err(internal()),
            },
            Builtin::Year | Builtin::Month | Builtin::Day => {
                let date = match &args[0] {
                    Value::Date(d) => *d,
                    Value::DateTime(d) => d.date(),
                    _ => return Err(internal()),
                };
                Value::Int(match self {
                    Builtin::Year => date.year() as i64,
                    Builtin::Month => date.month() as i64,
                    _ => date.day() as i64,
                })
            }
            Builtin::Round => {
                let digits = n(1)?;
                if !(0..=crate::value::MAX_SCALE as i64).contains(&digits) {
                    return Err(conv(format!(
                        "ROUND digits must be between 0 and {}, got {digits}",
                        crate::value::MAX_SCALE
                    )));
                }
                let d = match &args[0] {
                    Value::Int(v) => Decimal::from_i64(*v),
                    Value::Decimal(d) => *d,
                    _ => return Err(internal()),
                };
                let rounded = d.round_to(digits as u32);
                // Pad so ROUND(x, 2) always prints two fractional digits.
                let padded = if rounded.scale() < digits as u32 {
                    rounded.rescale_up(digits as u32).map_err(|e| conv(e.to_string()))?
                } else {
                    rounded
                };
                Value::Decimal(padded)
            }
            Builtin::Abs => match &args[0] {
                Value::Int(v) => Value::Int(
                    v.checked_abs().ok_or_else(|| conv("integer overflow in ABS".into()))?,
                ),
                Value::Decimal(d) if d.is_negative() => {
                    Value::Decimal(d.checked_neg().map_err(|e| conv(e.to_string()))?)
                }
                Value::Decimal(d) => Value::Decimal(*d),
                _ => return Err(internal()),
            },
        })
    }
}
