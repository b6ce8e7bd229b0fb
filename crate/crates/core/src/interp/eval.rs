//! Expression evaluation.

use std::cmp::Ordering;

use super::error::{EvalError, RuntimeErrorKind};
use crate::builtins::Builtin;
use crate::syntax::ast::{BinaryOp, Expr, ExprKind, UnaryOp};
use crate::value::{compare_values, Comparison, Decimal, DecimalError, Row, Schema, Value};

/// A FOR_EACH row variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowVar {
    pub name: String,
    pub schema: Schema,
    pub row: Row,
}

/// What an expression can see: the current row of the table being
/// processed (if any) and the enclosing FOR_EACH row variables.
#[derive(Clone, Copy)]
pub struct RowScope<'a> {
    pub table: Option<(&'a Schema, &'a [Value])>,
    pub vars: &'a [RowVar],
}

impl<'a> RowScope<'a> {
    pub fn scalar(vars: &'a [RowVar]) -> Self {
        RowScope { table: None, vars }
    }

    pub fn row(schema: &'a Schema, row: &'a [Value], vars: &'a [RowVar]) -> Self {
        RowScope { table: Some((schema, row)), vars }
    }
}

pub fn eval_expr(expr: &Expr, scope: RowScope<'_>) -> Result<Value, EvalError> {
    match &expr.kind {
        ExprKind::Literal { literal } => Ok(literal.to_value()),
        ExprKind::Column { name } => {
            let (schema, row) = scope
                .table
                .ok_or_else(|| EvalError::internal(format!("column {name} outside a table")))?;
            let idx = schema
                .index_of(&name.name)
                .ok_or_else(|| EvalError::internal(format!("unknown column {name}")))?;
            Ok(row[idx].clone())
        }
        ExprKind::Field { var, field } => {
            let rv = scope
                .vars
                .iter()
                .rev()
                .find(|v| v.name == var.name)
                .ok_or_else(|| EvalError::internal(format!("unknown row variable {var}")))?;
            let idx = rv
                .schema
                .index_of(&field.name)
                .ok_or_else(|| EvalError::internal(format!("unknown field {var}.{field}")))?;
            Ok(rv.row[idx].clone())
        }
        ExprKind::Unary { op, operand } => {
            let v = eval_expr(operand, scope)?;
            match (op, v) {
                (_, Value::Null) => Ok(Value::Null),
                (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (UnaryOp::Neg, Value::Int(i)) => i
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or_else(|| EvalError::conversion(format!("INT overflow negating {i}"))),
                (UnaryOp::Neg, Value::Decimal(d)) => {
                    d.checked_neg().map(Value::Decimal).map_err(decimal_error)
                }
                (op, v) => Err(EvalError::internal(format!("{op:?} applied to {v:?}"))),
            }
        }
        ExprKind::Binary { op: BinaryOp::And, lhs, rhs } => {
            let l = truth(eval_expr(lhs, scope)?)?;
            if l == Some(false) {
                return Ok(Value::Bool(false));
            }
            let r = truth(eval_expr(rhs, scope)?)?;
            Ok(match (l, r) {
                (_, Some(false)) => Value::Bool(false),
                (Some(true), Some(true)) => Value::Bool(true),
                _ => Value::Null,
            })
        }
        ExprKind::Binary { op: BinaryOp::Or, lhs, rhs } => {
            let l = truth(eval_expr(lhs, scope)?)?;
            if l == Some(true) {
                return Ok(Value::Bool(true));
            }
            let r = truth(eval_expr(rhs, scope)?)?;
            Ok(match (l, r) {
                (_, Some(true)) => Value::Bool(true),
                (Some(false), Some(false)) => Value::Bool(false),
                _ => Value::Null,
            })
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let l = eval_expr(lhs, scope)?;
            let r = eval_expr(rhs, scope)?;
            binary(*op, &l, &r)
        }
        ExprKind::Call { func, args } => {
            let builtin = Builtin::lookup(&func.name)
                .ok_or_else(|| EvalError::internal(format!("unknown function {func}")))?;
            let values = args.iter().map(|a| eval_expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
            builtin.eval(&values).map_err(EvalError::from)
        }
    }
}

/// `Some(b)` for a BOOL, `None` for null.
pub fn truth(v: Value) -> Result<Option<bool>, EvalError> {
    match v {
        Value::Bool(b) => Ok(Some(b)),
        Value::Null => Ok(None),
        other => Err(EvalError::internal(format!("expected BOOL, got {other:?}"))),
    }
}

pub(crate) fn decimal_error(e: DecimalError) -> EvalError {
    match e {
        DecimalError::DivisionByZero => {
            EvalError::new(RuntimeErrorKind::DivisionByZero, "division by zero")
        }
        other => EvalError::conversion(format!("DECIMAL {other}")),
    }
}

/// Arithmetic and comparison on already-evaluated operands.
pub fn binary(op: BinaryOp, l: &Value, r: &Value) -> Result<Value, EvalError> {
    if l.is_null() || r.is_null() {
        return Ok(Value::Null);
    }
    if op.is_comparison() {
        let ord = match compare_values(l, r) {
            Comparison::Ordered(o) => o,
            Comparison::Incomparable => {
                return Err(EvalError::internal(format!("cannot compare {l:?} with {r:?}")))
            }
        };
        let b = match op {
            BinaryOp::Eq => ord == Ordering::Equal,
            BinaryOp::Ne => ord != Ordering::Equal,
            BinaryOp::Lt => ord == Ordering::Less,
            BinaryOp::Le => ord != Ordering::Greater,
            BinaryOp::Gt => ord == Ordering::Greater,
            BinaryOp::Ge => ord != Ordering::Less,
            _ => unreachable!(),
        };
        return Ok(Value::Bool(b));
    }
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => {
            let (a, b) = (*a, *b);
            let res = match op {
                BinaryOp::Add => a.checked_add(b),
                BinaryOp::Sub => a.checked_sub(b),
                BinaryOp::Mul => a.checked_mul(b),
                BinaryOp::Div if b == 0 => {
                    return Err(EvalError::new(
                        RuntimeErrorKind::DivisionByZero,
                        format!("division by zero: {a} / 0"),
                    ))
                }
                BinaryOp::Div => a.checked_div(b),
                _ => return Err(EvalError::internal(format!("{op:?} on INT"))),
            };
            res.map(Value::Int).ok_or_else(|| {
                EvalError::conversion(format!("INT overflow in {a} {} {b}", op.symbol()))
            })
        }
        _ => {
            let (a, b) = (as_decimal(l)?, as_decimal(r)?);
            let res = match op {
                BinaryOp::Add => a.checked_add(&b),
                BinaryOp::Sub => a.checked_sub(&b),
                BinaryOp::Mul => a.checked_mul(&b),
                BinaryOp::Div => a.checked_div(&b),
                _ => return Err(EvalError::internal(format!("{op:?} on DECIMAL"))),
            };
            res.map(Value::Decimal).map_err(decimal_error)
        }
    }
}

fn as_decimal(v: &Value) -> Result<Decimal, EvalError> {
    match v {
        Value::Int(i) => Ok(Decimal::from_i64(*i)),
        Value::Decimal(d) => Ok(*d),
        other => Err(EvalError::internal(format!("expected a number, got {other:?}"))),
    }
}
