//! Table operations. Each takes its input tables by reference and returns a
//! fresh table; inputs are never modified.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use super::error::{EvalError, RuntimeErrorKind};
use super::eval::{decimal_error, eval_expr, truth, RowScope, RowVar};
use crate::syntax::ast::{AggregateFn, Expr, SortOrder};
use crate::validate::{typecheck, ExprScope};
use crate::value::{
    compare_values, Comparison, Decimal, Field, Row, Schema, Table, Value, ValueType,
    DIVISION_EXTRA_SCALE, MAX_SCALE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinKind {
    Inner,
    Left,
}

/// One `FN(arg) AS alias` of an AGGREGATE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateCall {
    pub func: AggregateFn,
    pub arg: Option<String>,
    pub alias: String,
}

fn index(schema: &Schema, col: &str) -> Result<usize, EvalError> {
    schema.index_of(col).ok_or_else(|| EvalError::internal(format!("unknown column {col}")))
}

fn schema(fields: Vec<Field>) -> Result<Schema, EvalError> {
    Schema::new(fields).map_err(|e| EvalError::internal(e.to_string()))
}

pub fn filter(src: &Table, predicate: &Expr, vars: &[RowVar]) -> Result<Table, EvalError> {
    let mut rows = Vec::new();
    for row in src.rows() {
        let keep = truth(eval_expr(predicate, RowScope::row(src.schema(), row, vars))?)?;
        if keep == Some(true) {
            rows.push(row.clone());
        }
    }
    Ok(Table::from_parts_unchecked(src.schema().clone(), rows))
}

pub fn select(src: &Table, columns: &[&str]) -> Result<Table, EvalError> {
    let idx = columns.iter().map(|c| index(src.schema(), c)).collect::<Result<Vec<_>, _>>()?;
    let fields = idx.iter().map(|&i| src.schema().fields()[i].clone()).collect();
    let rows = src.rows().iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect();
    Ok(Table::from_parts_unchecked(schema(fields)?, rows))
}

/// Keeps the first occurrence of each duplicated row.
pub fn distinct(src: &Table) -> Table {
    let mut seen: HashSet<&Row> = HashSet::new();
    let rows = src.rows().iter().filter(|r| seen.insert(r)).cloned().collect();
    Table::from_parts_unchecked(src.schema().clone(), rows)
}

pub fn map(src: &Table, column: &str, expr: &Expr, vars: &[RowVar]) -> Result<Table, EvalError> {
    let var_schemas: Vec<(String, Schema)> =
        vars.iter().map(|v| (v.name.clone(), v.schema.clone())).collect();
    let ty = typecheck(expr, &ExprScope { table: Some(src.schema()), row_vars: &var_schemas })
        .map_err(|e| EvalError::internal(e.message))?;
    let mut fields = src.schema().fields().to_vec();
    fields.push(Field::new(column, ty));
    let schema = schema(fields)?;
    let mut rows = Vec::with_capacity(src.len());
    for row in src.rows() {
        let v = eval_expr(expr, RowScope::row(src.schema(), row, vars))?;
        let mut out = row.clone();
        out.push(v);
        rows.push(out);
    }
    Ok(Table::from_parts_unchecked(schema, rows))
}

pub fn rename(src: &Table, pairs: &[(&str, &str)]) -> Result<Table, EvalError> {
    let mut fields = src.schema().fields().to_vec();
    for (from, to) in pairs {
        fields[index(src.schema(), from)?].name = to.to_string();
    }
    Ok(Table::from_parts_unchecked(schema(fields)?, src.rows().to_vec()))
}

pub fn drop(src: &Table, columns: &[&str]) -> Result<Table, EvalError> {
    for c in columns {
        index(src.schema(), c)?;
    }
    let keep: Vec<usize> = (0..src.schema().len())
        .filter(|&i| !columns.contains(&src.schema().fields()[i].name.as_str()))
        .collect();
    let names: Vec<&str> = keep.iter().map(|&i| src.schema().fields()[i].name.as_str()).collect();
    select(src, &names)
}

pub fn add_column(src: &Table, column: &str, value: &Value) -> Result<Table, EvalError> {
    let ty = value
        .value_type()
        .ok_or_else(|| EvalError::internal("ADD_COLUMN value must not be null"))?;
    let mut fields = src.schema().fields().to_vec();
    fields.push(Field::new(column, ty));
    let rows = src
        .rows()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.push(value.clone());
            out
        })
        .collect();
    Ok(Table::from_parts_unchecked(schema(fields)?, rows))
}

/// Groups appear in order of their key's first occurrence. Without
/// `group_by` the result has exactly one row, even for an empty input.
pub fn aggregate(
    src: &Table,
    group_by: &[&str],
    computes: &[AggregateCall],
) -> Result<Table, EvalError> {
    let key_idx =
        group_by.iter().map(|c| index(src.schema(), c)).collect::<Result<Vec<_>, _>>()?;
    let mut fields: Vec<Field> =
        key_idx.iter().map(|&i| src.schema().fields()[i].clone()).collect();
    let mut arg_idx = Vec::with_capacity(computes.len());
    for c in computes {
        let (idx, ty) = match (&c.arg, c.func) {
            (None, AggregateFn::Count) => (None, ValueType::Int),
            (Some(a), f) if f != AggregateFn::Count => {
                let i = index(src.schema(), a)?;
                let arg_ty = src.schema().fields()[i].ty;
                (Some(i), if f == AggregateFn::Avg { ValueType::Decimal } else { arg_ty })
            }
            _ => return Err(EvalError::internal(format!("bad arity for {}", c.func.name()))),
        };
        arg_idx.push(idx);
        fields.push(Field::new(c.alias.clone(), ty));
    }
    let schema = schema(fields)?;

    let mut groups: Vec<(Row, Vec<&Row>)> = Vec::new();
    let mut lookup: HashMap<Row, usize> = HashMap::new();
    for row in src.rows() {
        let key: Row = key_idx.iter().map(|&i| row[i].clone()).collect();
        let g = *lookup.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(row);
    }
    if key_idx.is_empty() && groups.is_empty() {
        groups.push((Vec::new(), Vec::new()));
    }

    let mut rows = Vec::with_capacity(groups.len());
    for (key, members) in groups {
        let mut out = key;
        for (c, idx) in computes.iter().zip(&arg_idx) {
            let values = || members.iter().map(|r| &r[idx.unwrap()]).filter(|v| !v.is_null());
            out.push(match c.func {
                AggregateFn::Count => Value::Int(members.len() as i64),
                AggregateFn::Sum => sum(values())?,
                AggregateFn::Avg => avg(values())?,
                AggregateFn::Min => extreme(values(), Ordering::Less)?,
                AggregateFn::Max => extreme(values(), Ordering::Greater)?,
            });
        }
        rows.push(out);
    }
    Ok(Table::from_parts_unchecked(schema, rows))
}

fn sum<'a>(values: impl Iterator<Item = &'a Value>) -> Result<Value, EvalError> {
    let mut acc = Value::Null;
    for v in values {
        acc = match (&acc, v) {
            (Value::Null, v) => v.clone(),
            (Value::Int(a), Value::Int(b)) => Value::Int(
                a.checked_add(*b)
                    .ok_or_else(|| EvalError::conversion("INT overflow in SUM"))?,
            ),
            (Value::Decimal(a), Value::Decimal(b)) => {
                Value::Decimal(a.checked_add(b).map_err(decimal_error)?)
            }
            _ => return Err(EvalError::internal(format!("SUM over {v:?}"))),
        };
    }
    Ok(acc)
}

/// Sum divided by the non-null count, at the sum's scale plus four.
fn avg<'a>(values: impl Iterator<Item = &'a Value>) -> Result<Value, EvalError> {
    let mut total = Decimal::ZERO;
    let mut count = 0i64;
    for v in values {
        let d = match v {
            Value::Int(i) => Decimal::from_i64(*i),
            Value::Decimal(d) => *d,
            _ => return Err(EvalError::internal(format!("AVG over {v:?}"))),
        };
        total = total.checked_add(&d).map_err(decimal_error)?;
        count += 1;
    }
    if count == 0 {
        return Ok(Value::Null);
    }
    let scale = (total.scale() + DIVISION_EXTRA_SCALE).min(MAX_SCALE);
    total
        .div_to_scale(&Decimal::from_i64(count), scale)
        .map(Value::Decimal)
        .map_err(decimal_error)
}

/// MIN (`want = Less`) or MAX; the first of several equal extremes wins.
fn extreme<'a>(values: impl Iterator<Item = &'a Value>, want: Ordering) -> Result<Value, EvalError> {
    let mut best: Option<&Value> = None;
    for v in values {
        match best {
            None => best = Some(v),
            Some(b) => match compare_values(v, b) {
                Comparison::Ordered(o) if o == want => best = Some(v),
                Comparison::Ordered(_) => {}
                Comparison::Incomparable => {
                    return Err(EvalError::internal(format!("cannot compare {v:?} with {b:?}")))
                }
            },
        }
    }
    Ok(best.cloned().unwrap_or(Value::Null))
}

/// Stable sort; nulls come last in both directions.
pub fn sort(src: &Table, key: &str, order: SortOrder) -> Result<Table, EvalError> {
    let k = index(src.schema(), key)?;
    let mut rows = src.rows().to_vec();
    rows.sort_by(|a, b| match (&a[k], &b[k]) {
        (Value::Null, Value::Null) => Ordering::Equal,
        (Value::Null, _) => Ordering::Greater,
        (_, Value::Null) => Ordering::Less,
        (x, y) => {
            let o = match compare_values(x, y) {
                Comparison::Ordered(o) => o,
                Comparison::Incomparable => Ordering::Equal,
            };
            if order == SortOrder::Desc {
                o.reverse()
            } else {
                o
            }
        }
    });
    Ok(Table::from_parts_unchecked(src.schema().clone(), rows))
}

/// Rows at positions `start..end`, clamped to the table. An empty range
/// (including `start >= end`) gives an empty table.
pub fn slice(src: &Table, start: usize, end: usize) -> Table {
    let end = end.min(src.len());
    let start = start.min(end);
    Table::from_parts_unchecked(src.schema().clone(), src.rows()[start..end].to_vec())
}

pub fn limit(src: &Table, n: usize) -> Table {
    slice(src, 0, n)
}

pub fn skip(src: &Table, n: usize) -> Table {
    slice(src, n, usize::MAX)
}

/// Equi-join. Output has the left columns then the right columns minus the
/// right key, ordered by left row then right row. Null keys never match.
pub fn join(
    left: &Table,
    right: &Table,
    left_key: &str,
    right_key: &str,
    kind: JoinKind,
) -> Result<Table, EvalError> {
    let lk = index(left.schema(), left_key)?;
    let rk = index(right.schema(), right_key)?;
    let right_cols: Vec<usize> = (0..right.schema().len()).filter(|&i| i != rk).collect();
    let mut fields = left.schema().fields().to_vec();
    fields.extend(right_cols.iter().map(|&i| right.schema().fields()[i].clone()));
    let schema = schema(fields)?;

    let mut by_key: HashMap<&Value, Vec<usize>> = HashMap::new();
    for (i, row) in right.rows().iter().enumerate() {
        if !row[rk].is_null() {
            by_key.entry(&row[rk]).or_default().push(i);
        }
    }
    let mut rows = Vec::new();
    for lrow in left.rows() {
        let matches = if lrow[lk].is_null() { None } else { by_key.get(&lrow[lk]) };
        match matches {
            Some(ms) => {
                for &m in ms {
                    let rrow = &right.rows()[m];
                    let mut out = lrow.clone();
                    out.extend(right_cols.iter().map(|&i| rrow[i].clone()));
                    rows.push(out);
                }
            }
            None if kind == JoinKind::Left => {
                let mut out = lrow.clone();
                out.extend(std::iter::repeat_n(Value::Null, right_cols.len()));
                rows.push(out);
            }
            None => {}
        }
    }
    Ok(Table::from_parts_unchecked(schema, rows))
}

/// Concatenation; duplicates are kept.
pub fn union(left: &Table, right: &Table) -> Result<Table, EvalError> {
    if left.schema() != right.schema() {
        return Err(EvalError::new(
            RuntimeErrorKind::Internal,
            format!("UNION of {} and {}", left.schema(), right.schema()),
        ));
    }
    let mut rows = left.rows().to_vec();
    rows.extend_from_slice(right.rows());
    Ok(Table::from_parts_unchecked(left.schema().clone(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;
    use ValueType::*;

    fn t(fields: &[(&str, ValueType)], rows: Vec<Vec<Value>>) -> Table {
        Table::new(Schema::of(fields), rows).unwrap()
    }

    fn d(s: &str) -> Value {
        Value::Decimal(s.parse().unwrap())
    }

    fn col(table: &Table, c: &str) -> Vec<Value> {
        table.column(c).unwrap().cloned().collect()
    }

    #[test]
    fn filter_amounts() {
        let src = t(&[("amount", Int)], vec![vec![1500.into()], vec![800.into()], vec![2000.into()]]);
        let out = filter(&src, &parse_expr("amount > 1000").unwrap(), &[]).unwrap();
        assert_eq!(col(&out, "amount"), [1500.into(), 2000.into()]);
        let none = filter(&src, &parse_expr("FALSE").unwrap(), &[]).unwrap();
        assert!(none.is_empty() && none.schema() == src.schema());
    }

    #[test]
    fn map_tax() {
        let src = t(&[("amount", Decimal)], vec![vec![d("1500.00")], vec![d("2000.00")]]);
        let out = map(&src, "tax", &parse_expr("amount * 0.08").unwrap(), &[]).unwrap();
        let taxes: Vec<std::string::String> = col(&out, "tax").iter().map(Value::to_string).collect();
        assert_eq!(taxes, ["120.0000", "160.0000"]);
        assert_eq!(out.schema().fields()[1].ty, Decimal);
    }

    #[test]
    fn aggregate_examples() {
        let src = t(
            &[("customer", String), ("amount", Int)],
            vec![
                vec!["alice".into(), 10.into()],
                vec!["bob".into(), 20.into()],
                vec!["alice".into(), 30.into()],
            ],
        );
        let sum_call =
            AggregateCall { func: AggregateFn::Sum, arg: Some("amount".into()), alias: "total".into() };
        let out = aggregate(&src, &["customer"], &[sum_call]).unwrap();
        assert_eq!(out.rows(), &[vec!["alice".into(), 40.into()], vec!["bob".into(), 20.into()]]);

        let empty = Table::empty(Schema::of(&[("a", Int)]));
        let count = AggregateCall { func: AggregateFn::Count, arg: None, alias: "n".into() };
        let out = aggregate(&empty, &[], std::slice::from_ref(&count)).unwrap();
        assert_eq!(out.rows(), &[vec![Value::Int(0)]]);
        assert!(aggregate(&empty, &["a"], &[count]).unwrap().is_empty());

        let nulls = t(&[("a", Int)], vec![vec![Value::Null], vec![Value::Null]]);
        let calls: Vec<AggregateCall> = [AggregateFn::Min, AggregateFn::Sum, AggregateFn::Avg]
            .into_iter()
            .map(|f| AggregateCall { func: f, arg: Some("a".into()), alias: f.name().into() })
            .collect();
        let out = aggregate(&nulls, &[], &calls).unwrap();
        assert_eq!(out.rows(), &[vec![Value::Null, Value::Null, Value::Null]]);
    }

    #[test]
    fn avg_scale() {
        let src = t(&[("a", Int)], vec![vec![1.into()], vec![2.into()], vec![2.into()]]);
        let call = AggregateCall { func: AggregateFn::Avg, arg: Some("a".into()), alias: "m".into() };
        let out = aggregate(&src, &[], &[call]).unwrap();
        assert_eq!(out.rows()[0][0].to_string(), "1.6667");
    }

    #[test]
    fn sort_stable_nulls_last() {
        let src = t(
            &[("k", Int), ("s", String)],
            vec![
                vec![Value::Null, "n".into()],
                vec![1.into(), "x".into()],
                vec![3.into(), "z".into()],
                vec![1.into(), "y".into()],
            ],
        );
        let asc = sort(&src, "k", SortOrder::Asc).unwrap();
        assert_eq!(col(&asc, "s"), ["x".into(), "y".into(), "z".into(), "n".into()]);
        let desc = sort(&src, "k", SortOrder::Desc).unwrap();
        assert_eq!(col(&desc, "s"), ["z".into(), "x".into(), "y".into(), "n".into()]);
    }

    #[test]
    fn slicing() {
        let src = t(&[("c", String)], ["a", "b", "c", "d"].map(|s| vec![s.into()]).to_vec());
        assert_eq!(col(&slice(&src, 1, 3), "c"), ["b".into(), "c".into()]);
        assert_eq!(slice(&src, 3, 1).len(), 0);
        assert_eq!(limit(&src, 10).len(), 4);
        assert_eq!(skip(&src, 3).len(), 1);
        assert_eq!(skip(&src, 9).len(), 0);
    }

    #[test]
    fn join_order_and_padding() {
        let l = t(&[("k", Int)], vec![vec![1.into()], vec![2.into()], vec![Value::Null]]);
        let r = t(
            &[("rk", Int), ("v", String)],
            vec![vec![2.into(), "x".into()], vec![2.into(), "y".into()], vec![Value::Null, "z".into()]],
        );
        let inner = join(&l, &r, "k", "rk", JoinKind::Inner).unwrap();
        assert_eq!(inner.rows(), &[vec![2.into(), "x".into()], vec![2.into(), "y".into()]]);
        let left = join(&l, &r, "k", "rk", JoinKind::Left).unwrap();
        assert_eq!(left.len(), 4);
        assert_eq!(left.rows()[0], vec![1.into(), Value::Null]);
        assert_eq!(left.rows()[3], vec![Value::Null, Value::Null]);
    }

    #[test]
    fn distinct_keeps_first() {
        let src = t(
            &[("a", Int)],
            vec![vec![2.into()], vec![1.into()], vec![2.into()], vec![Value::Null], vec![Value::Null]],
        );
        assert_eq!(col(&distinct(&src), "a"), [2.into(), 1.into(), Value::Null]);
    }

    #[test]
    fn projection_family() {
        let src = t(&[("a", Int), ("b", String)], vec![vec![1.into(), "x".into()]]);
        let s = select(&src, &["b", "a"]).unwrap();
        assert_eq!(s.rows()[0], vec!["x".into(), 1.into()]);
        let r = rename(&src, &[("a", "b2"), ("b", "a")]).unwrap();
        assert_eq!(r.schema().names().collect::<Vec<_>>(), ["b2", "a"]);
        assert_eq!(drop(&src, &["a"]).unwrap().schema().names().collect::<Vec<_>>(), ["b"]);
        let c = add_column(&src, "c", &Value::Bool(true)).unwrap();
        assert_eq!(c.rows()[0][2], Value::Bool(true));
    }
}
