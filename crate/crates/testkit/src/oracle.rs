//! Brute-force reference semantics for the data operations: nested loops,
//! linear scans and insertion sort, no hashing and no indexes. Only the
//! value layer (cell equality, ordering and DECIMAL arithmetic) is shared
//! with the implementation under test.

use std::cmp::Ordering;

use anka_core::interp::RuntimeErrorKind;
use anka_core::value::{compare_values, Comparison, Decimal, Field, Row, Schema, Table, Value, ValueType};

pub type OracleResult = Result<Table, RuntimeErrorKind>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub const ALL: [ArithOp; 4] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logic {
    And,
    Or,
}

/// A comparison `column OP literal`.
#[derive(Debug, Clone)]
pub struct Cmp {
    pub column: String,
    pub op: CmpOp,
    pub literal: Value,
}

fn col(schema: &Schema, name: &str) -> usize {
    schema.fields().iter().position(|f| f.name == name).expect("oracle column exists")
}

fn build(fields: Vec<Field>, rows: Vec<Row>) -> Table {
    Table::new(Schema::new(fields).expect("oracle schema"), rows).expect("oracle table")
}

/// Three-valued comparison: `None` when either side is null.
pub fn compare(a: &Value, b: &Value, op: CmpOp) -> Option<bool> {
    if a.is_null() || b.is_null() {
        return None;
    }
    match compare_values(a, b) {
        Comparison::Ordered(o) => Some(op.holds(o)),
        Comparison::Incomparable => panic!("oracle compared {a:?} with {b:?}"),
    }
}

fn cmp_on(t: &Table, row: &Row, c: &Cmp) -> Option<bool> {
    compare(&row[col(t.schema(), &c.column)], &c.literal, c.op)
}

/// WHERE `first [AND|OR second]`: a row survives only when the condition
/// is definitely true.
pub fn filter(t: &Table, first: &Cmp, second: Option<(Logic, &Cmp)>) -> Table {
    let mut out = Vec::new();
    for row in t.rows() {
        let a = cmp_on(t, row, first);
        let keep = match second {
            None => a == Some(true),
            Some((Logic::And, c)) => a == Some(true) && cmp_on(t, row, c) == Some(true),
            Some((Logic::Or, c)) => a == Some(true) || cmp_on(t, row, c) == Some(true),
        };
        if keep {
            out.push(row.clone());
        }
    }
    build(t.schema().fields().to_vec(), out)
}

pub fn select(t: &Table, columns: &[&str]) -> Table {
    let mut fields = Vec::new();
    for c in columns {
        fields.push(t.schema().fields()[col(t.schema(), c)].clone());
    }
    let mut rows = Vec::new();
    for row in t.rows() {
        let mut out = Vec::new();
        for c in columns {
            out.push(row[col(t.schema(), c)].clone());
        }
        rows.push(out);
    }
    build(fields, rows)
}

fn rows_equal(a: &Row, b: &Row) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| a[i] == b[i])
}

pub fn distinct(t: &Table) -> Table {
    let mut rows: Vec<Row> = Vec::new();
    for (i, row) in t.rows().iter().enumerate() {
        let mut seen = false;
        for earlier in &t.rows()[..i] {
            if rows_equal(earlier, row) {
                seen = true;
            }
        }
        if !seen {
            rows.push(row.clone());
        }
    }
    build(t.schema().fields().to_vec(), rows)
}

const I64_RANGE: std::ops::RangeInclusive<i128> = (i64::MIN as i128)..=(i64::MAX as i128);

/// `a OP b` on non-null numbers, following the INT/DECIMAL promotion
/// rules.
pub fn arith(a: &Value, op: ArithOp, b: &Value) -> Result<Value, RuntimeErrorKind> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => Ok(Value::Null),
        (Value::Int(x), Value::Int(y)) => {
            let (x, y) = (*x as i128, *y as i128);
            let r = match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div if y == 0 => return Err(RuntimeErrorKind::DivisionByZero),
                ArithOp::Div => x / y,
            };
            if I64_RANGE.contains(&r) {
                Ok(Value::Int(r as i64))
            } else {
                Err(RuntimeErrorKind::ConversionError)
            }
        }
        _ => {
            let x = to_decimal(a);
            let y = to_decimal(b);
            if op == ArithOp::Div && y.is_zero() {
                return Err(RuntimeErrorKind::DivisionByZero);
            }
            let r = match op {
                ArithOp::Add => x.checked_add(&y),
                ArithOp::Sub => x.checked_sub(&y),
                ArithOp::Mul => x.checked_mul(&y),
                ArithOp::Div => {
                    let scale = (x.scale().max(y.scale()) + 4).min(10);
                    return Ok(Value::Decimal(div_half_even(&x, &y, scale)));
                }
            };
            r.map(Value::Decimal).map_err(|_| RuntimeErrorKind::ConversionError)
        }
    }
}

fn to_decimal(v: &Value) -> Decimal {
    match v {
        Value::Int(i) => Decimal::from_i64(*i),
        Value::Decimal(d) => *d,
        other => panic!("oracle expected a number, got {other:?}"),
    }
}

/// Exact quotient rounded half-to-even at `scale`, by long division on
/// mantissas.
pub fn div_half_even(x: &Decimal, y: &Decimal, scale: u32) -> Decimal {
    // x/y = (mx / 10^sx) / (my / 10^sy); scaled by 10^scale:
    // q = mx * 10^(scale + sy) / (my * 10^sx)
    let mut num = x.mantissa() * 10i128.pow(scale + y.scale());
    let mut den = y.mantissa() * 10i128.pow(x.scale());
    if den < 0 {
        num = -num;
        den = -den;
    }
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    // q is floored; decide between q and q + 1.
    let up = match (2 * r).cmp(&den) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => q % 2 != 0,
    };
    Decimal::new(if up { q + 1 } else { q }, scale).unwrap()
}

/// The result type of `a OP b` for numeric column and literal types.
pub fn arith_type(a: ValueType, b: ValueType) -> ValueType {
    if a == ValueType::Int && b == ValueType::Int {
        ValueType::Int
    } else {
        ValueType::Decimal
    }
}

/// Per-row scalar function used by the MAP cases.
#[derive(Debug, Clone)]
pub enum MapFn {
    Arith { column: String, op: ArithOp, literal: Value },
    Compare(Cmp),
    Upper { column: String },
    Length { column: String },
}

pub fn map(t: &Table, new: &str, f: &MapFn) -> OracleResult {
    let ty = match f {
        MapFn::Arith { column, literal, .. } => arith_type(
            t.schema().fields()[col(t.schema(), column)].ty,
            literal.value_type().unwrap(),
        ),
        MapFn::Compare(_) => ValueType::Bool,
        MapFn::Upper { .. } => ValueType::String,
        MapFn::Length { .. } => ValueType::Int,
    };
    let mut rows = Vec::new();
    for row in t.rows() {
        let v = match f {
            MapFn::Arith { column, op, literal } => arith(&row[col(t.schema(), column)], *op, literal)?,
            MapFn::Compare(c) => cmp_on(t, row, c).map_or(Value::Null, Value::Bool),
            MapFn::Upper { column } => match &row[col(t.schema(), column)] {
                Value::Str(s) => Value::Str(s.to_uppercase()),
                _ => Value::Null,
            },
            MapFn::Length { column } => match &row[col(t.schema(), column)] {
                Value::Str(s) => Value::Int(s.chars().count() as i64),
                _ => Value::Null,
            },
        };
        let mut out = row.clone();
        out.push(v);
        rows.push(out);
    }
    let mut fields = t.schema().fields().to_vec();
    fields.push(Field::new(new, ty));
    Ok(build(fields, rows))
}

pub fn rename(t: &Table, pairs: &[(&str, &str)]) -> Table {
    let mut fields = Vec::new();
    for f in t.schema().fields() {
        let mut name = f.name.clone();
        for (from, to) in pairs {
            if f.name == *from {
                name = to.to_string();
            }
        }
        fields.push(Field::new(name, f.ty));
    }
    build(fields, t.rows().to_vec())
}

pub fn drop(t: &Table, columns: &[&str]) -> Table {
    let keep: Vec<&str> = t
        .schema()
        .fields()
        .iter()
        .map(|f| f.name.as_str())
        .filter(|n| !columns.contains(n))
        .collect();
    select(t, &keep)
}

pub fn add_column(t: &Table, name: &str, v: &Value) -> Table {
    let mut fields = t.schema().fields().to_vec();
    fields.push(Field::new(name, v.value_type().unwrap()));
    let rows = t
        .rows()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.push(v.clone());
            out
        })
        .collect();
    build(fields, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agg {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl Agg {
    pub fn name(self) -> &'static str {
        match self {
            Agg::Count => "COUNT",
            Agg::Sum => "SUM",
            Agg::Avg => "AVG",
            Agg::Min => "MIN",
            Agg::Max => "MAX",
        }
    }
}

pub fn aggregate(t: &Table, keys: &[&str], calls: &[(Agg, Option<&str>, &str)]) -> OracleResult {
    let key_cols: Vec<usize> = keys.iter().map(|k| col(t.schema(), k)).collect();
    let mut groups: Vec<(Row, Vec<usize>)> = Vec::new();
    for (i, row) in t.rows().iter().enumerate() {
        let key: Row = key_cols.iter().map(|&c| row[c].clone()).collect();
        match groups.iter_mut().find(|(k, _)| rows_equal(k, &key)) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    if keys.is_empty() && groups.is_empty() {
        groups.push((Vec::new(), Vec::new()));
    }
    let mut fields: Vec<Field> = key_cols.iter().map(|&c| t.schema().fields()[c].clone()).collect();
    for (agg, arg, alias) in calls {
        let ty = match (agg, arg) {
            (Agg::Count, _) => ValueType::Int,
            (Agg::Avg, _) => ValueType::Decimal,
            (_, Some(a)) => t.schema().fields()[col(t.schema(), a)].ty,
            (_, None) => panic!("{} needs an argument", agg.name()),
        };
        fields.push(Field::new(*alias, ty));
    }
    let mut rows = Vec::new();
    for (key, members) in &groups {
        let mut out = key.clone();
        for (agg, arg, _) in calls {
            let vals: Vec<&Value> = match arg {
                Some(a) => {
                    let c = col(t.schema(), a);
                    members.iter().map(|&i| &t.rows()[i][c]).filter(|v| !v.is_null()).collect()
                }
                None => Vec::new(),
            };
            out.push(match agg {
                Agg::Count => Value::Int(members.len() as i64),
                Agg::Sum => sum(&vals)?,
                Agg::Avg => avg(&vals),
                Agg::Min => pick(&vals, Ordering::Less),
                Agg::Max => pick(&vals, Ordering::Greater),
            });
        }
        rows.push(out);
    }
    Ok(build(fields, rows))
}

fn sum(vals: &[&Value]) -> Result<Value, RuntimeErrorKind> {
    if vals.is_empty() {
        return Ok(Value::Null);
    }
    if let Value::Int(_) = vals[0] {
        let mut total: i128 = 0;
        for v in vals {
            if let Value::Int(i) = v {
                total += *i as i128;
                if !I64_RANGE.contains(&total) {
                    return Err(RuntimeErrorKind::ConversionError);
                }
            }
        }
        return Ok(Value::Int(total as i64));
    }
    let scale = vals.iter().map(|v| to_decimal(v).scale()).max().unwrap();
    let total: i128 = vals
        .iter()
        .map(|v| {
            let d = to_decimal(v);
            d.mantissa() * 10i128.pow(scale - d.scale())
        })
        .sum();
    Ok(Value::Decimal(Decimal::new(total, scale).unwrap()))
}

fn avg(vals: &[&Value]) -> Value {
    if vals.is_empty() {
        return Value::Null;
    }
    let scale = vals.iter().map(|v| to_decimal(v).scale()).max().unwrap();
    let total: i128 = vals
        .iter()
        .map(|v| {
            let d = to_decimal(v);
            d.mantissa() * 10i128.pow(scale - d.scale())
        })
        .sum();
    let total = Decimal::new(total, scale).unwrap();
    let count = Decimal::from_i64(vals.len() as i64);
    Value::Decimal(div_half_even(&total, &count, (scale + 4).min(10)))
}

fn pick(vals: &[&Value], want: Ordering) -> Value {
    let mut best: Option<&Value> = None;
    for v in vals {
        best = match best {
            None => Some(v),
            Some(b) if compare_values(v, b) == Comparison::Ordered(want) => Some(v),
            keep => keep,
        };
    }
    best.cloned().unwrap_or(Value::Null)
}

/// Insertion sort: each row goes after every already-placed row whose key
/// does not sort after it, which keeps equal keys in input order.
pub fn sort(t: &Table, key: &str, descending: bool) -> Table {
    let k = col(t.schema(), key);
    let before = |a: &Value, b: &Value| -> bool {
        // true when `a` must come strictly before `b`
        match (a.is_null(), b.is_null()) {
            (true, _) => false,
            (false, true) => true,
            (false, false) => {
                let Comparison::Ordered(o) = compare_values(a, b) else { panic!() };
                if descending {
                    o == Ordering::Greater
                } else {
                    o == Ordering::Less
                }
            }
        }
    };
    let mut out: Vec<Row> = Vec::new();
    for row in t.rows() {
        let mut pos = out.len();
        while pos > 0 && before(&row[k], &out[pos - 1][k]) {
            pos -= 1;
        }
        out.insert(pos, row.clone());
    }
    build(t.schema().fields().to_vec(), out)
}

/// Rows with index `i` such that `start <= i < end`.
pub fn slice(t: &Table, start: usize, end: usize) -> Table {
    let mut rows = Vec::new();
    for (i, row) in t.rows().iter().enumerate() {
        if start <= i && i < end {
            rows.push(row.clone());
        }
    }
    build(t.schema().fields().to_vec(), rows)
}

pub fn join(l: &Table, r: &Table, lk: &str, rk: &str, left_outer: bool) -> Table {
    let li = col(l.schema(), lk);
    let ri = col(r.schema(), rk);
    let mut fields = l.schema().fields().to_vec();
    for (i, f) in r.schema().fields().iter().enumerate() {
        if i != ri {
            fields.push(f.clone());
        }
    }
    let mut rows = Vec::new();
    for lrow in l.rows() {
        let mut matched = false;
        for rrow in r.rows() {
            if compare(&lrow[li], &rrow[ri], CmpOp::Eq) == Some(true) {
                matched = true;
                let mut out = lrow.clone();
                for (i, v) in rrow.iter().enumerate() {
                    if i != ri {
                        out.push(v.clone());
                    }
                }
                rows.push(out);
            }
        }
        if left_outer && !matched {
            let mut out = lrow.clone();
            for _ in 1..r.schema().len() {
                out.push(Value::Null);
            }
            rows.push(out);
        }
    }
    build(fields, rows)
}

pub fn union(l: &Table, r: &Table) -> Table {
    let mut rows = l.rows().to_vec();
    for row in r.rows() {
        rows.push(row.clone());
    }
    build(l.schema().fields().to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn half_even_division() {
        assert_eq!(div_half_even(&d("1"), &d("3"), 4).to_string(), "0.3333");
        assert_eq!(div_half_even(&d("2"), &d("3"), 4).to_string(), "0.6667");
        assert_eq!(div_half_even(&d("0.00005"), &d("1"), 4).to_string(), "0.0000");
        assert_eq!(div_half_even(&d("0.00015"), &d("1"), 4).to_string(), "0.0002");
        assert_eq!(div_half_even(&d("-1"), &d("3"), 4).to_string(), "-0.3333");
        assert_eq!(div_half_even(&d("-0.00015"), &d("1"), 4).to_string(), "-0.0002");
        assert_eq!(div_half_even(&d("1"), &d("-8"), 2).to_string(), "-0.12");
    }

    #[test]
    fn sort_is_stable_with_nulls_last() {
        let s = Schema::new(vec![Field::new("k", ValueType::Int), Field::new("i", ValueType::Int)]).unwrap();
        let rows = [(Some(2), 0), (None, 1), (Some(1), 2), (Some(2), 3)]
            .iter()
            .map(|(k, i)| vec![k.map_or(Value::Null, Value::Int), Value::Int(*i)])
            .collect();
        let t = Table::new(s, rows).unwrap();
        let order = |t: &Table| t.rows().iter().map(|r| r[1].clone()).collect::<Vec<_>>();
        assert_eq!(order(&sort(&t, "k", false)), [2, 0, 3, 1].map(Value::Int));
        assert_eq!(order(&sort(&t, "k", true)), [0, 3, 2, 1].map(Value::Int));
    }
}
