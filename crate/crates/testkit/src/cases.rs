//! Randomized single-operation cases: a one-statement pipeline, its input
//! tables and the oracle's expected result.

use std::collections::HashMap;

use anka_core::interp::{run_pipeline, RunError, RunOptions, RuntimeErrorKind};
use anka_core::io::RecordingIo;
use anka_core::value::{table_equal, Field, Schema, Table, Value, ValueType};
use anka_core::{parse, validate};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gen::{self, literal_text, TableSpec, RIGHT_NAMES};
use crate::oracle::{self, Agg, ArithOp, Cmp, CmpOp, Logic, MapFn, OracleResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Filter,
    Select,
    Distinct,
    Map,
    Rename,
    Drop,
    AddColumn,
    Aggregate,
    Sort,
    Limit,
    Skip,
    Slice,
    Join,
    LeftJoin,
    Union,
}

impl Op {
    pub const ALL: [Op; 15] = [
        Op::Filter,
        Op::Select,
        Op::Distinct,
        Op::Map,
        Op::Rename,
        Op::Drop,
        Op::AddColumn,
        Op::Aggregate,
        Op::Sort,
        Op::Limit,
        Op::Skip,
        Op::Slice,
        Op::Join,
        Op::LeftJoin,
        Op::Union,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Op::Filter => "FILTER",
            Op::Select => "SELECT",
            Op::Distinct => "DISTINCT",
            Op::Map => "MAP",
            Op::Rename => "RENAME",
            Op::Drop => "DROP",
            Op::AddColumn => "ADD_COLUMN",
            Op::Aggregate => "AGGREGATE",
            Op::Sort => "SORT",
            Op::Limit => "LIMIT",
            Op::Skip => "SKIP",
            Op::Slice => "SLICE",
            Op::Join => "JOIN",
            Op::LeftJoin => "LEFT_JOIN",
            Op::Union => "UNION",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub op: Op,
    pub source: String,
    pub inputs: HashMap<String, Table>,
    pub expected: OracleResult,
}

fn pipeline(inputs: &[(&str, &Table)], stmt: &str) -> String {
    let mut s = String::from("PIPELINE oracle_case:\n");
    for (name, t) in inputs {
        s.push_str(&format!("    INPUT {name}: {}\n", t.schema()));
    }
    s.push_str(&format!("    STEP run:\n        {stmt}\n    OUTPUT out\n"));
    s
}

fn names(schema: &Schema) -> Vec<&str> {
    schema.names().collect()
}

fn columns_of(schema: &Schema, pred: impl Fn(ValueType) -> bool) -> Vec<&Field> {
    schema.fields().iter().filter(|f| pred(f.ty)).collect()
}

/// A literal comparable with a column of type `ty`; numeric columns
/// sometimes get the other numeric type.
fn literal_for<R: Rng>(rng: &mut R, ty: ValueType) -> Value {
    let ty = match ty {
        ValueType::Int if rng.gen_bool(0.25) => ValueType::Decimal,
        ValueType::Decimal if rng.gen_bool(0.25) => ValueType::Int,
        t => t,
    };
    gen::literal(rng, ty)
}

fn random_cmp<R: Rng>(rng: &mut R, schema: &Schema) -> Cmp {
    let f = schema.fields().choose(rng).unwrap();
    Cmp { column: f.name.clone(), op: *CmpOp::ALL.choose(rng).unwrap(), literal: literal_for(rng, f.ty) }
}

fn cmp_text(c: &Cmp) -> String {
    format!("{} {} {}", c.column, c.op.symbol(), literal_text(&c.literal))
}

fn subset<'a, R: Rng>(rng: &mut R, items: &[&'a str], min: usize, max: usize) -> Vec<&'a str> {
    let n = rng.gen_range(min..=max.min(items.len()));
    let mut v = items.to_vec();
    v.shuffle(rng);
    v.truncate(n);
    v
}

pub fn random_case<R: Rng>(rng: &mut R, op: Op) -> Case {
    let spec = TableSpec::default();
    let src = gen::random_table(rng, &spec);
    let cols = names(src.schema());
    let single = |stmt: String, expected: OracleResult| Case {
        op,
        source: pipeline(&[("src", &src)], &stmt),
        inputs: HashMap::from([("src".to_string(), src.clone())]),
        expected,
    };
    match op {
        Op::Filter => {
            let first = random_cmp(rng, src.schema());
            let second = if rng.gen_bool(0.4) {
                let logic = if rng.gen() { Logic::And } else { Logic::Or };
                Some((logic, random_cmp(rng, src.schema())))
            } else {
                None
            };
            let mut cond = cmp_text(&first);
            if let Some((logic, c)) = &second {
                let kw = if *logic == Logic::And { "AND" } else { "OR" };
                cond = format!("{cond} {kw} {}", cmp_text(c));
            }
            let expected = oracle::filter(&src, &first, second.as_ref().map(|(l, c)| (*l, c)));
            single(format!("FILTER src WHERE {cond} INTO out"), Ok(expected))
        }
        Op::Select => {
            let pick = subset(rng, &cols, 1, cols.len());
            let expected = oracle::select(&src, &pick);
            single(format!("SELECT src COLUMNS {} INTO out", pick.join(", ")), Ok(expected))
        }
        Op::Distinct => single("DISTINCT src INTO out".into(), Ok(oracle::distinct(&src))),
        Op::Map => {
            let numeric = columns_of(src.schema(), ValueType::is_numeric);
            let strings = columns_of(src.schema(), |t| t == ValueType::String);
            let (text, f) = match rng.gen_range(0..4) {
                0 | 1 if !numeric.is_empty() => {
                    let c = numeric.choose(rng).unwrap();
                    let op = *ArithOp::ALL.choose(rng).unwrap();
                    let lit_ty = if rng.gen() { ValueType::Int } else { ValueType::Decimal };
                    let literal = gen::literal(rng, lit_ty);
                    let text = format!("{} {} {}", c.name, op.symbol(), literal_text(&literal));
                    (text, MapFn::Arith { column: c.name.clone(), op, literal })
                }
                2 if !strings.is_empty() => {
                    let c = strings.choose(rng).unwrap();
                    if rng.gen() {
                        (format!("UPPER({})", c.name), MapFn::Upper { column: c.name.clone() })
                    } else {
                        (format!("LENGTH({})", c.name), MapFn::Length { column: c.name.clone() })
                    }
                }
                _ => {
                    let c = random_cmp(rng, src.schema());
                    (cmp_text(&c), MapFn::Compare(c))
                }
            };
            single(format!("MAP src WITH m => {text} INTO out"), oracle::map(&src, "m", &f))
        }
        Op::Rename => {
            let pick = subset(rng, &cols, 1, cols.len());
            let fresh: Vec<String> = (0..pick.len()).map(|i| format!("r{i}")).collect();
            let pairs: Vec<(&str, &str)> =
                pick.iter().zip(&fresh).map(|(a, b)| (*a, b.as_str())).collect();
            let text: Vec<String> = pairs.iter().map(|(a, b)| format!("{a} AS {b}")).collect();
            let expected = oracle::rename(&src, &pairs);
            single(format!("RENAME src COLUMNS {} INTO out", text.join(", ")), Ok(expected))
        }
        Op::Drop => {
            if cols.len() == 1 {
                // Dropping the only column is a validation error; add one.
                return random_case(rng, op);
            }
            let pick = subset(rng, &cols, 1, cols.len() - 1);
            let expected = oracle::drop(&src, &pick);
            single(format!("DROP src COLUMNS {} INTO out", pick.join(", ")), Ok(expected))
        }
        Op::AddColumn => {
            let ty = gen::value_type(rng);
            let v = gen::literal(rng, ty);
            let expected = oracle::add_column(&src, "k", &v);
            single(format!("ADD_COLUMN src COLUMN k VALUE {} INTO out", literal_text(&v)), Ok(expected))
        }
        Op::Aggregate => {
            let keys = subset(rng, &cols, 0, 2);
            let n = rng.gen_range(1..=3);
            let mut calls: Vec<(Agg, Option<&str>, String)> = Vec::new();
            for i in 0..n {
                let f = src.schema().fields().choose(rng).unwrap();
                let mut options = vec![Agg::Count];
                if f.ty.is_numeric() {
                    options.extend([Agg::Sum, Agg::Avg]);
                }
                if f.ty != ValueType::Bool {
                    options.extend([Agg::Min, Agg::Max]);
                }
                let agg = *options.choose(rng).unwrap();
                let arg = (agg != Agg::Count).then_some(f.name.as_str());
                calls.push((agg, arg, format!("x{i}")));
            }
            let text: Vec<String> = calls
                .iter()
                .map(|(a, arg, alias)| format!("{}({}) AS {alias}", a.name(), arg.unwrap_or("")))
                .collect();
            let group = if keys.is_empty() {
                String::new()
            } else {
                format!(" GROUP_BY {}", keys.join(", "))
            };
            let call_refs: Vec<(Agg, Option<&str>, &str)> =
                calls.iter().map(|(a, arg, alias)| (*a, *arg, alias.as_str())).collect();
            let expected = oracle::aggregate(&src, &keys, &call_refs);
            single(format!("AGGREGATE src{group} COMPUTE {} INTO out", text.join(", ")), expected)
        }
        Op::Sort => {
            let key = *cols.choose(rng).unwrap();
            let desc = rng.gen_bool(0.5);
            let dir = if desc { "DESC" } else { "ASC" };
            single(format!("SORT src BY {key} {dir} INTO out"), Ok(oracle::sort(&src, key, desc)))
        }
        Op::Limit => {
            let n = rng.gen_range(0..=25);
            single(format!("LIMIT src {n} INTO out"), Ok(oracle::slice(&src, 0, n)))
        }
        Op::Skip => {
            let n = rng.gen_range(0..=25);
            single(format!("SKIP src {n} INTO out"), Ok(oracle::slice(&src, n, usize::MAX)))
        }
        Op::Slice => {
            let a = rng.gen_range(0..=25);
            let b = rng.gen_range(0..=25);
            single(format!("SLICE src FROM {a} TO {b} INTO out"), Ok(oracle::slice(&src, a, b)))
        }
        Op::Join | Op::LeftJoin => join_case(rng, op, src),
        Op::Union => {
            let other = gen::table(rng, src.schema(), &spec);
            Case {
                op,
                source: pipeline(&[("l", &src), ("r", &other)], "UNION l WITH r INTO out"),
                expected: Ok(oracle::union(&src, &other)),
                inputs: HashMap::from([("l".into(), src), ("r".into(), other)]),
            }
        }
    }
}

fn join_case<R: Rng>(rng: &mut R, op: Op, left: Table) -> Case {
    let spec = TableSpec::default();
    let lkey = left.schema().fields().choose(rng).unwrap().clone();
    let rkey_ty = match lkey.ty {
        ValueType::Int if rng.gen_bool(0.3) => ValueType::Decimal,
        ValueType::Decimal if rng.gen_bool(0.3) => ValueType::Int,
        t => t,
    };
    let rkey_name = *RIGHT_NAMES.choose(rng).unwrap();
    let others: Vec<&str> = RIGHT_NAMES.iter().copied().filter(|n| *n != rkey_name).collect();
    let rest = if rng.gen_bool(0.2) {
        Vec::new()
    } else {
        gen::schema_from(rng, &others, 4).fields().to_vec()
    };
    let mut fields = rest;
    let pos = rng.gen_range(0..=fields.len());
    fields.insert(pos, Field::new(rkey_name, rkey_ty));
    let rschema = Schema::new(fields).unwrap();
    let raw = gen::table(rng, &rschema, &spec);
    // Reuse left key values so that matches are frequent.
    let lvals: Vec<Value> = left.column(&lkey.name).unwrap().cloned().collect();
    let rows = raw
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if !lvals.is_empty() && rng.gen_bool(0.6) {
                r[pos] = convert_key(lvals.choose(rng).unwrap(), rkey_ty);
            }
            r
        })
        .collect();
    let right = Table::new(rschema, rows).unwrap();
    let kw = op.keyword();
    let stmt = format!("{kw} l WITH r ON {} == {rkey_name} INTO out", lkey.name);
    let expected = oracle::join(&left, &right, &lkey.name, rkey_name, op == Op::LeftJoin);
    Case {
        op,
        source: pipeline(&[("l", &left), ("r", &right)], &stmt),
        expected: Ok(expected),
        inputs: HashMap::from([("l".into(), left), ("r".into(), right)]),
    }
}

fn convert_key(v: &Value, ty: ValueType) -> Value {
    match (v, ty) {
        (Value::Int(i), ValueType::Decimal) => {
            Value::Decimal(anka_core::value::Decimal::new(*i as i128 * 100, 2).unwrap())
        }
        (Value::Decimal(d), ValueType::Int) => match d.trunc_to_i64() {
            Some(i) => Value::Int(i),
            None => Value::Null,
        },
        (v, _) => v.clone(),
    }
}

fn render(t: &Table) -> Vec<Vec<String>> {
    t.rows().iter().map(|r| r.iter().map(|v| format!("{v:?}")).collect()).collect()
}

/// Runs the case through parse, validate and the interpreter and compares
/// with the oracle, including the textual scale of every DECIMAL.
pub fn check_case(case: &Case) -> Result<(), String> {
    let ast = parse(&case.source).map_err(|e| format!("parse error {e}\n{}", case.source))?;
    validate(&ast).map_err(|e| format!("validation failed {e:?}\n{}", case.source))?;
    let io = RecordingIo::new();
    let got = run_pipeline(&ast, &case.inputs, &io, &RunOptions { sandbox: true, ..RunOptions::default() });
    let got: Result<Table, RuntimeErrorKind> = match got {
        Ok(t) => Ok(t),
        Err(RunError::Runtime(e)) => Err(e.kind),
        Err(RunError::Input(e)) => return Err(format!("input rejected: {e}\n{}", case.source)),
    };
    let ok = match (&got, &case.expected) {
        (Ok(a), Ok(b)) => table_equal(a, b) && render(a) == render(b),
        (Err(a), Err(b)) => a == b,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{:?} mismatch\n{}\ninputs: {:?}\ninterpreter: {:?}\noracle: {:?}",
            case.op, case.source, case.inputs, got, case.expected
        ))
    }
}
