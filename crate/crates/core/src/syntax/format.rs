//! Canonical pretty-printer. Output re-parses to a structurally equal tree.

use std::fmt::Write;

use super::ast::*;
use crate::value::{DATETIME_FORMAT, DATE_FORMAT};

const INDENT: &str = "    ";

/// Renders a pipeline in canonical layout.
pub fn format_ast(p: &Pipeline) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "PIPELINE {}:", p.name);
    for input in &p.inputs {
        let _ = writeln!(out, "{INDENT}INPUT {}: {}", input.name, format_table_type(&input.schema));
    }
    for step in &p.steps {
        out.push('\n');
        let _ = writeln!(out, "{INDENT}STEP {}:", step.name);
        write_block(&mut out, &step.body, 2);
    }
    out.push('\n');
    let _ = writeln!(out, "{INDENT}OUTPUT {}", p.output);
    out
}

pub fn format_table_type(t: &TableType) -> String {
    let fields: Vec<String> = t.fields.iter().map(|f| format!("{}: {}", f.name, f.ty)).collect();
    format!("TABLE[{}]", fields.join(", "))
}

fn write_block(out: &mut String, stmts: &[Statement], depth: usize) {
    for s in stmts {
        write_statement(out, s, depth);
    }
}

fn pad(depth: usize) -> String {
    INDENT.repeat(depth)
}

fn join_idents(ids: &[Ident]) -> String {
    ids.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn write_statement(out: &mut String, s: &Statement, depth: usize) {
    use StatementKind::*;
    let p = pad(depth);
    let line = match &s.kind {
        Filter { source, predicate, target } => {
            format!("FILTER {source} WHERE {} INTO {target}", format_expr(predicate))
        }
        Select { source, columns, target } => {
            format!("SELECT {source} COLUMNS {} INTO {target}", join_idents(columns))
        }
        Distinct { source, target } => format!("DISTINCT {source} INTO {target}"),
        Map { source, column, expr, target } => {
            format!("MAP {source} WITH {column} => {} INTO {target}", format_expr(expr))
        }
        Rename { source, renames, target } => {
            let pairs: Vec<String> =
                renames.iter().map(|r| format!("{} AS {}", r.from, r.to)).collect();
            format!("RENAME {source} COLUMNS {} INTO {target}", pairs.join(", "))
        }
        Drop { source, columns, target } => {
            format!("DROP {source} COLUMNS {} INTO {target}", join_idents(columns))
        }
        AddColumn { source, column, value, target } => {
            format!("ADD_COLUMN {source} COLUMN {column} VALUE {} INTO {target}", format_literal(value))
        }
        Aggregate { source, group_by, computes, target } => {
            let inner = pad(depth + 1);
            let mut text = format!("AGGREGATE {source}\n");
            if !group_by.is_empty() {
                let _ = writeln!(text, "{inner}GROUP_BY {}", join_idents(group_by));
            }
            let specs: Vec<String> = computes
                .iter()
                .map(|c| {
                    let arg = c.arg.as_ref().map_or("", |a| a.name.as_str());
                    format!("{}({arg}) AS {}", c.func.name(), c.alias)
                })
                .collect();
            let _ = writeln!(text, "{inner}COMPUTE {}", specs.join(", "));
            let _ = write!(text, "{inner}INTO {target}");
            text
        }
        Sort { source, key, order, target } => {
            let dir = match order {
                SortOrder::Asc => "ASC",
                SortOrder::Desc => "DESC",
            };
            format!("SORT {source} BY {key} {dir} INTO {target}")
        }
        Limit { source, count, target } => {
            format!("LIMIT {source} {} INTO {target}", format_expr(count))
        }
        Skip { source, count, target } => {
            format!("SKIP {source} {} INTO {target}", format_expr(count))
        }
        Slice { source, start, end, target } => format!(
            "SLICE {source} FROM {} TO {} INTO {target}",
            format_expr(start),
            format_expr(end)
        ),
        Join { left, right, left_key, right_key, target } => {
            format!("JOIN {left} WITH {right} ON {left_key} == {right_key} INTO {target}")
        }
        LeftJoin { left, right, left_key, right_key, target } => {
            format!("LEFT_JOIN {left} WITH {right} ON {left_key} == {right_key} INTO {target}")
        }
        Union { left, right, target } => format!("UNION {left} WITH {right} INTO {target}"),
        Read { path, format, schema, target } => format!(
            "READ {} FORMAT {} SCHEMA {} INTO {target}",
            quote(&path.value),
            format.keyword(),
            format_table_type(schema)
        ),
        Write { source, path, format } => {
            format!("WRITE {source} TO {} FORMAT {}", quote(&path.value), format.keyword())
        }
        Fetch { url, schema, target } => format!(
            "FETCH {} SCHEMA {} INTO {target}",
            quote(&url.value),
            format_table_type(schema)
        ),
        Post { source, url } => format!("POST {source} TO {}", quote(&url.value)),
        If { condition, then_branch, else_branch } => {
            let _ = writeln!(out, "{p}IF {} THEN", format_expr(condition));
            write_block(out, then_branch, depth + 1);
            if let Some(e) = else_branch {
                let _ = writeln!(out, "{p}ELSE");
                write_block(out, e, depth + 1);
            }
            let _ = writeln!(out, "{p}END_IF");
            return;
        }
        ForEach { var, source, body } => {
            let _ = writeln!(out, "{p}FOR_EACH {var} IN {source} DO");
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{p}END_FOR");
            return;
        }
        While { condition, body } => {
            let _ = writeln!(out, "{p}WHILE {} DO", format_expr(condition));
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{p}END_WHILE");
            return;
        }
        Try { body, on_error } => {
            let _ = writeln!(out, "{p}TRY");
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{p}ON_ERROR");
            write_block(out, on_error, depth + 1);
            let _ = writeln!(out, "{p}END_TRY");
            return;
        }
    };
    let _ = writeln!(out, "{p}{line}");
}

/// Quotes a string using the language's escape set.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn format_literal(l: &Literal) -> String {
    match l {
        Literal::Int(v) => v.to_string(),
        // Keep a fractional part so the literal re-parses as DECIMAL.
        Literal::Decimal(d) if d.scale() == 0 => format!("{d}.0"),
        Literal::Decimal(d) => d.to_string(),
        Literal::String(s) => quote(s),
        Literal::Bool(true) => "TRUE".into(),
        Literal::Bool(false) => "FALSE".into(),
        Literal::Date(d) => format!("DATE \"{}\"", d.format(DATE_FORMAT)),
        Literal::DateTime(d) => format!("DATETIME \"{}\"", d.format(DATETIME_FORMAT)),
    }
}

const PREC_NOT: u8 = 3;
const PREC_UNARY: u8 = 7;
const PREC_ATOM: u8 = 8;

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { op: UnaryOp::Not, .. } => PREC_NOT,
        ExprKind::Unary { op: UnaryOp::Neg, .. } => PREC_UNARY,
        // A negative number prints with a leading minus, so it needs the
        // same protection as a negation.
        ExprKind::Literal { literal: Literal::Int(v) } if *v < 0 => PREC_UNARY,
        ExprKind::Literal { literal: Literal::Decimal(d) } if d.is_negative() => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

/// Renders an expression with the minimal parentheses its precedence needs.
pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_child(out: &mut String, e: &Expr, min_prec: u8) {
    if expr_prec(e) < min_prec {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Literal { literal } => out.push_str(&format_literal(literal)),
        ExprKind::Column { name } => out.push_str(&name.name),
        ExprKind::Field { var, field } => {
            let _ = write!(out, "{var}.{field}");
        }
        ExprKind::Unary { op: UnaryOp::Not, operand } => {
            out.push_str("NOT ");
            write_child(out, operand, PREC_NOT);
        }
        ExprKind::Unary { op: UnaryOp::Neg, operand } => {
            out.push('-');
            // `-5` would re-parse as a literal, and `--x` is fine but `- -5`
            // must stay a negation of a negative literal.
            let is_number = matches!(
                operand.kind,
                ExprKind::Literal { literal: Literal::Int(_) | Literal::Decimal(_) }
            );
            if is_number {
                out.push('(');
                write_expr(out, operand);
                out.push(')');
            } else {
                write_child(out, operand, PREC_UNARY);
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            if op.is_comparison() {
                write_child(out, lhs, p + 1);
            } else {
                write_child(out, lhs, p);
            }
            let _ = write!(out, " {} ", op.symbol());
            write_child(out, rhs, p + 1);
        }
        ExprKind::Call { func, args } => {
            out.push_str(&func.name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}
