//! Static checks run before execution: dataset name resolution, uniqueness
//! of bindings, schema inference for every statement and expression typing.
//!
//! Scoping of control flow:
//! - a dataset bound in both branches of an IF (or in both the body and the
//!   ON_ERROR block of a TRY) with the same schema is visible afterwards;
//!   anything bound on one side only is not;
//! - FOR_EACH and WHILE bodies are private scopes, and the FOR_EACH row
//!   variable is only visible inside its body;
//! - every INTO target is unique across the whole pipeline, except that the
//!   two sides of an IF or TRY may bind the same name.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::builtins::Builtin;
use crate::syntax::*;
use crate::value::{Field, Schema, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ValidationErrorKind {
    UnknownDataset,
    DuplicateBinding,
    UnknownColumn,
    TypeMismatch,
    SchemaMismatch,
    OutputUndefined,
    /// Malformed statement arguments: negative literal bounds, unknown
    /// functions, wrong aggregate arity.
    InvalidArgument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationError {
    pub kind: ValidationErrorKind,
    pub message: String,
    pub location: SourceLocation,
}

impl ValidationError {
    fn new(kind: ValidationErrorKind, message: impl Into<String>, location: SourceLocation) -> Self {
        ValidationError { kind, message: message.into(), location }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.location, self.kind, self.message)
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum Provenance {
    Input { location: SourceLocation },
    Statement { step: String, keyword: &'static str, location: SourceLocation },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub schema: Schema,
    pub provenance: Provenance,
    /// Whether the binding is still visible at the end of the pipeline (as
    /// opposed to living inside a branch or loop body).
    pub pipeline_scope: bool,
}

/// Result of a successful validation: the inferred schema of every dataset
/// in binding order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Environment {
    pub bindings: IndexMap<String, Binding>,
    pub output: String,
}

impl Environment {
    pub fn schema_of(&self, name: &str) -> Option<&Schema> {
        self.bindings.get(name).map(|b| &b.schema)
    }

    pub fn output_schema(&self) -> Option<&Schema> {
        self.schema_of(&self.output)
    }
}

/// Validates a whole pipeline, collecting every error.
pub fn validate(ast: &Pipeline) -> Result<Environment, Vec<ValidationError>> {
    let mut v = Validator::default();
    let mut scope = Scope::default();
    for input in &ast.inputs {
        let schema = v.table_type_schema(&input.schema);
        let prov = Provenance::Input { location: input.loc };
        v.bind(&mut scope, &input.name, schema, prov);
    }
    for step in &ast.steps {
        v.step = step.name.name.clone();
        v.block(&mut scope, &step.body);
    }
    match scope.datasets.get(&ast.output.name) {
        Some(_) => {}
        None => {
            let hint = if v.recorded.contains_key(&ast.output.name) {
                " (it is only bound inside a branch or loop body)"
            } else {
                ""
            };
            v.errors.push(ValidationError::new(
                ValidationErrorKind::OutputUndefined,
                format!("OUTPUT {} is not a bound dataset{hint}", ast.output.name),
                ast.output.loc,
            ));
        }
    }
    if !v.errors.is_empty() {
        return Err(v.errors);
    }
    let mut bindings = v.recorded;
    for (name, b) in bindings.iter_mut() {
        b.pipeline_scope = scope.datasets.contains_key(name);
    }
    Ok(Environment { bindings, output: ast.output.name.clone() })
}

/// Output schema of a single data statement, given the datasets in `env`.
/// Returns `Ok(None)` for statements that bind nothing (WRITE, POST,
/// control flow).
pub fn infer_statement_schema(
    stmt: &Statement,
    env: &Environment,
) -> Result<Option<Schema>, Vec<ValidationError>> {
    let mut v = Validator::default();
    let mut scope = Scope::default();
    for (name, b) in &env.bindings {
        v.names.insert(name.clone(), b.provenance_location());
        scope.datasets.insert(name.clone(), Some(b.schema.clone()));
    }
    let schema = v.infer(&mut scope, stmt);
    if v.errors.is_empty() {
        Ok(schema)
    } else {
        Err(v.errors)
    }
}

/// Type of `expr` evaluated per row of a table with `schema`.
pub fn typecheck_expr(expr: &Expr, schema: &Schema) -> Result<ValueType, ValidationError> {
    typecheck(expr, &ExprScope { table: Some(schema), row_vars: &[] })
}

impl Binding {
    fn provenance_location(&self) -> SourceLocation {
        match &self.provenance {
            Provenance::Input { location } | Provenance::Statement { location, .. } => *location,
        }
    }
}

/// What an expression may refer to.
pub struct ExprScope<'a> {
    /// Columns of the table being processed, if any.
    pub table: Option<&'a Schema>,
    /// FOR_EACH row variables in scope, innermost last.
    pub row_vars: &'a [(String, Schema)],
}

/// Types an expression. Shared with the interpreter, which uses it to
/// derive the type of MAP columns.
pub fn typecheck(expr: &Expr, scope: &ExprScope<'_>) -> Result<ValueType, ValidationError> {
    use ValidationErrorKind as K;
    match &expr.kind {
        ExprKind::Literal { literal } => Ok(literal.value_type()),
        ExprKind::Column { name } => match scope.table {
            Some(schema) => schema.field(&name.name).map(|f| f.ty).ok_or_else(|| {
                ValidationError::new(
                    K::UnknownColumn,
                    format!("unknown column {}; available: {}", name, list(schema.names())),
                    name.loc,
                )
            }),
            None => Err(ValidationError::new(
                K::UnknownColumn,
                format!(
                    "column {name} referenced where no table is in scope \
                     (use <row>.{name} inside FOR_EACH)"
                ),
                name.loc,
            )),
        },
        ExprKind::Field { var, field } => {
            let Some((_, schema)) = scope.row_vars.iter().rev().find(|(n, _)| *n == var.name)
            else {
                return Err(ValidationError::new(
                    K::UnknownDataset,
                    format!("unknown row variable {var}"),
                    var.loc,
                ));
            };
            schema.field(&field.name).map(|f| f.ty).ok_or_else(|| {
                ValidationError::new(
                    K::UnknownColumn,
                    format!("row variable {var} has no column {field}"),
                    field.loc,
                )
            })
        }
        ExprKind::Unary { op, operand } => {
            let t = typecheck(operand, scope)?;
            match op {
                UnaryOp::Neg if t.is_numeric() => Ok(t),
                UnaryOp::Not if t == ValueType::Bool => Ok(t),
                UnaryOp::Neg => Err(ValidationError::new(
                    K::TypeMismatch,
                    format!("cannot negate {t}"),
                    expr.loc,
                )),
                UnaryOp::Not => Err(ValidationError::new(
                    K::TypeMismatch,
                    format!("NOT expects BOOL, got {t}"),
                    expr.loc,
                )),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let l = typecheck(lhs, scope)?;
            let r = typecheck(rhs, scope)?;
            let mismatch = |what: &str| {
                ValidationError::new(
                    K::TypeMismatch,
                    format!("operator {} {what}, got {l} and {r}", op.symbol()),
                    expr.loc,
                )
            };
            if op.is_arithmetic() {
                if l.is_numeric() && r.is_numeric() {
                    Ok(if l == ValueType::Int && r == ValueType::Int {
                        ValueType::Int
                    } else {
                        ValueType::Decimal
                    })
                } else if l == ValueType::String || r == ValueType::String {
                    Err(mismatch("needs INT or DECIMAL operands (use CONCAT for strings)"))
                } else {
                    Err(mismatch("needs INT or DECIMAL operands"))
                }
            } else if op.is_comparison() {
                if l.comparable_with(r) {
                    Ok(ValueType::Bool)
                } else {
                    Err(mismatch("cannot compare these types"))
                }
            } else if l == ValueType::Bool && r == ValueType::Bool {
                Ok(ValueType::Bool)
            } else {
                Err(mismatch("needs BOOL operands"))
            }
        }
        ExprKind::Call { func, args } => {
            let Some(builtin) = Builtin::lookup(&func.name) else {
                let names: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
                return Err(ValidationError::new(
                    K::InvalidArgument,
                    format!("unknown function {func}; available: {}", names.join(", ")),
                    func.loc,
                ));
            };
            let types = args.iter().map(|a| typecheck(a, scope)).collect::<Result<Vec<_>, _>>()?;
            builtin.result_type(&types).map_err(|e| {
                let kind = match e {
                    crate::builtins::SignatureError::Arity { .. } => K::InvalidArgument,
                    crate::builtins::SignatureError::ArgType { .. } => K::TypeMismatch,
                };
                ValidationError::new(kind, format!("{func} {e}"), func.loc)
            })
        }
    }
}

fn list<'a>(names: impl Iterator<Item = &'a str>) -> String {
    names.collect::<Vec<_>>().join(", ")
}

/// Datasets visible at a point; `None` marks a binding whose schema could
/// not be inferred (an error was already reported).
#[derive(Debug, Clone, Default)]
struct Scope {
    datasets: IndexMap<String, Option<Schema>>,
    row_vars: Vec<(String, Schema)>,
}

#[derive(Default)]
struct Validator {
    errors: Vec<ValidationError>,
    /// Every INPUT and INTO name seen so far, for the uniqueness rule.
    names: HashMap<String, SourceLocation>,
    recorded: IndexMap<String, Binding>,
    step: String,
}

impl Validator {
    fn error(&mut self, kind: ValidationErrorKind, message: impl Into<String>, loc: SourceLocation) {
        self.errors.push(ValidationError::new(kind, message, loc));
    }

    fn table_type_schema(&mut self, t: &TableType) -> Option<Schema> {
        match t.to_schema() {
            Ok(s) => Some(s),
            Err(e) => {
                self.error(ValidationErrorKind::SchemaMismatch, e.to_string(), t.loc);
                None
            }
        }
    }

    fn bind(&mut self, scope: &mut Scope, name: &Ident, schema: Option<Schema>, prov: Provenance) {
        if let Some(prev) = self.names.get(&name.name) {
            let prev = *prev;
            self.error(
                ValidationErrorKind::DuplicateBinding,
                format!("{name} is already bound at {prev}; every INTO target must be a new name"),
                name.loc,
            );
            return;
        }
        self.names.insert(name.name.clone(), name.loc);
        if let Some(s) = &schema {
            self.recorded.insert(
                name.name.clone(),
                Binding { schema: s.clone(), provenance: prov, pipeline_scope: false },
            );
        }
        scope.datasets.insert(name.name.clone(), schema);
    }

    /// Looks a dataset up. `Err` means unknown (reported); `Ok(None)` means
    /// known but poisoned by an earlier error.
    fn resolve(&mut self, scope: &Scope, name: &Ident) -> Result<Option<Schema>, ()> {
        match scope.datasets.get(&name.name) {
            Some(s) => Ok(s.clone()),
            None => {
                let hint = if self.recorded.contains_key(&name.name) {
                    " here (it is only bound inside a branch or loop body)".to_string()
                } else if scope.datasets.is_empty() {
                    String::new()
                } else {
                    format!("; bound datasets: {}", list(scope.datasets.keys().map(String::as_str)))
                };
                self.error(
                    ValidationErrorKind::UnknownDataset,
                    format!("unknown dataset {name}{hint}"),
                    name.loc,
                );
                Err(())
            }
        }
    }

    fn source(&mut self, scope: &Scope, name: &Ident) -> Option<Schema> {
        self.resolve(scope, name).ok().flatten()
    }

    fn column<'s>(&mut self, schema: &'s Schema, col: &Ident) -> Option<&'s Field> {
        let f = schema.field(&col.name);
        if f.is_none() {
            self.error(
                ValidationErrorKind::UnknownColumn,
                format!("unknown column {col}; available: {}", list(schema.names())),
                col.loc,
            );
        }
        f
    }

    fn expr_type(&mut self, expr: &Expr, table: Option<&Schema>, scope: &Scope) -> Option<ValueType> {
        let es = ExprScope { table, row_vars: &scope.row_vars };
        match typecheck(expr, &es) {
            Ok(t) => Some(t),
            Err(e) => {
                self.errors.push(e);
                None
            }
        }
    }

    fn expect_bool(&mut self, expr: &Expr, table: Option<&Schema>, scope: &Scope, what: &str) {
        if let Some(t) = self.expr_type(expr, table, scope) {
            if t != ValueType::Bool {
                self.error(
                    ValidationErrorKind::TypeMismatch,
                    format!("{what} must be BOOL, got {t}"),
                    expr.loc,
                );
            }
        }
    }

    /// Row counts for LIMIT/SKIP/SLICE: scalar INT, non-negative if literal.
    fn bound(&mut self, expr: &Expr, scope: &Scope, what: &str) {
        if let Some(t) = self.expr_type(expr, None, scope) {
            if t != ValueType::Int {
                self.error(
                    ValidationErrorKind::TypeMismatch,
                    format!("{what} must be INT, got {t}"),
                    expr.loc,
                );
            }
        }
        if let ExprKind::Literal { literal: Literal::Int(v) } = expr.kind {
            if v < 0 {
                self.error(
                    ValidationErrorKind::InvalidArgument,
                    format!("{what} must be non-negative, got {v}"),
                    expr.loc,
                );
            }
        }
    }

    fn new_column(&mut self, schema: &Schema, col: &Ident) -> bool {
        if schema.field(&col.name).is_some() {
            self.error(
                ValidationErrorKind::SchemaMismatch,
                format!("column {col} already exists (RENAME or DROP it first)"),
                col.loc,
            );
            false
        } else {
            true
        }
    }

    fn build_schema(&mut self, fields: Vec<Field>, loc: SourceLocation) -> Option<Schema> {
        if fields.is_empty() {
            self.error(ValidationErrorKind::SchemaMismatch, "result would have no columns", loc);
            return None;
        }
        match Schema::new(fields) {
            Ok(s) => Some(s),
            Err(e) => {
                self.error(ValidationErrorKind::SchemaMismatch, e.to_string(), loc);
                None
            }
        }
    }

    fn block(&mut self, scope: &mut Scope, stmts: &[Statement]) {
        for s in stmts {
            let schema = self.infer(scope, s);
            if let Some(target) = s.kind.target() {
                let prov = Provenance::Statement {
                    step: self.step.clone(),
                    keyword: s.kind.keyword(),
                    location: s.loc,
                };
                self.bind(scope, target, schema, prov);
            }
        }
    }

    /// Validates the two sides of an IF or TRY and merges what both bind.
    fn branches(&mut self, scope: &mut Scope, a: &[Statement], b: Option<&[Statement]>) {
        let names_before = self.names.clone();
        let mut a_scope = scope.clone();
        self.block(&mut a_scope, a);
        let Some(b) = b else {
            return;
        };
        let names_after_a = std::mem::replace(&mut self.names, names_before);
        let mut b_scope = scope.clone();
        self.block(&mut b_scope, b);
        for (name, loc) in names_after_a {
            self.names.entry(name).or_insert(loc);
        }
        for (name, b_schema) in &b_scope.datasets {
            if scope.datasets.contains_key(name) {
                continue;
            }
            let Some(a_schema) = a_scope.datasets.get(name) else {
                continue;
            };
            let merged = match (a_schema, b_schema) {
                (Some(x), Some(y)) if x == y => Some(x.clone()),
                (Some(x), Some(y)) => {
                    let loc = self.names.get(name).copied().unwrap_or_default();
                    self.error(
                        ValidationErrorKind::SchemaMismatch,
                        format!("{name} is bound with different schemas on each side: {x} vs {y}"),
                        loc,
                    );
                    None
                }
                _ => None,
            };
            scope.datasets.insert(name.clone(), merged);
        }
    }

    fn infer(&mut self, scope: &mut Scope, stmt: &Statement) -> Option<Schema> {
        use StatementKind as S;
        use ValidationErrorKind as K;
        match &stmt.kind {
            S::Filter { source, predicate, .. } => {
                let src = self.source(scope, source)?;
                self.expect_bool(predicate, Some(&src), scope, "WHERE condition");
                Some(src)
            }
            S::Select { source, columns, .. } => {
                let src = self.source(scope, source)?;
                let mut fields = Vec::new();
                for c in columns {
                    if let Some(f) = self.column(&src, c) {
                        fields.push(f.clone());
                    }
                }
                if fields.len() != columns.len() {
                    return None;
                }
                self.build_schema(fields, stmt.loc)
            }
            S::Distinct { source, .. } => self.source(scope, source),
            S::Map { source, column, expr, .. } => {
                let src = self.source(scope, source)?;
                let fresh = self.new_column(&src, column);
                let ty = self.expr_type(expr, Some(&src), scope)?;
                if !fresh {
                    return None;
                }
                let mut fields = src.fields().to_vec();
                fields.push(Field::new(column.name.clone(), ty));
                self.build_schema(fields, stmt.loc)
            }
            S::AddColumn { source, column, value, .. } => {
                let src = self.source(scope, source)?;
                if !self.new_column(&src, column) {
                    return None;
                }
                let mut fields = src.fields().to_vec();
                fields.push(Field::new(column.name.clone(), value.value_type()));
                self.build_schema(fields, stmt.loc)
            }
            S::Rename { source, renames, .. } => {
                let src = self.source(scope, source)?;
                let mut fields = src.fields().to_vec();
                let mut ok = true;
                for (i, pair) in renames.iter().enumerate() {
                    if renames[..i].iter().any(|p| p.from.name == pair.from.name) {
                        self.error(
                            K::SchemaMismatch,
                            format!("column {} is renamed twice", pair.from),
                            pair.from.loc,
                        );
                        ok = false;
                        continue;
                    }
                    match src.index_of(&pair.from.name) {
                        Some(idx) => fields[idx].name = pair.to.name.clone(),
                        None => {
                            self.column(&src, &pair.from);
                            ok = false;
                        }
                    }
                }
                if !ok {
                    return None;
                }
                self.build_schema(fields, stmt.loc)
            }
            S::Drop { source, columns, .. } => {
                let src = self.source(scope, source)?;
                let mut ok = true;
                for (i, c) in columns.iter().enumerate() {
                    if columns[..i].iter().any(|p| p.name == c.name) {
                        self.error(K::SchemaMismatch, format!("column {c} is dropped twice"), c.loc);
                        ok = false;
                    } else if self.column(&src, c).is_none() {
                        ok = false;
                    }
                }
                if !ok {
                    return None;
                }
                let fields = src
                    .fields()
                    .iter()
                    .filter(|f| !columns.iter().any(|c| c.name == f.name))
                    .cloned()
                    .collect();
                self.build_schema(fields, stmt.loc)
            }
            S::Aggregate { source, group_by, computes, .. } => {
                let src = self.source(scope, source)?;
                let mut fields = Vec::new();
                let mut ok = true;
                for g in group_by {
                    match self.column(&src, g) {
                        Some(f) => fields.push(f.clone()),
                        None => ok = false,
                    }
                }
                for c in computes {
                    match self.aggregate_type(&src, c) {
                        Some(ty) => fields.push(Field::new(c.alias.name.clone(), ty)),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                self.build_schema(fields, stmt.loc)
            }
            S::Sort { source, key, .. } => {
                let src = self.source(scope, source)?;
                self.column(&src, key)?;
                Some(src)
            }
            S::Limit { source, count, .. } | S::Skip { source, count, .. } => {
                let src = self.source(scope, source);
                self.bound(count, scope, &format!("{} count", stmt.kind.keyword()));
                src
            }
            S::Slice { source, start, end, .. } => {
                let src = self.source(scope, source);
                self.bound(start, scope, "SLICE start");
                self.bound(end, scope, "SLICE end");
                src
            }
            S::Join { left, right, left_key, right_key, .. }
            | S::LeftJoin { left, right, left_key, right_key, .. } => {
                let l = self.source(scope, left);
                let r = self.source(scope, right);
                let (l, r) = (l?, r?);
                let lf = self.column(&l, left_key).cloned();
                let rf = self.column(&r, right_key).cloned();
                let (lf, rf) = (lf?, rf?);
                if !lf.ty.comparable_with(rf.ty) {
                    self.error(
                        K::TypeMismatch,
                        format!(
                            "join keys have incompatible types: {left_key} is {}, {right_key} is {}",
                            lf.ty, rf.ty
                        ),
                        right_key.loc,
                    );
                    return None;
                }
                let mut fields = l.fields().to_vec();
                for f in r.fields().iter().filter(|f| f.name != rf.name) {
                    if l.field(&f.name).is_some() {
                        self.error(
                            K::SchemaMismatch,
                            format!(
                                "column {} exists in both {left} and {right}; RENAME one side first",
                                f.name
                            ),
                            right.loc,
                        );
                        return None;
                    }
                    fields.push(f.clone());
                }
                self.build_schema(fields, stmt.loc)
            }
            S::Union { left, right, .. } => {
                let l = self.source(scope, left);
                let r = self.source(scope, right);
                let (l, r) = (l?, r?);
                if l != r {
                    self.error(
                        K::SchemaMismatch,
                        format!("UNION needs identical schemas: {left} is {l}, {right} is {r}"),
                        right.loc,
                    );
                    return None;
                }
                Some(l)
            }
            S::Read { schema, .. } | S::Fetch { schema, .. } => self.table_type_schema(schema),
            S::Write { source, .. } | S::Post { source, .. } => {
                let _ = self.resolve(scope, source);
                None
            }
            S::If { condition, then_branch, else_branch } => {
                self.expect_bool(condition, None, scope, "IF condition");
                self.branches(scope, then_branch, else_branch.as_deref());
                None
            }
            S::Try { body, on_error } => {
                self.branches(scope, body, Some(on_error));
                None
            }
            S::ForEach { var, source, body } => {
                let src = self.source(scope, source);
                if scope.row_vars.iter().any(|(n, _)| *n == var.name) {
                    self.error(
                        K::DuplicateBinding,
                        format!("row variable {var} shadows an enclosing FOR_EACH"),
                        var.loc,
                    );
                }
                let mut inner = scope.clone();
                // An unknown source still gets its body checked, against an
                // empty row schema.
                inner.row_vars.push((var.name.clone(), src.unwrap_or_default()));
                self.block(&mut inner, body);
                None
            }
            S::While { condition, body } => {
                self.expect_bool(condition, None, scope, "WHILE condition");
                let mut inner = scope.clone();
                self.block(&mut inner, body);
                None
            }
        }
    }

    fn aggregate_type(&mut self, src: &Schema, c: &AggregateSpec) -> Option<ValueType> {
        use ValidationErrorKind as K;
        let func = c.func;
        let arg = match (&c.arg, func) {
            (None, AggregateFn::Count) => return Some(ValueType::Int),
            (Some(a), AggregateFn::Count) => {
                self.error(
                    K::InvalidArgument,
                    "COUNT() takes no argument and counts rows",
                    a.loc,
                );
                return None;
            }
            (None, _) => {
                self.error(
                    K::InvalidArgument,
                    format!("{}() needs a column argument", func.name()),
                    c.loc,
                );
                return None;
            }
            (Some(a), _) => a,
        };
        let ty = self.column(src, arg)?.ty;
        let allowed = match func {
            AggregateFn::Sum | AggregateFn::Avg => ty.is_numeric(),
            AggregateFn::Min | AggregateFn::Max => ty != ValueType::Bool,
            AggregateFn::Count => unreachable!(),
        };
        if !allowed {
            self.error(
                K::TypeMismatch,
                format!("{}({arg}) is not defined for {ty}", func.name()),
                arg.loc,
            );
            return None;
        }
        Some(if func == AggregateFn::Avg { ValueType::Decimal } else { ty })
    }
}
