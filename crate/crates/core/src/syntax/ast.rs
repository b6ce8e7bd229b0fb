//! Syntax tree for Anka pipelines. Every node carries the location of its
//! first token.
//!
//! The serde representation is the JSON AST dump printed by `anka parse --ast`.

use std::fmt;

use chrono::{NaiveDate, NaiveDateTime};
use serde::Serialize;

use crate::value::{Decimal, Field, Schema, TableError, Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct SourceLocation {
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in characters.
    pub column: u32,
    /// 0-based byte offset.
    pub offset: usize,
}

impl SourceLocation {
    pub fn new(line: u32, column: u32, offset: usize) -> Self {
        SourceLocation { line, column, offset }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ident {
    pub name: String,
    pub loc: SourceLocation,
}

impl Ident {
    pub fn new(name: impl Into<String>, loc: SourceLocation) -> Self {
        Ident { name: name.into(), loc }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pipeline {
    pub name: Ident,
    pub inputs: Vec<InputDecl>,
    pub steps: Vec<Step>,
    pub output: Ident,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDecl {
    pub name: Ident,
    pub schema: TableType,
    pub loc: SourceLocation,
}

/// `TABLE[name: TYPE, ...]` as written in source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableType {
    pub fields: Vec<FieldDecl>,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDecl {
    pub name: Ident,
    #[serde(rename = "type")]
    pub ty: ValueType,
}

impl TableType {
    pub fn to_schema(&self) -> Result<Schema, TableError> {
        Schema::new(self.fields.iter().map(|f| Field::new(f.name.name.clone(), f.ty)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub name: Ident,
    pub body: Vec<Statement>,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statement {
    #[serde(flatten)]
    pub kind: StatementKind,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SortOrder {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FileFormat {
    Json,
    Csv,
}

impl FileFormat {
    pub fn keyword(self) -> &'static str {
        match self {
            FileFormat::Json => "JSON",
            FileFormat::Csv => "CSV",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggregateFn {
    pub const ALL: [AggregateFn; 5] =
        [AggregateFn::Count, AggregateFn::Sum, AggregateFn::Avg, AggregateFn::Min, AggregateFn::Max];

    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Min => "MIN",
            AggregateFn::Max => "MAX",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        AggregateFn::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// `FN(arg) AS alias` inside COMPUTE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateSpec {
    pub func: AggregateFn,
    pub arg: Option<Ident>,
    pub alias: Ident,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenamePair {
    pub from: Ident,
    pub to: Ident,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringLit {
    pub value: String,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatementKind {
    Filter { source: Ident, predicate: Expr, target: Ident },
    Select { source: Ident, columns: Vec<Ident>, target: Ident },
    Distinct { source: Ident, target: Ident },
    Map { source: Ident, column: Ident, expr: Expr, target: Ident },
    Rename { source: Ident, renames: Vec<RenamePair>, target: Ident },
    Drop { source: Ident, columns: Vec<Ident>, target: Ident },
    AddColumn { source: Ident, column: Ident, value: Literal, target: Ident },
    Aggregate { source: Ident, group_by: Vec<Ident>, computes: Vec<AggregateSpec>, target: Ident },
    Sort { source: Ident, key: Ident, order: SortOrder, target: Ident },
    Limit { source: Ident, count: Expr, target: Ident },
    Skip { source: Ident, count: Expr, target: Ident },
    Slice { source: Ident, start: Expr, end: Expr, target: Ident },
    Join { left: Ident, right: Ident, left_key: Ident, right_key: Ident, target: Ident },
    LeftJoin { left: Ident, right: Ident, left_key: Ident, right_key: Ident, target: Ident },
    Union { left: Ident, right: Ident, target: Ident },
    Read { path: StringLit, format: FileFormat, schema: TableType, target: Ident },
    Write { source: Ident, path: StringLit, format: FileFormat },
    Fetch { url: StringLit, schema: TableType, target: Ident },
    Post { source: Ident, url: StringLit },
    If { condition: Expr, then_branch: Vec<Statement>, else_branch: Option<Vec<Statement>> },
    ForEach { var: Ident, source: Ident, body: Vec<Statement> },
    While { condition: Expr, body: Vec<Statement> },
    Try { body: Vec<Statement>, on_error: Vec<Statement> },
}

impl StatementKind {
    /// Leading keyword of the statement.
    pub fn keyword(&self) -> &'static str {
        use StatementKind::*;
        match self {
            Filter { .. } => "FILTER",
            Select { .. } => "SELECT",
            Distinct { .. } => "DISTINCT",
            Map { .. } => "MAP",
            Rename { .. } => "RENAME",
            Drop { .. } => "DROP",
            AddColumn { .. } => "ADD_COLUMN",
            Aggregate { .. } => "AGGREGATE",
            Sort { .. } => "SORT",
            Limit { .. } => "LIMIT",
            Skip { .. } => "SKIP",
            Slice { .. } => "SLICE",
            Join { .. } => "JOIN",
            LeftJoin { .. } => "LEFT_JOIN",
            Union { .. } => "UNION",
            Read { .. } => "READ",
            Write { .. } => "WRITE",
            Fetch { .. } => "FETCH",
            Post { .. } => "POST",
            If { .. } => "IF",
            ForEach { .. } => "FOR_EACH",
            While { .. } => "WHILE",
            Try { .. } => "TRY",
        }
    }

    /// The INTO target, for statements that produce a dataset.
    pub fn target(&self) -> Option<&Ident> {
        use StatementKind::*;
        match self {
            Filter { target, .. }
            | Select { target, .. }
            | Distinct { target, .. }
            | Map { target, .. }
            | Rename { target, .. }
            | Drop { target, .. }
            | AddColumn { target, .. }
            | Aggregate { target, .. }
            | Sort { target, .. }
            | Limit { target, .. }
            | Skip { target, .. }
            | Slice { target, .. }
            | Join { target, .. }
            | LeftJoin { target, .. }
            | Union { target, .. }
            | Read { target, .. }
            | Fetch { target, .. } => Some(target),
            Write { .. } | Post { .. } | If { .. } | ForEach { .. } | While { .. } | Try { .. } => {
                None
            }
        }
    }

    pub fn is_control_flow(&self) -> bool {
        matches!(
            self,
            StatementKind::If { .. }
                | StatementKind::ForEach { .. }
                | StatementKind::While { .. }
                | StatementKind::Try { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "UPPERCASE")]
pub enum Literal {
    Int(i64),
    Decimal(Decimal),
    String(String),
    Bool(bool),
    Date(NaiveDate),
    #[serde(rename = "DATETIME")]
    DateTime(NaiveDateTime),
}

impl Literal {
    pub fn value_type(&self) -> ValueType {
        match self {
            Literal::Int(_) => ValueType::Int,
            Literal::Decimal(_) => ValueType::Decimal,
            Literal::String(_) => ValueType::String,
            Literal::Bool(_) => ValueType::Bool,
            Literal::Date(_) => ValueType::Date,
            Literal::DateTime(_) => ValueType::DateTime,
        }
    }

    /// `None` for null, which has no literal form.
    pub fn from_value(v: &Value) -> Option<Literal> {
        Some(match v {
            Value::Null => return None,
            Value::Int(i) => Literal::Int(*i),
            Value::Decimal(d) => Literal::Decimal(*d),
            Value::Str(s) => Literal::String(s.clone()),
            Value::Bool(b) => Literal::Bool(*b),
            Value::Date(d) => Literal::Date(*d),
            Value::DateTime(d) => Literal::DateTime(*d),
        })
    }

    pub fn to_value(&self) -> Value {
        match self {
            Literal::Int(v) => Value::Int(*v),
            Literal::Decimal(d) => Value::Decimal(*d),
            Literal::String(s) => Value::Str(s.clone()),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Date(d) => Value::Date(*d),
            Literal::DateTime(d) => Value::DateTime(*d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "AND",
            BinaryOp::Or => "OR",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            // NOT sits at 3.
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expr {
    #[serde(flatten)]
    pub kind: ExprKind,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "expr", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExprKind {
    Literal { literal: Literal },
    /// Bare column of the table being processed.
    Column { name: Ident },
    /// `row.field` on a FOR_EACH row variable.
    Field { var: Ident, field: Ident },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { func: Ident, args: Vec<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLocation) -> Self {
        Expr { kind, loc }
    }
}

// Location stripping, so ASTs can be compared structurally.

fn clear_ident(id: &mut Ident) {
    id.loc = SourceLocation::default();
}

fn clear_table_type(t: &mut TableType) {
    t.loc = SourceLocation::default();
    for f in &mut t.fields {
        clear_ident(&mut f.name);
    }
}

fn clear_expr(e: &mut Expr) {
    e.loc = SourceLocation::default();
    match &mut e.kind {
        ExprKind::Literal { .. } => {}
        ExprKind::Column { name } => clear_ident(name),
        ExprKind::Field { var, field } => {
            clear_ident(var);
            clear_ident(field);
        }
        ExprKind::Unary { operand, .. } => clear_expr(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            clear_expr(lhs);
            clear_expr(rhs);
        }
        ExprKind::Call { func, args } => {
            clear_ident(func);
            args.iter_mut().for_each(clear_expr);
        }
    }
}

fn clear_statements(stmts: &mut [Statement]) {
    stmts.iter_mut().for_each(clear_statement);
}

fn clear_statement(s: &mut Statement) {
    use StatementKind::*;
    s.loc = SourceLocation::default();
    match &mut s.kind {
        Filter { source, predicate, target } => {
            clear_ident(source);
            clear_expr(predicate);
            clear_ident(target);
        }
        Select { source, columns, target } | Drop { source, columns, target } => {
            clear_ident(source);
            columns.iter_mut().for_each(clear_ident);
            clear_ident(target);
        }
        Distinct { source, target } => {
            clear_ident(source);
            clear_ident(target);
        }
        Map { source, column, expr, target } => {
            clear_ident(source);
            clear_ident(column);
            clear_expr(expr);
            clear_ident(target);
        }
        Rename { source, renames, target } => {
            clear_ident(source);
            for p in renames {
                clear_ident(&mut p.from);
                clear_ident(&mut p.to);
            }
            clear_ident(target);
        }
        AddColumn { source, column, target, .. } => {
            clear_ident(source);
            clear_ident(column);
            clear_ident(target);
        }
        Aggregate { source, group_by, computes, target } => {
            clear_ident(source);
            group_by.iter_mut().for_each(clear_ident);
            for c in computes {
                c.loc = SourceLocation::default();
                if let Some(a) = &mut c.arg {
                    clear_ident(a);
                }
                clear_ident(&mut c.alias);
            }
            clear_ident(target);
        }
        Sort { source, key, target, .. } => {
            clear_ident(source);
            clear_ident(key);
            clear_ident(target);
        }
        Limit { source, count, target } | Skip { source, count, target } => {
            clear_ident(source);
            clear_expr(count);
            clear_ident(target);
        }
        Slice { source, start, end, target } => {
            clear_ident(source);
            clear_expr(start);
            clear_expr(end);
            clear_ident(target);
        }
        Join { left, right, left_key, right_key, target }
        | LeftJoin { left, right, left_key, right_key, target } => {
            for id in [left, right, left_key, right_key, target] {
                clear_ident(id);
            }
        }
        Union { left, right, target } => {
            clear_ident(left);
            clear_ident(right);
            clear_ident(target);
        }
        Read { path, schema, target, .. } => {
            path.loc = SourceLocation::default();
            clear_table_type(schema);
            clear_ident(target);
        }
        Write { source, path, .. } => {
            clear_ident(source);
            path.loc = SourceLocation::default();
        }
        Fetch { url, schema, target } => {
            url.loc = SourceLocation::default();
            clear_table_type(schema);
            clear_ident(target);
        }
        Post { source, url } => {
            clear_ident(source);
            url.loc = SourceLocation::default();
        }
        If { condition, then_branch, else_branch } => {
            clear_expr(condition);
            clear_statements(then_branch);
            if let Some(e) = else_branch {
                clear_statements(e);
            }
        }
        ForEach { var, source, body } => {
            clear_ident(var);
            clear_ident(source);
            clear_statements(body);
        }
        While { condition, body } => {
            clear_expr(condition);
            clear_statements(body);
        }
        Try { body, on_error } => {
            clear_statements(body);
            clear_statements(on_error);
        }
    }
}

impl Pipeline {
    /// Copy of the tree with every location reset to the default.
    pub fn without_locations(&self) -> Pipeline {
        let mut p = self.clone();
        p.loc = SourceLocation::default();
        clear_ident(&mut p.name);
        clear_ident(&mut p.output);
        for input in &mut p.inputs {
            input.loc = SourceLocation::default();
            clear_ident(&mut input.name);
            clear_table_type(&mut input.schema);
        }
        for step in &mut p.steps {
            step.loc = SourceLocation::default();
            clear_ident(&mut step.name);
            clear_statements(&mut step.body);
        }
        p
    }

    /// Equality ignoring source locations.
    pub fn structurally_eq(&self, other: &Pipeline) -> bool {
        self.without_locations() == other.without_locations()
    }

    /// Every statement in textual order, descending into control flow.
    pub fn statements(&self) -> Vec<&Statement> {
        fn walk<'a>(stmts: &'a [Statement], out: &mut Vec<&'a Statement>) {
            for s in stmts {
                out.push(s);
                match &s.kind {
                    StatementKind::If { then_branch, else_branch, .. } => {
                        walk(then_branch, out);
                        if let Some(e) = else_branch {
                            walk(e, out);
                        }
                    }
                    StatementKind::ForEach { body, .. } | StatementKind::While { body, .. } => {
                        walk(body, out)
                    }
                    StatementKind::Try { body, on_error } => {
                        walk(body, out);
                        walk(on_error, out);
                    }
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        for step in &self.steps {
            walk(&step.body, &mut out);
        }
        out
    }
}
