//! Tree-walking interpreter.

mod error;
mod eval;
pub mod ops;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

pub use error::{EvalError, InputError, RunError, RuntimeError, RuntimeErrorKind};
pub use eval::{binary, eval_expr, truth, RowScope, RowVar};

use crate::io::{self, IoAdapter};
use crate::syntax::ast::*;
use crate::value::{Table, Value};
use ops::{AggregateCall, JoinKind};

pub const DEFAULT_WHILE_CAP: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Deny READ, WRITE, FETCH and POST without touching the adapter.
    pub sandbox: bool,
    /// Maximum number of WHILE iterations before AssertionFailed.
    pub while_cap: u64,
    /// Checked before every statement and loop iteration.
    pub deadline: Option<Instant>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { sandbox: false, while_cap: DEFAULT_WHILE_CAP, deadline: None }
    }
}

/// Datasets bound so far plus the FOR_EACH row variables in scope.
#[derive(Debug, Clone, Default)]
pub struct RuntimeEnvironment {
    pub datasets: HashMap<String, Arc<Table>>,
    pub row_vars: Vec<RowVar>,
}

/// Runs a validated pipeline. `inputs` must hold exactly the declared
/// INPUT tables with their declared schemas.
pub fn run_pipeline(
    ast: &Pipeline,
    inputs: &HashMap<String, Table>,
    io: &dyn IoAdapter,
    options: &RunOptions,
) -> Result<Table, RunError> {
    let env = run_pipeline_env(ast, inputs, io, options)?;
    let out = env.datasets.get(&ast.output.name).ok_or_else(|| RuntimeError {
        kind: RuntimeErrorKind::Internal,
        message: format!("OUTPUT {} was never bound", ast.output.name),
        location: ast.output.loc,
        step: String::new(),
    })?;
    Ok(Table::clone(out))
}

/// Like [`run_pipeline`] but returns every pipeline-level binding.
pub fn run_pipeline_env(
    ast: &Pipeline,
    inputs: &HashMap<String, Table>,
    io: &dyn IoAdapter,
    options: &RunOptions,
) -> Result<RuntimeEnvironment, RunError> {
    let mut env = RuntimeEnvironment::default();
    for decl in &ast.inputs {
        let name = &decl.name.name;
        let declared = decl.schema.to_schema().map_err(|e| InputError::BadDeclaration {
            name: name.clone(),
            message: e.to_string(),
        })?;
        let table = inputs.get(name).ok_or_else(|| InputError::Missing(name.clone()))?;
        if table.schema() != &declared {
            return Err(InputError::SchemaMismatch {
                name: name.clone(),
                expected: declared,
                actual: table.schema().clone(),
            }
            .into());
        }
        env.datasets.insert(name.clone(), Arc::new(table.clone()));
    }
    let mut extra: Vec<&String> =
        inputs.keys().filter(|k| !ast.inputs.iter().any(|d| d.name.name == **k)).collect();
    extra.sort();
    if let Some(name) = extra.first() {
        return Err(InputError::Unexpected(name.to_string()).into());
    }

    let mut interp = Interpreter { io, options, step: String::new() };
    for step in &ast.steps {
        interp.step = step.name.name.clone();
        interp.block(&mut env, &step.body)?;
    }
    Ok(env)
}

struct Interpreter<'a> {
    io: &'a dyn IoAdapter,
    options: &'a RunOptions,
    step: String,
}

impl Interpreter<'_> {
    fn fail(&self, err: EvalError, loc: SourceLocation) -> RuntimeError {
        RuntimeError { kind: err.kind, message: err.message, location: loc, step: self.step.clone() }
    }

    fn check_deadline(&self, loc: SourceLocation) -> Result<(), RuntimeError> {
        match self.options.deadline {
            Some(d) if Instant::now() >= d => Err(self.fail(
                EvalError::new(RuntimeErrorKind::Timeout, "execution deadline exceeded"),
                loc,
            )),
            _ => Ok(()),
        }
    }

    fn block(&mut self, env: &mut RuntimeEnvironment, stmts: &[Statement]) -> Result<(), RuntimeError> {
        for s in stmts {
            self.statement(env, s)?;
        }
        Ok(())
    }

    fn statement(&mut self, env: &mut RuntimeEnvironment, stmt: &Statement) -> Result<(), RuntimeError> {
        self.check_deadline(stmt.loc)?;
        let loc = stmt.loc;
        match &stmt.kind {
            StatementKind::If { condition, then_branch, else_branch } => {
                let cond = self.condition(env, condition).map_err(|e| self.fail(e, loc))?;
                if cond {
                    self.block(env, then_branch)
                } else if let Some(b) = else_branch {
                    self.block(env, b)
                } else {
                    Ok(())
                }
            }
            StatementKind::ForEach { var, source, body } => {
                let table = Arc::new(Table::clone(self.dataset(env, source).map_err(|e| self.fail(e, loc))?));
                for row in table.rows() {
                    self.check_deadline(loc)?;
                    let mut inner = env.clone();
                    inner.row_vars.push(RowVar {
                        name: var.name.clone(),
                        schema: table.schema().clone(),
                        row: row.clone(),
                    });
                    self.block(&mut inner, body)?;
                }
                Ok(())
            }
            StatementKind::While { condition, body } => {
                let mut iterations = 0u64;
                loop {
                    self.check_deadline(loc)?;
                    if !self.condition(env, condition).map_err(|e| self.fail(e, loc))? {
                        return Ok(());
                    }
                    if iterations == self.options.while_cap {
                        return Err(self.fail(
                            EvalError::new(
                                RuntimeErrorKind::AssertionFailed,
                                format!(
                                    "WHILE exceeded the iteration cap of {}",
                                    self.options.while_cap
                                ),
                            ),
                            loc,
                        ));
                    }
                    iterations += 1;
                    let mut inner = env.clone();
                    self.block(&mut inner, body)?;
                }
            }
            StatementKind::Try { body, on_error } => {
                let mut trial = env.clone();
                match self.block(&mut trial, body) {
                    Ok(()) => {
                        *env = trial;
                        Ok(())
                    }
                    Err(e) if e.kind == RuntimeErrorKind::Timeout => Err(e),
                    Err(_) => self.block(env, on_error),
                }
            }
            kind => {
                let result = self.data(env, kind).map_err(|e| self.fail(e, loc))?;
                if let (Some(target), Some(table)) = (kind.target(), result) {
                    env.datasets.insert(target.name.clone(), Arc::new(table));
                }
                Ok(())
            }
        }
    }

    fn dataset<'e>(&self, env: &'e RuntimeEnvironment, name: &Ident) -> Result<&'e Table, EvalError> {
        env.datasets
            .get(&name.name)
            .map(|t| t.as_ref())
            .ok_or_else(|| EvalError::internal(format!("dataset {name} is not bound")))
    }

    /// IF and WHILE conditions; null counts as false.
    fn condition(&self, env: &RuntimeEnvironment, cond: &Expr) -> Result<bool, EvalError> {
        let v = eval_expr(cond, RowScope::scalar(&env.row_vars))?;
        Ok(truth(v)? == Some(true))
    }

    fn bound(&self, env: &RuntimeEnvironment, expr: &Expr, what: &str) -> Result<usize, EvalError> {
        match eval_expr(expr, RowScope::scalar(&env.row_vars))? {
            Value::Int(n) if n >= 0 => Ok(n as usize),
            Value::Int(n) => Err(EvalError::conversion(format!("{what} must be non-negative, got {n}"))),
            Value::Null => Err(EvalError::conversion(format!("{what} is null"))),
            other => Err(EvalError::internal(format!("{what} is {other:?}"))),
        }
    }

    fn denied(&self, keyword: &str, target: &str) -> Option<EvalError> {
        if !self.options.sandbox {
            return None;
        }
        let kind = match keyword {
            "FETCH" | "POST" => RuntimeErrorKind::HttpError,
            _ => RuntimeErrorKind::IoError,
        };
        Some(EvalError::new(kind, format!("sandboxed: {keyword} {target} is not allowed")))
    }

    fn data(&self, env: &RuntimeEnvironment, kind: &StatementKind) -> Result<Option<Table>, EvalError> {
        use StatementKind as S;
        let vars = &env.row_vars;
        let names = |ids: &[Ident]| ids.iter().map(|i| i.name.clone()).collect::<Vec<_>>();
        let table = match kind {
            S::Filter { source, predicate, .. } => {
                ops::filter(self.dataset(env, source)?, predicate, vars)?
            }
            S::Select { source, columns, .. } => {
                let cols = names(columns);
                let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
                ops::select(self.dataset(env, source)?, &cols)?
            }
            S::Distinct { source, .. } => ops::distinct(self.dataset(env, source)?),
            S::Map { source, column, expr, .. } => {
                ops::map(self.dataset(env, source)?, &column.name, expr, vars)?
            }
            S::Rename { source, renames, .. } => {
                let pairs: Vec<(&str, &str)> =
                    renames.iter().map(|p| (p.from.name.as_str(), p.to.name.as_str())).collect();
                ops::rename(self.dataset(env, source)?, &pairs)?
            }
            S::Drop { source, columns, .. } => {
                let cols = names(columns);
                let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
                ops::drop(self.dataset(env, source)?, &cols)?
            }
            S::AddColumn { source, column, value, .. } => {
                ops::add_column(self.dataset(env, source)?, &column.name, &value.to_value())?
            }
            S::Aggregate { source, group_by, computes, .. } => {
                let keys = names(group_by);
                let keys: Vec<&str> = keys.iter().map(String::as_str).collect();
                let calls: Vec<AggregateCall> = computes
                    .iter()
                    .map(|c| AggregateCall {
                        func: c.func,
                        arg: c.arg.as_ref().map(|a| a.name.clone()),
                        alias: c.alias.name.clone(),
                    })
                    .collect();
                ops::aggregate(self.dataset(env, source)?, &keys, &calls)?
            }
            S::Sort { source, key, order, .. } => {
                ops::sort(self.dataset(env, source)?, &key.name, *order)?
            }
            S::Limit { source, count, .. } => {
                ops::limit(self.dataset(env, source)?, self.bound(env, count, "LIMIT count")?)
            }
            S::Skip { source, count, .. } => {
                ops::skip(self.dataset(env, source)?, self.bound(env, count, "SKIP count")?)
            }
            S::Slice { source, start, end, .. } => {
                let a = self.bound(env, start, "SLICE start")?;
                let b = self.bound(env, end, "SLICE end")?;
                ops::slice(self.dataset(env, source)?, a, b)
            }
            S::Join { left, right, left_key, right_key, .. }
            | S::LeftJoin { left, right, left_key, right_key, .. } => {
                let jk = if matches!(kind, S::Join { .. }) { JoinKind::Inner } else { JoinKind::Left };
                ops::join(
                    self.dataset(env, left)?,
                    self.dataset(env, right)?,
                    &left_key.name,
                    &right_key.name,
                    jk,
                )?
            }
            S::Union { left, right, .. } => {
                ops::union(self.dataset(env, left)?, self.dataset(env, right)?)?
            }
            S::Read { path, format, schema, .. } => {
                if let Some(e) = self.denied("READ", &path.value) {
                    return Err(e);
                }
                let schema = schema.to_schema().map_err(|e| EvalError::internal(e.to_string()))?;
                let bytes = self.io.read_file(&path.value).map_err(|e| {
                    EvalError::new(RuntimeErrorKind::IoError, format!("READ {}: {e}", path.value))
                })?;
                let parsed = match format {
                    FileFormat::Json => io::table_from_json(&bytes, &schema),
                    FileFormat::Csv => io::table_from_csv(&bytes, &schema),
                };
                parsed.map_err(|e| EvalError::conversion(format!("READ {}: {e}", path.value)))?
            }
            S::Write { source, path, format } => {
                if let Some(e) = self.denied("WRITE", &path.value) {
                    return Err(e);
                }
                let table = self.dataset(env, source)?;
                let bytes = match format {
                    FileFormat::Json => io::table_to_json(table),
                    FileFormat::Csv => io::table_to_csv(table),
                };
                self.io.write_file(&path.value, &bytes).map_err(|e| {
                    EvalError::new(RuntimeErrorKind::IoError, format!("WRITE {}: {e}", path.value))
                })?;
                return Ok(None);
            }
            S::Fetch { url, schema, .. } => {
                if let Some(e) = self.denied("FETCH", &url.value) {
                    return Err(e);
                }
                check_url(&url.value)?;
                let schema = schema.to_schema().map_err(|e| EvalError::internal(e.to_string()))?;
                let http = |m: String| EvalError::new(RuntimeErrorKind::HttpError, m);
                let resp = self
                    .io
                    .http_get(&url.value)
                    .map_err(|e| http(format!("FETCH {}: {e}", url.value)))?;
                if !(200..300).contains(&resp.status) {
                    return Err(http(format!("FETCH {}: status {}", url.value, resp.status)));
                }
                io::table_from_json(&resp.body, &schema)
                    .map_err(|e| EvalError::conversion(format!("FETCH {}: {e}", url.value)))?
            }
            S::Post { source, url } => {
                if let Some(e) = self.denied("POST", &url.value) {
                    return Err(e);
                }
                check_url(&url.value)?;
                let http = |m: String| EvalError::new(RuntimeErrorKind::HttpError, m);
                let body = io::table_to_json(self.dataset(env, source)?);
                let status = self
                    .io
                    .http_post(&url.value, &body)
                    .map_err(|e| http(format!("POST {}: {e}", url.value)))?;
                if !(200..300).contains(&status) {
                    return Err(http(format!("POST {}: status {status}", url.value)));
                }
                return Ok(None);
            }
            S::If { .. } | S::ForEach { .. } | S::While { .. } | S::Try { .. } => {
                return Err(EvalError::internal("control flow reached the data path"))
            }
        };
        Ok(Some(table))
    }
}

fn check_url(url: &str) -> Result<(), EvalError> {
    if url.starts_with("http://") || url.starts_with("https://") {
        Ok(())
    } else {
        Err(EvalError::new(
            RuntimeErrorKind::HttpError,
            format!("{url:?} is not an absolute http(s) URL"),
        ))
    }
}
