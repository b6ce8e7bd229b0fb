//! Random well-typed pipelines, built by tracking the schema of every
//! dataset as statements are emitted. The generator keeps its own schema
//! bookkeeping so that it can serve as a cross-check of the validator.

use anka_core::value::{Field, Schema, ValueType};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gen::{self, literal_text, LEFT_NAMES, RIGHT_NAMES};

#[derive(Debug, Clone)]
pub struct GeneratedPipeline {
    pub source: String,
    pub inputs: Vec<(String, Schema)>,
    /// Schema the generator expects for the OUTPUT dataset.
    pub output_schema: Schema,
}

#[derive(Debug, Clone)]
struct Ds {
    name: String,
    schema: Schema,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    fresh: usize,
}

/// Datasets and row variables visible at a point.
#[derive(Clone, Default)]
struct Ctx {
    datasets: Vec<Ds>,
    vars: Vec<(String, Schema)>,
    depth: usize,
}

pub fn random_pipeline<R: Rng>(rng: &mut R) -> GeneratedPipeline {
    let mut g = Gen { rng, fresh: 0 };
    let mut ctx = Ctx::default();
    let mut inputs = Vec::new();
    let n_inputs = g.rng.gen_range(1..=2);
    for i in 0..n_inputs {
        let pool: &[&str] = if i == 0 { &LEFT_NAMES } else { &RIGHT_NAMES };
        let schema = gen::schema_from(g.rng, pool, 4);
        let name = format!("in{i}");
        inputs.push((name.clone(), schema.clone()));
        ctx.datasets.push(Ds { name, schema });
    }
    let mut text = String::from("PIPELINE generated:\n");
    for (name, schema) in &inputs {
        text.push_str(&format!("    INPUT {name}: {schema}\n"));
    }
    let n_steps = g.rng.gen_range(1..=4);
    let mut last = ctx.datasets[0].clone();
    for s in 0..n_steps {
        text.push_str(&format!("    STEP s{s}:\n"));
        let n_stmts = g.rng.gen_range(1..=3);
        for _ in 0..n_stmts {
            let (lines, bound) = g.top_statement(&ctx);
            for line in lines {
                text.push_str(&format!("        {line}\n"));
            }
            if let Some(ds) = bound {
                last = ds.clone();
                ctx.datasets.push(ds);
            }
        }
    }
    text.push_str(&format!("    OUTPUT {}\n", last.name));
    GeneratedPipeline { source: text, inputs, output_schema: last.schema }
}

impl<R: Rng> Gen<'_, R> {
    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    /// A statement at pipeline level; returns its lines and the dataset it
    /// makes visible afterwards, if any.
    fn top_statement(&mut self, ctx: &Ctx) -> (Vec<String>, Option<Ds>) {
        match self.rng.gen_range(0..10) {
            0 => self.if_statement(ctx),
            1 => self.try_statement(ctx),
            2 => (self.for_each(ctx), None),
            3 if self.rng.gen_bool(0.3) => (self.while_loop(ctx), None),
            _ => {
                let target = self.name("ds");
                let (line, ds) = self.data(ctx, &target);
                (vec![line], Some(ds))
            }
        }
    }

    fn if_statement(&mut self, ctx: &Ctx) -> (Vec<String>, Option<Ds>) {
        let cond = self.expr(ValueType::Bool, None, ctx, 2);
        let target = self.name("ds");
        let (then_line, ds) = self.data(ctx, &target);
        if self.rng.gen_bool(0.25) {
            // Binding on one side only; not visible afterwards.
            let lines = vec![format!("IF {cond} THEN"), format!("    {then_line}"), "END_IF".into()];
            return (lines, None);
        }
        let else_line = self.same_schema_variant(ctx, &then_line, &ds);
        let lines = vec![
            format!("IF {cond} THEN"),
            format!("    {then_line}"),
            "ELSE".into(),
            format!("    {else_line}"),
            "END_IF".into(),
        ];
        (lines, Some(ds))
    }

    /// Another statement binding `ds.name` with `ds.schema`.
    fn same_schema_variant(&mut self, ctx: &Ctx, line: &str, ds: &Ds) -> String {
        let sources: Vec<&Ds> = ctx.datasets.iter().filter(|d| d.schema == ds.schema).collect();
        match sources.choose(self.rng) {
            Some(src) if self.rng.gen_bool(0.7) => {
                let src = (*src).clone();
                let (line, _) = self.preserving(ctx, &src, &ds.name);
                line
            }
            _ => line.to_string(),
        }
    }

    fn try_statement(&mut self, ctx: &Ctx) -> (Vec<String>, Option<Ds>) {
        let src = ctx.datasets.choose(self.rng).unwrap().clone();
        let target = self.name("ds");
        let col = self.name("c");
        let ty = gen::value_type(self.rng);
        let expr = self.expr(ty, Some(&src.schema), ctx, 3);
        let value = literal_text(&gen::literal(self.rng, ty));
        let mut fields = src.schema.fields().to_vec();
        fields.push(Field::new(col.clone(), ty));
        let ds = Ds { name: target.clone(), schema: Schema::new(fields).unwrap() };
        let mut lines = vec!["TRY".to_string()];
        if self.rng.gen_bool(0.4) {
            let scratch = self.name("tmp");
            let (l, _) = self.data(ctx, &scratch);
            lines.push(format!("    {l}"));
        }
        lines.push(format!("    MAP {} WITH {col} => {expr} INTO {target}", src.name));
        lines.push("ON_ERROR".into());
        lines.push(format!("    ADD_COLUMN {} COLUMN {col} VALUE {value} INTO {target}", src.name));
        lines.push("END_TRY".into());
        (lines, Some(ds))
    }

    fn for_each(&mut self, ctx: &Ctx) -> Vec<String> {
        let src = ctx.datasets.choose(self.rng).unwrap().clone();
        let var = self.name("row");
        let mut inner = ctx.clone();
        inner.vars.push((var.clone(), src.schema.clone()));
        inner.depth += 1;
        let mut lines = vec![format!("FOR_EACH {var} IN {} DO", src.name)];
        let n = self.rng.gen_range(1..=2);
        for _ in 0..n {
            let body = if inner.depth < 2 && self.rng.gen_bool(0.3) {
                self.if_statement(&inner).0
            } else {
                let t = self.name("loop");
                let (l, ds) = self.data(&inner, &t);
                inner.datasets.push(ds);
                vec![l]
            };
            lines.extend(body.into_iter().map(|l| format!("    {l}")));
        }
        lines.push("END_FOR".into());
        lines
    }

    fn while_loop(&mut self, ctx: &Ctx) -> Vec<String> {
        let cond = self.expr(ValueType::Bool, None, ctx, 2);
        let t = self.name("loop");
        let (l, _) = self.data(ctx, &t);
        vec![format!("WHILE {cond} DO"), format!("    {l}"), "END_WHILE".into()]
    }

    /// A schema-preserving statement on `src`.
    fn preserving(&mut self, ctx: &Ctx, src: &Ds, target: &str) -> (String, Ds) {
        let s = &src.name;
        let line = match self.rng.gen_range(0..6) {
            0 => format!("FILTER {s} WHERE {} INTO {target}", self.expr(ValueType::Bool, Some(&src.schema), ctx, 3)),
            1 => format!("DISTINCT {s} INTO {target}"),
            2 => {
                let k = &src.schema.fields().choose(self.rng).unwrap().name;
                let dir = if self.rng.gen() { "ASC" } else { "DESC" };
                format!("SORT {s} BY {k} {dir} INTO {target}")
            }
            3 => format!("LIMIT {s} {} INTO {target}", self.bound(ctx)),
            4 => format!("SKIP {s} {} INTO {target}", self.bound(ctx)),
            _ => format!("SLICE {s} FROM {} TO {} INTO {target}", self.bound(ctx), self.bound(ctx)),
        };
        (line, Ds { name: target.to_string(), schema: src.schema.clone() })
    }

    fn bound(&mut self, ctx: &Ctx) -> String {
        if self.rng.gen_bool(0.3) && ctx.vars.iter().any(|(_, s)| s.fields().iter().any(|f| f.ty == ValueType::Int)) {
            self.expr(ValueType::Int, None, ctx, 1)
        } else {
            self.rng.gen_range(0..8).to_string()
        }
    }

    /// A data statement reading visible datasets and binding `target`.
    fn data(&mut self, ctx: &Ctx, target: &str) -> (String, Ds) {
        let src = ctx.datasets.choose(self.rng).unwrap().clone();
        let s = src.name.clone();
        let names: Vec<&str> = src.schema.names().collect();
        let ds = |schema: Schema| Ds { name: target.to_string(), schema };
        match self.rng.gen_range(0..12) {
            0 => {
                let mut pick = names.clone();
                pick.shuffle(self.rng);
                pick.truncate(self.rng.gen_range(1..=names.len()));
                let fields = pick.iter().map(|n| src.schema.field(n).unwrap().clone()).collect();
                (format!("SELECT {s} COLUMNS {} INTO {target}", pick.join(", ")), ds(Schema::new(fields).unwrap()))
            }
            1 | 2 => {
                let col = self.name("c");
                let ty = gen::value_type(self.rng);
                let e = self.expr(ty, Some(&src.schema), ctx, 3);
                let mut fields = src.schema.fields().to_vec();
                fields.push(Field::new(col.clone(), ty));
                (format!("MAP {s} WITH {col} => {e} INTO {target}"), ds(Schema::new(fields).unwrap()))
            }
            3 => {
                let n = self.rng.gen_range(1..=names.len());
                let mut fields = src.schema.fields().to_vec();
                let mut pairs = Vec::new();
                for f in fields.iter_mut().take(n) {
                    let new = self.name("c");
                    pairs.push(format!("{} AS {new}", f.name));
                    f.name = new;
                }
                (format!("RENAME {s} COLUMNS {} INTO {target}", pairs.join(", ")), ds(Schema::new(fields).unwrap()))
            }
            4 if names.len() > 1 => {
                let victim = names[self.rng.gen_range(0..names.len())];
                let fields = src.schema.fields().iter().filter(|f| f.name != victim).cloned().collect();
                (format!("DROP {s} COLUMNS {victim} INTO {target}"), ds(Schema::new(fields).unwrap()))
            }
            5 => {
                let col = self.name("c");
                let ty = gen::value_type(self.rng);
                let v = gen::literal(self.rng, ty);
                let mut fields = src.schema.fields().to_vec();
                fields.push(Field::new(col.clone(), v.value_type().unwrap()));
                (
                    format!("ADD_COLUMN {s} COLUMN {col} VALUE {} INTO {target}", literal_text(&v)),
                    ds(Schema::new(fields).unwrap()),
                )
            }
            6 => self.aggregate(&src, target),
            7 => {
                if let Some(line) = self.join(ctx, &src, target) {
                    return line;
                }
                self.preserving(ctx, &src, target)
            }
            8 => {
                let other = ctx
                    .datasets
                    .iter()
                    .filter(|d| d.schema == src.schema)
                    .collect::<Vec<_>>()
                    .choose(self.rng)
                    .map(|d| d.name.clone())
                    .unwrap_or(s.clone());
                (format!("UNION {s} WITH {other} INTO {target}"), ds(src.schema.clone()))
            }
            _ => self.preserving(ctx, &src, target),
        }
    }

    fn aggregate(&mut self, src: &Ds, target: &str) -> (String, Ds) {
        let mut keys: Vec<Field> = src.schema.fields().to_vec();
        keys.shuffle(self.rng);
        keys.truncate(self.rng.gen_range(0..=2.min(keys.len())));
        let mut fields = keys.clone();
        let mut calls = Vec::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            let alias = self.name("agg");
            let f = src.schema.fields().choose(self.rng).unwrap();
            let (text, ty) = match self.rng.gen_range(0..5) {
                1 if f.ty.is_numeric() => (format!("SUM({})", f.name), f.ty),
                2 if f.ty.is_numeric() => (format!("AVG({})", f.name), ValueType::Decimal),
                3 if f.ty != ValueType::Bool => (format!("MIN({})", f.name), f.ty),
                4 if f.ty != ValueType::Bool => (format!("MAX({})", f.name), f.ty),
                _ => ("COUNT()".to_string(), ValueType::Int),
            };
            calls.push(format!("{text} AS {alias}"));
            fields.push(Field::new(alias, ty));
        }
        let group = if keys.is_empty() {
            String::new()
        } else {
            let k: Vec<&str> = keys.iter().map(|f| f.name.as_str()).collect();
            format!(" GROUP_BY {}", k.join(", "))
        };
        let line = format!("AGGREGATE {}{group} COMPUTE {} INTO {target}", src.name, calls.join(", "));
        (line, Ds { name: target.to_string(), schema: Schema::new(fields).unwrap() })
    }

    fn join(&mut self, ctx: &Ctx, left: &Ds, target: &str) -> Option<(String, Ds)> {
        let mut options = Vec::new();
        for right in &ctx.datasets {
            for lf in left.schema.fields() {
                for rf in right.schema.fields() {
                    if !lf.ty.comparable_with(rf.ty) {
                        continue;
                    }
                    let clash = right
                        .schema
                        .fields()
                        .iter()
                        .any(|f| f.name != rf.name && left.schema.field(&f.name).is_some());
                    if !clash {
                        options.push((right.clone(), lf.clone(), rf.clone()));
                    }
                }
            }
        }
        let (right, lf, rf) = options.choose(self.rng)?.clone();
        let kw = if self.rng.gen() { "JOIN" } else { "LEFT_JOIN" };
        let mut fields = left.schema.fields().to_vec();
        fields.extend(right.schema.fields().iter().filter(|f| f.name != rf.name).cloned());
        let line = format!("{kw} {} WITH {} ON {} == {} INTO {target}", left.name, right.name, lf.name, rf.name);
        Some((line, Ds { name: target.to_string(), schema: Schema::new(fields).ok()? }))
    }

    /// An expression of type `ty`. With `table = None` only literals and
    /// row-variable fields are used.
    fn expr(&mut self, ty: ValueType, table: Option<&Schema>, ctx: &Ctx, depth: usize) -> String {
        let mut leaves: Vec<String> = Vec::new();
        if let Some(s) = table {
            leaves.extend(s.fields().iter().filter(|f| f.ty == ty).map(|f| f.name.clone()));
        }
        for (var, s) in &ctx.vars {
            leaves.extend(s.fields().iter().filter(|f| f.ty == ty).map(|f| format!("{var}.{}", f.name)));
        }
        if depth == 0 || self.rng.gen_bool(0.35) {
            if !leaves.is_empty() && self.rng.gen_bool(0.7) {
                return leaves.choose(self.rng).unwrap().clone();
            }
            return literal_text(&gen::literal(self.rng, ty));
        }
        let d = depth - 1;
        let any_ty = gen::value_type(self.rng);
        match ty {
            ValueType::Bool => match self.rng.gen_range(0..4) {
                0 => {
                    let op = ["AND", "OR"].choose(self.rng).unwrap();
                    format!("({} {op} {})", self.expr(ty, table, ctx, d), self.expr(ty, table, ctx, d))
                }
                1 => format!("(NOT {})", self.expr(ty, table, ctx, d)),
                _ => {
                    let op = ["<", "<=", ">", ">=", "==", "!="].choose(self.rng).unwrap();
                    let rhs_ty = match any_ty {
                        ValueType::Int if self.rng.gen() => ValueType::Decimal,
                        t => t,
                    };
                    let lhs = self.expr(any_ty, table, ctx, d);
                    let rhs = self.expr(rhs_ty, table, ctx, d);
                    format!("({lhs} {op} {rhs})")
                }
            },
            ValueType::Int => match self.rng.gen_range(0..5) {
                0 => {
                    let op = ["+", "-", "*", "/"].choose(self.rng).unwrap();
                    format!("({} {op} {})", self.expr(ty, table, ctx, d), self.expr(ty, table, ctx, d))
                }
                1 => format!("LENGTH({})", self.expr(ValueType::String, table, ctx, d)),
                2 => {
                    let f = ["YEAR", "MONTH", "DAY"].choose(self.rng).unwrap();
                    let t = if self.rng.gen() { ValueType::Date } else { ValueType::DateTime };
                    format!("{f}({})", self.expr(t, table, ctx, d))
                }
                3 => format!("ABS({})", self.expr(ty, table, ctx, d)),
                _ => format!("-{}", self.expr(ty, table, ctx, d)),
            },
            ValueType::Decimal => match self.rng.gen_range(0..4) {
                0 | 1 => {
                    let op = ["+", "-", "*", "/"].choose(self.rng).unwrap();
                    let other = if self.rng.gen() { ValueType::Int } else { ValueType::Decimal };
                    format!("({} {op} {})", self.expr(ty, table, ctx, d), self.expr(other, table, ctx, d))
                }
                2 => format!("ROUND({}, {})", self.expr(ty, table, ctx, d), self.rng.gen_range(0..4)),
                _ => format!("TO_DECIMAL({})", self.expr(ValueType::Int, table, ctx, d)),
            },
            ValueType::String => match self.rng.gen_range(0..5) {
                0 => {
                    let f = ["UPPER", "LOWER", "TRIM"].choose(self.rng).unwrap();
                    format!("{f}({})", self.expr(ty, table, ctx, d))
                }
                1 => format!("CONCAT({}, {})", self.expr(ty, table, ctx, d), self.expr(ty, table, ctx, d)),
                2 => format!(
                    "SUBSTRING({}, {}, {})",
                    self.expr(ty, table, ctx, d),
                    self.rng.gen_range(0..4),
                    self.rng.gen_range(0..4)
                ),
                3 => format!(
                    "REPLACE({}, {}, {})",
                    self.expr(ty, table, ctx, d),
                    self.expr(ty, table, ctx, d),
                    self.expr(ty, table, ctx, d)
                ),
                _ => format!("TO_STRING({})", self.expr(any_ty, table, ctx, d)),
            },
            ValueType::Date | ValueType::DateTime => {
                if !leaves.is_empty() {
                    leaves.choose(self.rng).unwrap().clone()
                } else {
                    literal_text(&gen::literal(self.rng, ty))
                }
            }
        }
    }
}
