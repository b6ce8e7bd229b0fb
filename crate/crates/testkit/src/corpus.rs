//! The hand-written pipeline corpus under `corpus/`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anka_core::syntax::{Pipeline, Statement, StatementKind, STATEMENT_FORMS};

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// `(file stem, source)` pairs sorted by name.
pub fn load() -> Vec<(String, String)> {
    let mut entries: Vec<(String, String)> = std::fs::read_dir(dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "anka"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    entries.sort();
    entries
}

fn visit<'a>(body: &'a [Statement], out: &mut Vec<&'a StatementKind>) {
    for s in body {
        out.push(&s.kind);
        match &s.kind {
            StatementKind::If { then_branch, else_branch, .. } => {
                visit(then_branch, out);
                if let Some(e) = else_branch {
                    visit(e, out);
                }
            }
            StatementKind::ForEach { body, .. } | StatementKind::While { body, .. } => visit(body, out),
            StatementKind::Try { body, on_error } => {
                visit(body, out);
                visit(on_error, out);
            }
            _ => {}
        }
    }
}

/// Keywords used anywhere in `pipeline`, nested blocks included.
pub fn keywords(pipeline: &Pipeline) -> Vec<&'static str> {
    let mut all = Vec::new();
    for step in &pipeline.steps {
        visit(&step.body, &mut all);
    }
    all.into_iter().map(StatementKind::keyword).collect()
}

/// How many pipelines use each statement keyword; every keyword is listed.
pub fn coverage<'p>(pipelines: impl IntoIterator<Item = &'p Pipeline>) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> = STATEMENT_FORMS.iter().map(|(k, _)| (*k, 0)).collect();
    for p in pipelines {
        let mut kws = keywords(p);
        kws.sort_unstable();
        kws.dedup();
        for k in kws {
            *counts.entry(k).or_default() += 1;
        }
    }
    counts
}
