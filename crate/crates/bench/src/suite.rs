//! Task-suite loading.
//!
//! ```json
//! {
//!   "name": "fixture",
//!   "tasks": [{
//!     "id": "filter_high_value",
//!     "category": "filter",
//!     "description": "Keep orders above 100.",
//!     "inputs": { "orders": "TABLE[order_id: INT, amount: DECIMAL]" },
//!     "output": "TABLE[order_id: INT, amount: DECIMAL]",
//!     "order_insensitive": false,
//!     "tests": [{
//!       "inputs": { "orders": [{ "order_id": 1, "amount": "250.00" }] },
//!       "expected": [{ "order_id": 1, "amount": "250.00" }]
//!     }]
//!   }]
//! }
//! ```
//!
//! Tables are arrays of objects read with the same rules as `READ ... FORMAT
//! JSON`. `order_insensitive` is optional and defaults to false.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use anka_core::io::table_from_json;
use anka_core::syntax::parse_table_type;
use anka_core::value::{Schema, Table};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Filter,
    Map,
    Aggregate,
    Strings,
    MultiStep,
    Finance,
    Hard,
    Adversarial,
}

impl Category {
    /// Report order.
    pub const ALL: [Category; 8] = [
        Category::Filter,
        Category::Map,
        Category::Aggregate,
        Category::Strings,
        Category::MultiStep,
        Category::Finance,
        Category::Hard,
        Category::Adversarial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Filter => "filter",
            Category::Map => "map",
            Category::Aggregate => "aggregate",
            Category::Strings => "strings",
            Category::MultiStep => "multi_step",
            Category::Finance => "finance",
            Category::Hard => "hard",
            Category::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub inputs: HashMap<String, Table>,
    pub expected: Table,
}

#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub id: String,
    pub category: Category,
    pub description: String,
    pub inputs: IndexMap<String, Schema>,
    pub output: Schema,
    pub order_insensitive: bool,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub name: String,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct SuiteError(pub String);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    name: String,
    tasks: Vec<RawTask>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    category: String,
    description: String,
    inputs: IndexMap<String, String>,
    output: String,
    #[serde(default)]
    order_insensitive: bool,
    tests: Vec<RawTest>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTest {
    inputs: IndexMap<String, serde_json::Value>,
    expected: serde_json::Value,
}

pub fn load_suite(path: &Path) -> Result<Suite, SuiteError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SuiteError(format!("cannot read {}: {e}", path.display())))?;
    parse_suite(&text)
}

pub fn parse_suite(text: &str) -> Result<Suite, SuiteError> {
    let raw: RawSuite = serde_json::from_str(text).map_err(|e| SuiteError(format!("malformed suite: {e}")))?;
    if raw.tasks.is_empty() {
        return Err(SuiteError("suite must contain at least one task".into()));
    }
    let mut seen = HashSet::new();
    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for t in raw.tasks {
        if !seen.insert(t.id.clone()) {
            return Err(SuiteError(format!("task {}: duplicate id", t.id)));
        }
        tasks.push(task(t)?);
    }
    Ok(Suite { name: raw.name, tasks })
}

fn schema(id: &str, what: &str, text: &str) -> Result<Schema, SuiteError> {
    let tt = parse_table_type(text).map_err(|e| SuiteError(format!("task {id}: {what}: {e}")))?;
    tt.to_schema().map_err(|e| SuiteError(format!("task {id}: {what}: {e}")))
}

fn table(value: &serde_json::Value, schema: &Schema) -> Result<Table, String> {
    let bytes = serde_json::to_vec(value).map_err(|e| e.to_string())?;
    table_from_json(&bytes, schema).map_err(|e| e.to_string())
}

fn task(raw: RawTask) -> Result<TaskSpec, SuiteError> {
    let id = raw.id;
    let valid_id = !id.is_empty()
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if !valid_id {
        return Err(SuiteError(format!("task {id:?}: id must be non-empty [A-Za-z0-9_-]")));
    }
    let category = Category::ALL
        .into_iter()
        .find(|c| c.name() == raw.category)
        .ok_or_else(|| SuiteError(format!("task {id}: unknown category {:?}", raw.category)))?;
    let mut inputs = IndexMap::new();
    for (name, text) in &raw.inputs {
        inputs.insert(name.clone(), schema(&id, &format!("input {name}"), text)?);
    }
    let output = schema(&id, "output", &raw.output)?;
    if raw.tests.is_empty() {
        return Err(SuiteError(format!("task {id}: needs at least one test")));
    }
    let mut tests = Vec::with_capacity(raw.tests.len());
    for (i, t) in raw.tests.iter().enumerate() {
        let at = |msg: String| SuiteError(format!("task {id}, test {i}: {msg}"));
        let mut tables = HashMap::new();
        for name in t.inputs.keys() {
            if !inputs.contains_key(name) {
                return Err(at(format!("undeclared input {name}")));
            }
        }
        for (name, schema) in &inputs {
            let value = t.inputs.get(name).ok_or_else(|| at(format!("missing input {name}")))?;
            let parsed = table(value, schema).map_err(|e| at(format!("input {name}: {e}")))?;
            tables.insert(name.clone(), parsed);
        }
        let expected = table(&t.expected, &output).map_err(|e| at(format!("expected: {e}")))?;
        tests.push(TestCase { inputs: tables, expected });
    }
    Ok(TaskSpec {
        id,
        category,
        description: raw.description,
        inputs,
        output,
        order_insensitive: raw.order_insensitive,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"{"name": "s", "tasks": [{
        "id": "t1", "category": "filter", "description": "d",
        "inputs": {"xs": "TABLE[a: INT]"}, "output": "TABLE[a: INT]",
        "tests": [{"inputs": {"xs": [{"a": 1}, {"a": 2}]}, "expected": [{"a": 2}]}]
    }]}"#;

    #[test]
    fn parses_a_minimal_suite() {
        let s = parse_suite(ONE).unwrap();
        assert_eq!(s.tasks[0].category, Category::Filter);
        assert_eq!(s.tasks[0].tests[0].inputs["xs"].len(), 2);
        assert!(!s.tasks[0].order_insensitive);
    }

    #[test]
    fn empty_task_list() {
        let err = parse_suite(r#"{"name": "s", "tasks": []}"#).unwrap_err();
        assert_eq!(err.to_string(), "suite must contain at least one task");
    }

    #[test]
    fn bad_input_names_task_and_test() {
        let bad = ONE.replace(r#"{"a": 2}]}, "expected""#, r#"{"a": "x"}]}, "expected""#);
        let err = parse_suite(&bad).unwrap_err().to_string();
        assert!(err.starts_with("task t1, test 0: input xs:"), "{err}");
    }

    #[test]
    fn rejects_unknown_category_and_duplicate_ids() {
        let err = parse_suite(&ONE.replace("\"filter\"", "\"poetry\"")).unwrap_err();
        assert!(err.to_string().contains("unknown category"), "{err}");
        let two = ONE.replacen("[{", "[{\"id\": \"t1\", \"category\": \"map\", \"description\": \"\", \"inputs\": {}, \"output\": \"TABLE[a: INT]\", \"tests\": [{\"inputs\": {}, \"expected\": []}]}, {", 1);
        let err = parse_suite(&two).unwrap_err();
        assert_eq!(err.to_string(), "task t1: duplicate id");
    }

    #[test]
    fn malformed_json_is_located() {
        let err = parse_suite("{\"name\": ").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }
}
