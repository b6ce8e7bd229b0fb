//! Core of the Anka pipeline language: values and tables, the grammar
//! frontend, the static validator, the tree-walking interpreter and table
//! I/O.

pub mod builtins;
pub mod interp;
pub mod io;
pub mod syntax;
pub mod validate;
pub mod value;

pub use interp::{run_pipeline, RunError, RunOptions, RuntimeError, RuntimeErrorKind};
pub use io::{IoAdapter, RecordingIo, StdIo};
pub use syntax::{format_ast, parse, ParseError, Pipeline};
pub use validate::{validate, Environment, ValidationError, ValidationErrorKind};
pub use value::{Decimal, Schema, Table, Value, ValueType};
