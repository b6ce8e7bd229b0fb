//! Grammar frontend: tokenizer, parser, AST and canonical formatter.

pub mod ast;
mod error;
mod format;
mod lexer;
mod parser;

pub use ast::*;
pub use error::ParseError;
pub use format::{format_ast, format_expr, format_literal, format_table_type, quote};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse, parse_expr, parse_table_type, MAX_NESTING, STATEMENT_FORMS};
