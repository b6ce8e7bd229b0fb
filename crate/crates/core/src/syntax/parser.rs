//! Recursive-descent parser.
//!
//! ```text
//! pipeline    -> PIPELINE ident ":" input* step+ OUTPUT ident EOF
//! input       -> INPUT ident ":" table_type
//! table_type  -> TABLE "[" ident ":" type ( "," ident ":" type )* "]"
//! step        -> STEP ident ":" statement+
//! statement   -> one production per leading keyword, see STATEMENT_FORMS
//!
//! expr        -> and ( OR and )*
//! and         -> not ( AND not )*
//! not         -> NOT not | comparison
//! comparison  -> additive ( ( "==" | "!=" | "<" | "<=" | ">" | ">=" ) additive )?
//! additive    -> term ( ( "+" | "-" ) term )*
//! term        -> unary ( ( "*" | "/" ) unary )*
//! unary       -> "-" unary | primary
//! primary     -> literal | ident "(" args? ")" | ident "." ident | ident | "(" expr ")"
//! literal     -> INT | DEC | STRING | TRUE | FALSE | DATE STRING | DATETIME STRING
//! ```

use chrono::{NaiveDate, NaiveDateTime};

use super::ast::*;
use super::error::ParseError;
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use crate::value::{Decimal, ValueType, DATETIME_FORMAT, DATE_FORMAT};

/// Nesting limit for expressions and control-flow blocks.
pub const MAX_NESTING: usize = 128;

/// The canonical form of every statement, keyed by its leading keyword.
/// The parser dispatches on exactly these keywords, one production each.
pub const STATEMENT_FORMS: &[(&str, &str)] = &[
    ("FILTER", "FILTER <src> WHERE <expr> INTO <target>"),
    ("SELECT", "SELECT <src> COLUMNS <col>, ... INTO <target>"),
    ("DISTINCT", "DISTINCT <src> INTO <target>"),
    ("MAP", "MAP <src> WITH <col> => <expr> INTO <target>"),
    ("RENAME", "RENAME <src> COLUMNS <old> AS <new>, ... INTO <target>"),
    ("DROP", "DROP <src> COLUMNS <col>, ... INTO <target>"),
    ("ADD_COLUMN", "ADD_COLUMN <src> COLUMN <col> VALUE <literal> INTO <target>"),
    (
        "AGGREGATE",
        "AGGREGATE <src> [GROUP_BY <col>, ...] COMPUTE <FN>([<col>]) AS <alias>, ... INTO <target>",
    ),
    ("SORT", "SORT <src> BY <col> ASC|DESC INTO <target>"),
    ("LIMIT", "LIMIT <src> <expr> INTO <target>"),
    ("SKIP", "SKIP <src> <expr> INTO <target>"),
    ("SLICE", "SLICE <src> FROM <expr> TO <expr> INTO <target>"),
    ("JOIN", "JOIN <left> WITH <right> ON <left_col> == <right_col> INTO <target>"),
    ("LEFT_JOIN", "LEFT_JOIN <left> WITH <right> ON <left_col> == <right_col> INTO <target>"),
    ("UNION", "UNION <left> WITH <right> INTO <target>"),
    ("READ", "READ \"<path>\" FORMAT JSON|CSV SCHEMA TABLE[...] INTO <target>"),
    ("WRITE", "WRITE <src> TO \"<path>\" FORMAT JSON|CSV"),
    ("FETCH", "FETCH \"<url>\" SCHEMA TABLE[...] INTO <target>"),
    ("POST", "POST <src> TO \"<url>\""),
    ("IF", "IF <expr> THEN <statements> [ELSE <statements>] END_IF"),
    ("FOR_EACH", "FOR_EACH <row> IN <src> DO <statements> END_FOR"),
    ("WHILE", "WHILE <expr> DO <statements> END_WHILE"),
    ("TRY", "TRY <statements> ON_ERROR <statements> END_TRY"),
];

/// Parses a complete pipeline.
pub fn parse(source: &str) -> Result<Pipeline, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(source, tokens);
    let pipeline = p.pipeline()?;
    Ok(pipeline)
}

/// Parses a standalone `TABLE[...]` type, as used in suite files.
pub fn parse_table_type(source: &str) -> Result<TableType, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(source, tokens);
    let t = p.table_type()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a standalone expression.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(source, tokens);
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: SourceLocation,
    depth: usize,
}

fn statement_keywords() -> Vec<String> {
    STATEMENT_FORMS.iter().map(|(k, _)| k.to_string()).collect()
}

impl Parser {
    fn new(source: &str, tokens: Vec<Token>) -> Self {
        let mut line = 1;
        let mut column = 1;
        for c in source.chars() {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        Parser { tokens, pos: 0, eof: SourceLocation::new(line, column, source.len()), depth: 0 }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_kind_at(&self, n: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + n).map(|t| &t.kind)
    }

    fn loc(&self) -> SourceLocation {
        self.peek().map_or(self.eof, |t| t.loc)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        self.peek_kind() == Some(&TokenKind::Keyword(kw))
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("'{}'", t.kind),
            None => "end of input".to_string(),
        };
        let message = match expected.as_slice() {
            [one] => format!("expected {one}, found {found}"),
            _ => format!("unexpected {found}"),
        };
        ParseError { message, location: self.loc(), expected }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.error(vec![kind.describe()]))
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<SourceLocation, ParseError> {
        self.expect(TokenKind::Keyword(kw)).map(|t| t.loc)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error(vec!["end of input".into()])),
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Ident(name), loc }) => {
                let id = Ident::new(name.clone(), *loc);
                self.pos += 1;
                Ok(id)
            }
            Some(Token { kind: TokenKind::Keyword(k), .. }) => {
                let mut err = self.error(vec!["identifier".into()]);
                err.message = format!("expected identifier, found keyword {k} (keywords are reserved)");
                Err(err)
            }
            _ => Err(self.error(vec!["identifier".into()])),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(&TokenKind::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn string_lit(&mut self) -> Result<StringLit, ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::StringLit(s), loc }) => {
                let lit = StringLit { value: s.clone(), loc: *loc };
                self.pos += 1;
                Ok(lit)
            }
            _ => Err(self.error(vec!["string literal".into()])),
        }
    }

    fn expect_into(&mut self) -> Result<Ident, ParseError> {
        self.expect_keyword(Keyword::Into)?;
        self.ident()
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::new(
                format!("nesting deeper than {MAX_NESTING} levels"),
                self.loc(),
            ));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn pipeline(&mut self) -> Result<Pipeline, ParseError> {
        let loc = self.expect_keyword(Keyword::Pipeline)?;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let mut inputs = Vec::new();
        while self.at_keyword(Keyword::Input) {
            let loc = self.loc();
            self.pos += 1;
            let name = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let schema = self.table_type()?;
            inputs.push(InputDecl { name, schema, loc });
        }
        let mut steps = Vec::new();
        loop {
            if self.at_keyword(Keyword::Step) {
                steps.push(self.step()?);
            } else if !steps.is_empty() && self.at_keyword(Keyword::Output) {
                break;
            } else {
                let mut expected = vec!["STEP".to_string()];
                if steps.is_empty() {
                    if inputs.is_empty() {
                        expected.insert(0, "INPUT".into());
                    }
                } else {
                    expected.push("OUTPUT".into());
                }
                return Err(self.error(expected));
            }
        }
        self.expect_keyword(Keyword::Output)?;
        let output = self.ident()?;
        self.expect_eof()?;
        Ok(Pipeline { name, inputs, steps, output, loc })
    }

    fn table_type(&mut self) -> Result<TableType, ParseError> {
        let loc = self.expect_keyword(Keyword::Table)?;
        self.expect(TokenKind::LBracket)?;
        let mut fields = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.value_type()?;
            fields.push(FieldDecl { name, ty });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RBracket)?;
        Ok(TableType { fields, loc })
    }

    fn value_type(&mut self) -> Result<ValueType, ParseError> {
        if let Some(TokenKind::Keyword(k)) = self.peek_kind() {
            if let Some(t) = ValueType::from_keyword(k.as_str()) {
                self.pos += 1;
                return Ok(t);
            }
        }
        Err(self.error(ValueType::ALL.iter().map(|t| t.keyword().to_string()).collect()))
    }

    fn step(&mut self) -> Result<Step, ParseError> {
        let loc = self.expect_keyword(Keyword::Step)?;
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let body = self.block(&[Keyword::Step, Keyword::Output])?;
        Ok(Step { name, body, loc })
    }

    /// One or more statements, stopping (without consuming) at any of `end`.
    fn block(&mut self, end: &[Keyword]) -> Result<Vec<Statement>, ParseError> {
        let mut body = vec![self.statement()?];
        loop {
            match self.peek_kind() {
                Some(TokenKind::Keyword(k)) if end.contains(k) => break,
                None => {
                    let mut expected = statement_keywords();
                    expected.extend(end.iter().map(|k| k.as_str().to_string()));
                    return Err(self.error(expected));
                }
                _ => body.push(self.statement()?),
            }
        }
        Ok(body)
    }

    // Control flow recurses through `block`, so it stays out of the large
    // data-statement frame.
    fn statement(&mut self) -> Result<Statement, ParseError> {
        let loc = self.loc();
        let kind = match self.peek_kind() {
            Some(TokenKind::Keyword(Keyword::If)) => self.if_statement()?,
            Some(TokenKind::Keyword(Keyword::ForEach)) => self.for_each_statement()?,
            Some(TokenKind::Keyword(Keyword::While)) => self.while_statement()?,
            Some(TokenKind::Keyword(Keyword::Try)) => self.try_statement()?,
            Some(TokenKind::Keyword(k)) => {
                let k = *k;
                self.data_statement(k)?
            }
            _ => return Err(self.error(statement_keywords())),
        };
        Ok(Statement { kind, loc })
    }

    #[inline(never)]
    fn data_statement(&mut self, kw: Keyword) -> Result<StatementKind, ParseError> {
        use StatementKind as S;
        let kind = match kw {
            Keyword::Filter => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::Where)?;
                let predicate = self.expr()?;
                S::Filter { source, predicate, target: self.expect_into()? }
            }
            Keyword::Select => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::Columns)?;
                let columns = self.ident_list()?;
                S::Select { source, columns, target: self.expect_into()? }
            }
            Keyword::Distinct => {
                self.pos += 1;
                let source = self.ident()?;
                S::Distinct { source, target: self.expect_into()? }
            }
            Keyword::Map => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::With)?;
                let column = self.ident()?;
                self.expect(TokenKind::Arrow)?;
                let expr = self.expr()?;
                S::Map { source, column, expr, target: self.expect_into()? }
            }
            Keyword::Rename => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::Columns)?;
                let mut renames = Vec::new();
                loop {
                    let from = self.ident()?;
                    self.expect_keyword(Keyword::As)?;
                    let to = self.ident()?;
                    renames.push(RenamePair { from, to });
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                S::Rename { source, renames, target: self.expect_into()? }
            }
            Keyword::Drop => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::Columns)?;
                let columns = self.ident_list()?;
                S::Drop { source, columns, target: self.expect_into()? }
            }
            Keyword::AddColumn => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::Column)?;
                let column = self.ident()?;
                self.expect_keyword(Keyword::Value)?;
                let value = self.literal()?;
                S::AddColumn { source, column, value, target: self.expect_into()? }
            }
            Keyword::Aggregate => {
                self.pos += 1;
                let source = self.ident()?;
                let group_by = if self.at_keyword(Keyword::GroupBy) {
                    self.pos += 1;
                    self.ident_list()?
                } else {
                    Vec::new()
                };
                if !self.at_keyword(Keyword::Compute) {
                    let expected = if group_by.is_empty() {
                        vec!["GROUP_BY".into(), "COMPUTE".into()]
                    } else {
                        vec!["COMPUTE".into()]
                    };
                    return Err(self.error(expected));
                }
                self.pos += 1;
                let mut computes = vec![self.aggregate_spec()?];
                while self.eat(&TokenKind::Comma) {
                    computes.push(self.aggregate_spec()?);
                }
                S::Aggregate { source, group_by, computes, target: self.expect_into()? }
            }
            Keyword::Sort => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::By)?;
                let key = self.ident()?;
                let order = if self.eat(&TokenKind::Keyword(Keyword::Asc)) {
                    SortOrder::Asc
                } else if self.eat(&TokenKind::Keyword(Keyword::Desc)) {
                    SortOrder::Desc
                } else {
                    return Err(self.error(vec!["ASC".into(), "DESC".into()]));
                };
                S::Sort { source, key, order, target: self.expect_into()? }
            }
            Keyword::Limit | Keyword::Skip => {
                self.pos += 1;
                let source = self.ident()?;
                let count = self.expr()?;
                let target = self.expect_into()?;
                if kw == Keyword::Limit {
                    S::Limit { source, count, target }
                } else {
                    S::Skip { source, count, target }
                }
            }
            Keyword::Slice => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::From)?;
                let start = self.expr()?;
                self.expect_keyword(Keyword::To)?;
                let end = self.expr()?;
                S::Slice { source, start, end, target: self.expect_into()? }
            }
            Keyword::Join | Keyword::LeftJoin => {
                self.pos += 1;
                let left = self.ident()?;
                self.expect_keyword(Keyword::With)?;
                let right = self.ident()?;
                self.expect_keyword(Keyword::On)?;
                let left_key = self.ident()?;
                self.expect(TokenKind::EqEq)?;
                let right_key = self.ident()?;
                let target = self.expect_into()?;
                if kw == Keyword::Join {
                    S::Join { left, right, left_key, right_key, target }
                } else {
                    S::LeftJoin { left, right, left_key, right_key, target }
                }
            }
            Keyword::Union => {
                self.pos += 1;
                let left = self.ident()?;
                self.expect_keyword(Keyword::With)?;
                let right = self.ident()?;
                S::Union { left, right, target: self.expect_into()? }
            }
            Keyword::Read => {
                self.pos += 1;
                let path = self.string_lit()?;
                self.expect_keyword(Keyword::Format)?;
                let format = self.file_format()?;
                self.expect_keyword(Keyword::Schema)?;
                let schema = self.table_type()?;
                S::Read { path, format, schema, target: self.expect_into()? }
            }
            Keyword::Write => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::To)?;
                let path = self.string_lit()?;
                self.expect_keyword(Keyword::Format)?;
                let format = self.file_format()?;
                S::Write { source, path, format }
            }
            Keyword::Fetch => {
                self.pos += 1;
                let url = self.string_lit()?;
                self.expect_keyword(Keyword::Schema)?;
                let schema = self.table_type()?;
                S::Fetch { url, schema, target: self.expect_into()? }
            }
            Keyword::Post => {
                self.pos += 1;
                let source = self.ident()?;
                self.expect_keyword(Keyword::To)?;
                let url = self.string_lit()?;
                S::Post { source, url }
            }
            _ => return Err(self.error(statement_keywords())),
        };
        Ok(kind)
    }

    fn if_statement(&mut self) -> Result<StatementKind, ParseError> {
        self.pos += 1;
        self.enter()?;
        let condition = self.expr()?;
        self.expect_keyword(Keyword::Then)?;
        let then_branch = self.block(&[Keyword::Else, Keyword::EndIf])?;
        let else_branch = if self.eat(&TokenKind::Keyword(Keyword::Else)) {
            Some(self.block(&[Keyword::EndIf])?)
        } else {
            None
        };
        self.expect_keyword(Keyword::EndIf)?;
        self.leave();
        Ok(StatementKind::If { condition, then_branch, else_branch })
    }

    fn for_each_statement(&mut self) -> Result<StatementKind, ParseError> {
        self.pos += 1;
        self.enter()?;
        let var = self.ident()?;
        self.expect_keyword(Keyword::In)?;
        let source = self.ident()?;
        self.expect_keyword(Keyword::Do)?;
        let body = self.block(&[Keyword::EndFor])?;
        self.expect_keyword(Keyword::EndFor)?;
        self.leave();
        Ok(StatementKind::ForEach { var, source, body })
    }

    fn while_statement(&mut self) -> Result<StatementKind, ParseError> {
        self.pos += 1;
        self.enter()?;
        let condition = self.expr()?;
        self.expect_keyword(Keyword::Do)?;
        let body = self.block(&[Keyword::EndWhile])?;
        self.expect_keyword(Keyword::EndWhile)?;
        self.leave();
        Ok(StatementKind::While { condition, body })
    }

    fn try_statement(&mut self) -> Result<StatementKind, ParseError> {
        self.pos += 1;
        self.enter()?;
        let body = self.block(&[Keyword::OnError])?;
        self.expect_keyword(Keyword::OnError)?;
        let on_error = self.block(&[Keyword::EndTry])?;
        self.expect_keyword(Keyword::EndTry)?;
        self.leave();
        Ok(StatementKind::Try { body, on_error })
    }
    fn file_format(&mut self) -> Result<FileFormat, ParseError> {
        if self.eat(&TokenKind::Keyword(Keyword::Json)) {
            Ok(FileFormat::Json)
        } else if self.eat(&TokenKind::Keyword(Keyword::Csv)) {
            Ok(FileFormat::Csv)
        } else {
            Err(self.error(vec!["JSON".into(), "CSV".into()]))
        }
    }

    fn aggregate_spec(&mut self) -> Result<AggregateSpec, ParseError> {
        let loc = self.loc();
        let func = match self.peek_kind() {
            Some(TokenKind::Ident(name)) => AggregateFn::from_name(name),
            _ => None,
        };
        let Some(func) = func else {
            return Err(self.error(AggregateFn::ALL.iter().map(|f| f.name().to_string()).collect()));
        };
        self.pos += 1;
        self.expect(TokenKind::LParen)?;
        let arg = if self.peek_kind() == Some(&TokenKind::RParen) {
            None
        } else {
            Some(self.ident()?)
        };
        self.expect(TokenKind::RParen)?;
        self.expect_keyword(Keyword::As)?;
        let alias = self.ident()?;
        Ok(AggregateSpec { func, arg, alias, loc })
    }

    /// Literal with an optional leading minus on numbers.
    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negative = self.peek_kind() == Some(&TokenKind::Minus)
            && matches!(
                self.peek_kind_at(1),
                Some(TokenKind::IntLit(_)) | Some(TokenKind::DecimalLit(_))
            );
        if negative {
            self.pos += 1;
        }
        match self.try_literal(negative)? {
            Some(lit) => Ok(lit),
            None => Err(self.error(vec![
                "integer literal".into(),
                "decimal literal".into(),
                "string literal".into(),
                "TRUE".into(),
                "FALSE".into(),
                "DATE".into(),
                "DATETIME".into(),
            ])),
        }
    }

    fn try_literal(&mut self, negative: bool) -> Result<Option<Literal>, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Ok(None);
        };
        let lit = match tok.kind {
            TokenKind::IntLit(digits) => {
                let text = if negative { format!("-{digits}") } else { digits };
                let v = text.parse::<i64>().map_err(|_| {
                    ParseError::new(format!("integer literal {text} out of range"), tok.loc)
                })?;
                Literal::Int(v)
            }
            TokenKind::DecimalLit(digits) => {
                let text = if negative { format!("-{digits}") } else { digits };
                let d = text.parse::<Decimal>().map_err(|e| {
                    ParseError::new(format!("invalid decimal literal {text}: {e}"), tok.loc)
                })?;
                Literal::Decimal(d)
            }
            TokenKind::StringLit(s) => Literal::String(s),
            TokenKind::Keyword(Keyword::True) => Literal::Bool(true),
            TokenKind::Keyword(Keyword::False) => Literal::Bool(false),
            TokenKind::Keyword(kw @ (Keyword::Date | Keyword::DateTime)) => {
                self.pos += 1;
                let s = self.string_lit()?;
                let parsed = if kw == Keyword::Date {
                    NaiveDate::parse_from_str(&s.value, DATE_FORMAT).ok().map(Literal::Date)
                } else {
                    NaiveDateTime::parse_from_str(&s.value, DATETIME_FORMAT)
                        .ok()
                        .map(Literal::DateTime)
                };
                return match parsed {
                    Some(l) => Ok(Some(l)),
                    None => Err(ParseError::new(
                        format!(
                            "invalid {kw} literal {:?} (expected {})",
                            s.value,
                            if kw == Keyword::Date { "YYYY-MM-DD" } else { "YYYY-MM-DDTHH:MM:SS" }
                        ),
                        s.loc,
                    )),
                };
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(lit))
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let r = self.or_expr();
        self.leave();
        r
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.at_keyword(Keyword::Or) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = binary(BinaryOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.at_keyword(Keyword::And) {
            self.pos += 1;
            let rhs = self.not_expr()?;
            lhs = binary(BinaryOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_keyword(Keyword::Not) {
            let loc = self.loc();
            self.pos += 1;
            self.enter()?;
            let operand = self.not_expr();
            self.leave();
            return Ok(Expr::new(
                ExprKind::Unary { op: UnaryOp::Not, operand: Box::new(operand?) },
                loc,
            ));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek_kind() {
            Some(TokenKind::EqEq) => BinaryOp::Eq,
            Some(TokenKind::NotEq) => BinaryOp::Ne,
            Some(TokenKind::Lt) => BinaryOp::Lt,
            Some(TokenKind::Le) => BinaryOp::Le,
            Some(TokenKind::Gt) => BinaryOp::Gt,
            Some(TokenKind::Ge) => BinaryOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinaryOp::Add,
                Some(TokenKind::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinaryOp::Mul,
                Some(TokenKind::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_kind() == Some(&TokenKind::Minus) {
            let loc = self.loc();
            // A minus directly before a number is part of the literal.
            if matches!(
                self.peek_kind_at(1),
                Some(TokenKind::IntLit(_)) | Some(TokenKind::DecimalLit(_))
            ) {
                self.pos += 1;
                let literal = self.try_literal(true)?.expect("numeric token");
                return Ok(Expr::new(ExprKind::Literal { literal }, loc));
            }
            self.pos += 1;
            self.enter()?;
            let operand = self.unary();
            self.leave();
            return Ok(Expr::new(
                ExprKind::Unary { op: UnaryOp::Neg, operand: Box::new(operand?) },
                loc,
            ));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let loc = self.loc();
        if let Some(literal) = self.try_literal(false)? {
            return Ok(Expr::new(ExprKind::Literal { literal }, loc));
        }
        match self.peek_kind() {
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::Ident(_)) => {
                let name = self.ident()?;
                match self.peek_kind() {
                    Some(TokenKind::LParen) => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        if !self.eat(&TokenKind::RParen) {
                            loop {
                                args.push(self.expr()?);
                                if self.eat(&TokenKind::Comma) {
                                    continue;
                                }
                                self.expect(TokenKind::RParen)?;
                                break;
                            }
                        }
                        Ok(Expr::new(ExprKind::Call { func: name, args }, loc))
                    }
                    Some(TokenKind::Dot) => {
                        self.pos += 1;
                        let field = self.ident()?;
                        Ok(Expr::new(ExprKind::Field { var: name, field }, loc))
                    }
                    _ => Ok(Expr::new(ExprKind::Column { name }, loc)),
                }
            }
            _ => Err(self.error(vec![
                "identifier".into(),
                "literal".into(),
                "'('".into(),
                "'-'".into(),
                "NOT".into(),
            ])),
        }
    }
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    let loc = lhs.loc;
    Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, loc)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const REFERENCE_PIPELINE: &str = "\
PIPELINE transform_sales:
    INPUT orders: TABLE[order_id: INT, customer: STRING,
        amount: DECIMAL, date: DATE]

    STEP filter_large:
        FILTER orders WHERE amount > 1000 INTO large_orders

    STEP add_tax:
        MAP large_orders WITH tax => amount * 0.08 INTO with_tax

    STEP summarize:
        AGGREGATE with_tax
        GROUP_BY customer
        COMPUTE SUM(amount) AS total, COUNT() AS num_orders
        INTO summary

    OUTPUT summary
";

    #[test]
    fn reference_pipeline_shape() {
        let p = parse(REFERENCE_PIPELINE).unwrap();
        assert_eq!(p.name.name, "transform_sales");
        assert_eq!(p.inputs.len(), 1);
        assert_eq!(p.inputs[0].schema.fields.len(), 4);
        let steps: Vec<_> = p.steps.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(steps, ["filter_large", "add_tax", "summarize"]);
        assert_eq!(p.output.name, "summary");
        let StatementKind::Aggregate { group_by, computes, .. } = &p.steps[2].body[0].kind else {
            panic!("expected AGGREGATE");
        };
        assert_eq!(group_by[0].name, "customer");
        assert_eq!(computes[1].func, AggregateFn::Count);
        assert!(computes[1].arg.is_none());
    }

    #[test]
    fn minimal_pipeline() {
        let p = parse("PIPELINE p:\n INPUT t: TABLE[a: INT]\n STEP s:\n  FILTER t WHERE a > 0 INTO r\n OUTPUT r")
            .unwrap();
        assert_eq!(p.steps[0].body.len(), 1);
        assert_eq!(p.steps[0].body[0].loc, SourceLocation::new(4, 3, 47));
    }

    #[test]
    fn missing_into_is_rejected() {
        let err = parse("PIPELINE p:\n STEP s:\n  FILTER t WHERE a > 0\n OUTPUT r").unwrap_err();
        assert_eq!(err.expected, vec!["INTO".to_string()]);
        assert_eq!((err.location.line, err.location.column), (4, 2));
    }

    #[test]
    fn pipeline_needs_a_step() {
        let err = parse("PIPELINE p:\n INPUT t: TABLE[a: INT]\n OUTPUT t").unwrap_err();
        assert_eq!(err.expected, vec!["STEP".to_string()]);
    }

    #[test]
    fn trailing_tokens_rejected() {
        let err =
            parse("PIPELINE p: STEP s: DISTINCT a INTO b OUTPUT b extra").unwrap_err();
        assert!(err.message.contains("extra"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a + b * c > 1 AND NOT d OR e").unwrap();
        let ExprKind::Binary { op: BinaryOp::Or, lhs, .. } = e.kind else { panic!() };
        let ExprKind::Binary { op: BinaryOp::And, lhs: cmp, rhs: not, .. } = lhs.kind else {
            panic!()
        };
        assert!(matches!(not.kind, ExprKind::Unary { op: UnaryOp::Not, .. }));
        let ExprKind::Binary { op: BinaryOp::Gt, lhs: sum, .. } = cmp.kind else { panic!() };
        let ExprKind::Binary { op: BinaryOp::Add, rhs: prod, .. } = sum.kind else { panic!() };
        assert!(matches!(prod.kind, ExprKind::Binary { op: BinaryOp::Mul, .. }));
    }

    #[test]
    fn negative_literals_fold() {
        let e = parse_expr("-9223372036854775808").unwrap();
        assert_eq!(e.kind, ExprKind::Literal { literal: Literal::Int(i64::MIN) });
        let e = parse_expr("-(5)").unwrap();
        assert!(matches!(e.kind, ExprKind::Unary { op: UnaryOp::Neg, .. }));
        assert!(parse_expr("9223372036854775808").is_err());
    }

    #[test]
    fn comparisons_do_not_chain() {
        assert!(parse_expr("a < b < c").is_err());
        assert!(parse_expr("(a < b) == TRUE").is_ok());
    }

    #[test]
    fn date_literals() {
        let e = parse_expr("DATE \"2024-02-29\"").unwrap();
        assert!(matches!(e.kind, ExprKind::Literal { literal: Literal::Date(_) }));
        let err = parse_expr("DATE \"2023-02-29\"").unwrap_err();
        assert_eq!(err.location.column, 6);
        assert!(parse_expr("DATETIME \"2024-01-01T10:00:00\"").is_ok());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("{}1{}", "(".repeat(10_000), ")".repeat(10_000));
        let err = parse_expr(&src).unwrap_err();
        assert!(err.message.contains("nesting"));
        let src = format!("{}1", "NOT ".repeat(10_000));
        assert!(parse_expr(&src).is_err());
        let src = format!("{}1", "-".repeat(10_000));
        assert!(parse_expr(&src).is_err());
    }

    #[test]
    fn control_flow_forms() {
        let src = "PIPELINE p:
  INPUT t: TABLE[a: INT]
  STEP s:
    IF TRUE THEN DISTINCT t INTO x ELSE DISTINCT t INTO x END_IF
    FOR_EACH r IN t DO
      FILTER t WHERE a > r.a INTO bigger
    END_FOR
    WHILE FALSE DO DISTINCT t INTO w END_WHILE
    TRY MAP t WITH b => 1 / 0 INTO y ON_ERROR ADD_COLUMN t COLUMN b VALUE 0 INTO y END_TRY
  OUTPUT y";
        let p = parse(src).unwrap();
        let kws: Vec<_> = p.steps[0].body.iter().map(|s| s.kind.keyword()).collect();
        assert_eq!(kws, ["IF", "FOR_EACH", "WHILE", "TRY"]);
    }

    #[test]
    fn unknown_aggregate_function() {
        let err = parse("PIPELINE p: STEP s: AGGREGATE t COMPUTE MEDIAN(a) AS m INTO r OUTPUT r")
            .unwrap_err();
        assert!(err.expected.contains(&"SUM".to_string()));
    }

    #[test]
    fn statement_forms_have_unique_keywords() {
        let mut seen = std::collections::HashSet::new();
        for (kw, form) in STATEMENT_FORMS {
            assert!(seen.insert(*kw), "duplicate production for {kw}");
            assert!(form.starts_with(kw));
            assert!(Keyword::lookup(kw).is_some());
        }
        assert_eq!(STATEMENT_FORMS.len(), 23);
    }
}
