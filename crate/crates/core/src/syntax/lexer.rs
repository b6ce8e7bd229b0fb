//! Tokenizer. Keywords are case-sensitive upper-case words; `#` starts a
//! comment running to end of line; whitespace (including newlines and
//! indentation) only separates tokens.

use std::fmt;

use super::ast::SourceLocation;
use super::error::ParseError;

macro_rules! keywords {
    ($($variant:ident => $text:literal,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Keyword {
            $($variant,)*
        }

        impl Keyword {
            pub const ALL: &'static [Keyword] = &[$(Keyword::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Keyword::$variant => $text,)*
                }
            }

            pub fn lookup(word: &str) -> Option<Keyword> {
                match word {
                    $($text => Some(Keyword::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

keywords! {
    Pipeline => "PIPELINE",
    Input => "INPUT",
    Table => "TABLE",
    Step => "STEP",
    Output => "OUTPUT",
    Into => "INTO",
    Filter => "FILTER",
    Where => "WHERE",
    Select => "SELECT",
    Columns => "COLUMNS",
    Distinct => "DISTINCT",
    Map => "MAP",
    With => "WITH",
    Rename => "RENAME",
    As => "AS",
    Drop => "DROP",
    AddColumn => "ADD_COLUMN",
    Column => "COLUMN",
    Value => "VALUE",
    Aggregate => "AGGREGATE",
    GroupBy => "GROUP_BY",
    Compute => "COMPUTE",
    Sort => "SORT",
    By => "BY",
    Asc => "ASC",
    Desc => "DESC",
    Limit => "LIMIT",
    Skip => "SKIP",
    Slice => "SLICE",
    From => "FROM",
    To => "TO",
    Join => "JOIN",
    LeftJoin => "LEFT_JOIN",
    On => "ON",
    Union => "UNION",
    Read => "READ",
    Write => "WRITE",
    Fetch => "FETCH",
    Post => "POST",
    Format => "FORMAT",
    Schema => "SCHEMA",
    Json => "JSON",
    Csv => "CSV",
    If => "IF",
    Then => "THEN",
    Else => "ELSE",
    EndIf => "END_IF",
    ForEach => "FOR_EACH",
    In => "IN",
    Do => "DO",
    EndFor => "END_FOR",
    While => "WHILE",
    EndWhile => "END_WHILE",
    Try => "TRY",
    OnError => "ON_ERROR",
    EndTry => "END_TRY",
    And => "AND",
    Or => "OR",
    Not => "NOT",
    True => "TRUE",
    False => "FALSE",
    Int => "INT",
    String => "STRING",
    Decimal => "DECIMAL",
    Bool => "BOOL",
    Date => "DATE",
    DateTime => "DATETIME",
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    /// Digits only; range-checked by the parser so that a leading minus can
    /// reach `i64::MIN`.
    IntLit(String),
    DecimalLit(String),
    StringLit(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl TokenKind {
    /// Short description for "expected ..." messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Keyword(k) => k.as_str().to_string(),
            TokenKind::Ident(_) => "identifier".into(),
            TokenKind::IntLit(_) => "integer literal".into(),
            TokenKind::DecimalLit(_) => "decimal literal".into(),
            TokenKind::StringLit(_) => "string literal".into(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Dot => ".",
            TokenKind::Arrow => "=>",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            _ => "",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => f.write_str(k.as_str()),
            TokenKind::Ident(s) | TokenKind::IntLit(s) | TokenKind::DecimalLit(s) => {
                f.write_str(s)
            }
            TokenKind::StringLit(s) => write!(f, "{s:?}"),
            other => f.write_str(other.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: SourceLocation,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn loc(&self) -> SourceLocation {
        SourceLocation::new(self.line, self.column, self.offset)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src: source, offset: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let loc = cur.loc();
        let kind = if is_ident_start(c) {
            let start = cur.offset;
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            let word = &source[start..cur.offset];
            match Keyword::lookup(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            let start = cur.offset;
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
                TokenKind::DecimalLit(source[start..cur.offset].to_string())
            } else {
                TokenKind::IntLit(source[start..cur.offset].to_string())
            }
        } else if c == '"' {
            cur.bump();
            let mut value = String::new();
            loop {
                match cur.bump() {
                    None => {
                        return Err(ParseError::new("unterminated string literal", loc));
                    }
                    Some('"') => break,
                    Some('\\') => {
                        let esc_loc = cur.loc();
                        match cur.bump() {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some(other) => {
                                return Err(ParseError::new(
                                    format!("invalid escape sequence \\{other}"),
                                    esc_loc,
                                ));
                            }
                            None => {
                                return Err(ParseError::new("unterminated string literal", loc));
                            }
                        }
                    }
                    Some(ch) => value.push(ch),
                }
            }
            TokenKind::StringLit(value)
        } else {
            cur.bump();
            let next = cur.peek();
            let (kind, two) = match (c, next) {
                ('=', Some('>')) => (TokenKind::Arrow, true),
                ('=', Some('=')) => (TokenKind::EqEq, true),
                ('!', Some('=')) => (TokenKind::NotEq, true),
                ('<', Some('=')) => (TokenKind::Le, true),
                ('>', Some('=')) => (TokenKind::Ge, true),
                ('<', _) => (TokenKind::Lt, false),
                ('>', _) => (TokenKind::Gt, false),
                ('(', _) => (TokenKind::LParen, false),
                (')', _) => (TokenKind::RParen, false),
                ('[', _) => (TokenKind::LBracket, false),
                (']', _) => (TokenKind::RBracket, false),
                (',', _) => (TokenKind::Comma, false),
                (':', _) => (TokenKind::Colon, false),
                ('.', _) => (TokenKind::Dot, false),
                ('+', _) => (TokenKind::Plus, false),
                ('-', _) => (TokenKind::Minus, false),
                ('*', _) => (TokenKind::Star, false),
                ('/', _) => (TokenKind::Slash, false),
                _ => {
                    let mut err = ParseError::new(format!("illegal character {c:?}"), loc);
                    if c == '=' {
                        err.message.push_str(" (use '==' for equality)");
                    }
                    return Err(err);
                }
            };
            if two {
                cur.bump();
            }
            kind
        };
        tokens.push(Token { kind, loc });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn filter_statement_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("FILTER orders WHERE amount > 1000 INTO big"),
            vec![
                Keyword(super::Keyword::Filter),
                Ident("orders".into()),
                Keyword(super::Keyword::Where),
                Ident("amount".into()),
                Gt,
                IntLit("1000".into()),
                Keyword(super::Keyword::Into),
                Ident("big".into()),
            ]
        );
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("   # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn illegal_character_location() {
        let err = tokenize("FILTER @").unwrap_err();
        assert_eq!((err.location.line, err.location.column), (1, 8));
        assert_eq!(err.location.offset, 7);
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("x \"abc").unwrap_err();
        assert!(err.message.contains("unterminated"));
        assert_eq!(err.location.column, 3);
    }

    #[test]
    fn keywords_are_case_sensitive() {
        assert_eq!(kinds("filter"), vec![TokenKind::Ident("filter".into())]);
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            kinds(r#""a\"b\\c\nd\te""#),
            vec![TokenKind::StringLit("a\"b\\c\nd\te".into())]
        );
        assert!(tokenize(r#""\q""#).is_err());
    }

    #[test]
    fn numbers_and_operators() {
        use TokenKind::*;
        assert_eq!(
            kinds("1.5 2 => == != <= >= . 3."),
            vec![
                DecimalLit("1.5".into()),
                IntLit("2".into()),
                Arrow,
                EqEq,
                NotEq,
                Le,
                Ge,
                Dot,
                IntLit("3".into()),
                Dot
            ]
        );
    }

    #[test]
    fn locations_track_lines_and_unicode() {
        let toks = tokenize("a\n  \"é\" b").unwrap();
        assert_eq!(toks[1].loc, SourceLocation::new(2, 3, 4));
        assert_eq!(toks[2].loc, SourceLocation::new(2, 7, 9));
    }
}
