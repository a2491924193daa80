//! Parser for the single-table, conjunctive SQL fragment used by WikiSQL-style corpora:
//!
//! ```text
//! SELECT [AGG(]col[)] FROM table [WHERE col OP val (AND col OP val)*] [;]
//! ```
//!
//! Identifiers may be bare, back-quoted or bracketed; literals may be bare or single-quoted.
//! Keywords are case-insensitive. Constructs outside the fragment (OR, JOIN, nesting,
//! grouping, ordering) are rejected with an error naming the construct.

use std::fmt;

use crate::schema::Concept;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    None,
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl Aggregation {
    fn keyword(self) -> Option<&'static str> {
        match self {
            Aggregation::None => None,
            Aggregation::Count => Some("COUNT"),
            Aggregation::Sum => Some("SUM"),
            Aggregation::Avg => Some("AVG"),
            Aggregation::Min => Some("MIN"),
            Aggregation::Max => Some("MAX"),
        }
    }

    fn from_keyword(word: &str) -> Option<Aggregation> {
        match word.to_ascii_uppercase().as_str() {
            "COUNT" => Some(Aggregation::Count),
            "SUM" => Some(Aggregation::Sum),
            "AVG" => Some(Aggregation::Avg),
            "MIN" => Some(Aggregation::Min),
            "MAX" => Some(Aggregation::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Eq,
    Gt,
    Lt,
    Ge,
    Le,
    Ne,
}

impl Operator {
    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Eq => "=",
            Operator::Gt => ">",
            Operator::Lt => "<",
            Operator::Ge => ">=",
            Operator::Le => "<=",
            Operator::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub column: String,
    pub op: Operator,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SqlQuery {
    pub select_column: String,
    pub aggregation: Aggregation,
    pub table: String,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlError {
    #[error("SQL parse error at offset {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax { position: usize, expected: Vec<&'static str>, found: String },
    #[error("unsupported SQL construct {construct} at offset {position}")]
    Unsupported { position: usize, construct: String },
}

impl SqlError {
    pub fn position(&self) -> usize {
        match self {
            SqlError::Syntax { position, .. } | SqlError::Unsupported { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Word(String),
    Quoted(String),
    Str(String),
    Op(Operator),
    LParen,
    RParen,
    Comma,
    Star,
    Semicolon,
    End,
}

impl fmt::Display for Lexeme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lexeme::Word(w) => write!(f, "{w:?}"),
            Lexeme::Quoted(w) => write!(f, "identifier {w:?}"),
            Lexeme::Str(s) => write!(f, "string '{s}'"),
            Lexeme::Op(op) => write!(f, "{:?}", op.as_str()),
            Lexeme::LParen => f.write_str("\"(\""),
            Lexeme::RParen => f.write_str("\")\""),
            Lexeme::Comma => f.write_str("\",\""),
            Lexeme::Star => f.write_str("\"*\""),
            Lexeme::Semicolon => f.write_str("\";\""),
            Lexeme::End => f.write_str("end of input"),
        }
    }
}

const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "JOIN", "ON", "GROUP", "ORDER", "BY", "LIMIT", "UNION", "HAVING",
    "INNER", "LEFT", "RIGHT", "DISTINCT",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !"()`[]',;=<>!*".contains(c)
}

fn lex(text: &str) -> Result<Vec<(usize, Lexeme)>, SqlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let lexeme = match c {
            '(' => {
                i += 1;
                Lexeme::LParen
            }
            ')' => {
                i += 1;
                Lexeme::RParen
            }
            ',' => {
                i += 1;
                Lexeme::Comma
            }
            '*' => {
                i += 1;
                Lexeme::Star
            }
            ';' => {
                i += 1;
                Lexeme::Semicolon
            }
            '=' => {
                i += 1;
                Lexeme::Op(Operator::Eq)
            }
            '<' | '>' | '!' => {
                let next = chars.get(i + 1).copied();
                let (op, width) = match (c, next) {
                    ('<', Some('=')) => (Operator::Le, 2),
                    ('>', Some('=')) => (Operator::Ge, 2),
                    ('!', Some('=')) => (Operator::Ne, 2),
                    ('<', _) => (Operator::Lt, 1),
                    ('>', _) => (Operator::Gt, 1),
                    _ => {
                        return Err(SqlError::Syntax {
                            position: start,
                            expected: vec!["operator"],
                            found: "\"!\"".into(),
                        })
                    }
                };
                i += width;
                Lexeme::Op(op)
            }
            '\'' => Lexeme::Str(delimited(&chars, &mut i, '\'')?),
            '`' => Lexeme::Quoted(delimited(&chars, &mut i, '`')?),
            '[' => Lexeme::Quoted(delimited(&chars, &mut i, ']')?),
            ']' => {
                return Err(SqlError::Syntax { position: start, expected: vec!["identifier"], found: "\"]\"".into() })
            }
            _ => {
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                Lexeme::Word(chars[start..i].iter().collect())
            }
        };
        out.push((start, lexeme));
    }
    out.push((chars.len(), Lexeme::End));
    Ok(out)
}

/// Reads a run closed by `close`; a doubled `close` stands for one literal character.
fn delimited(chars: &[char], i: &mut usize, close: char) -> Result<String, SqlError> {
    let start = *i;
    *i += 1;
    let mut out = String::new();
    loop {
        match chars.get(*i) {
            None => {
                return Err(SqlError::Syntax {
                    position: start,
                    expected: vec!["closing delimiter"],
                    found: "end of input".into(),
                })
            }
            Some(&c) if c == close => {
                if chars.get(*i + 1) == Some(&close) {
                    out.push(close);
                    *i += 2;
                } else {
                    *i += 1;
                    return Ok(out);
                }
            }
            Some(&c) => {
                out.push(c);
                *i += 1;
            }
        }
    }
}

struct Parser {
    lexemes: Vec<(usize, Lexeme)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Lexeme) {
        &self.lexemes[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Lexeme {
        let i = (self.pos + ahead).min(self.lexemes.len() - 1);
        &self.lexemes[i].1
    }

    fn bump(&mut self) -> (usize, Lexeme) {
        let item = self.lexemes[self.pos].clone();
        if self.pos + 1 < self.lexemes.len() {
            self.pos += 1;
        }
        item
    }

    fn fail<T>(&self, expected: Vec<&'static str>) -> Result<T, SqlError> {
        let (position, lexeme) = self.peek();
        if let Lexeme::Word(w) = lexeme {
            if let Some(construct) = unsupported_keyword(w) {
                return Err(SqlError::Unsupported { position: *position, construct });
            }
        }
        Err(SqlError::Syntax { position: *position, expected, found: lexeme.to_string() })
    }

    fn at_keyword(&self, keyword: &str) -> bool {
        matches!(&self.peek().1, Lexeme::Word(w) if w.eq_ignore_ascii_case(keyword))
    }

    fn keyword(&mut self, keyword: &'static str) -> Result<(), SqlError> {
        if self.at_keyword(keyword) {
            self.bump();
            Ok(())
        } else {
            self.fail(vec![keyword])
        }
    }

    fn identifier(&mut self, what: &'static str) -> Result<String, SqlError> {
        match &self.peek().1 {
            Lexeme::Quoted(name) if !name.trim().is_empty() => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            Lexeme::Word(w) if !is_reserved(w) => {
                let name = w.clone();
                self.bump();
                Ok(name)
            }
            Lexeme::Star => Err(SqlError::Unsupported { position: self.peek().0, construct: "SELECT *".into() }),
            Lexeme::LParen if matches!(self.peek_at(1), Lexeme::Word(w) if w.eq_ignore_ascii_case("SELECT")) => {
                Err(SqlError::Unsupported { position: self.peek().0, construct: "nested query".into() })
            }
            _ => self.fail(vec![what]),
        }
    }

    fn literal(&mut self) -> Result<String, SqlError> {
        match &self.peek().1 {
            Lexeme::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            Lexeme::Word(w) if !is_reserved(w) => {
                let s = w.clone();
                self.bump();
                Ok(s)
            }
            Lexeme::LParen if matches!(self.peek_at(1), Lexeme::Word(w) if w.eq_ignore_ascii_case("SELECT")) => {
                Err(SqlError::Unsupported { position: self.peek().0, construct: "nested query".into() })
            }
            _ => self.fail(vec!["literal"]),
        }
    }

    fn select_item(&mut self) -> Result<(Aggregation, String), SqlError> {
        if let Lexeme::Word(w) = &self.peek().1 {
            if let Some(agg) = Aggregation::from_keyword(w) {
                if *self.peek_at(1) == Lexeme::LParen {
                    self.bump();
                    self.bump();
                    let column = self.identifier("column")?;
                    if self.peek().1 != Lexeme::RParen {
                        return self.fail(vec!["\")\""]);
                    }
                    self.bump();
                    return Ok((agg, column));
                }
            }
        }
        Ok((Aggregation::None, self.identifier("column")?))
    }

    fn condition(&mut self) -> Result<Condition, SqlError> {
        let column = self.identifier("column")?;
        let op = match self.peek().1 {
            Lexeme::Op(op) => op,
            _ => return self.fail(vec!["comparison operator"]),
        };
        self.bump();
        let value = self.literal()?;
        Ok(Condition { column, op, value })
    }

    fn query(&mut self) -> Result<SqlQuery, SqlError> {
        self.keyword("SELECT")?;
        if self.at_keyword("DISTINCT") {
            return Err(SqlError::Unsupported { position: self.peek().0, construct: "DISTINCT".into() });
        }
        let (aggregation, select_column) = self.select_item()?;
        if self.peek().1 == Lexeme::Comma {
            return Err(SqlError::Unsupported { position: self.peek().0, construct: "multiple select columns".into() });
        }
        self.keyword("FROM")?;
        let table = self.identifier("table")?;
        if self.peek().1 == Lexeme::Comma {
            return Err(SqlError::Unsupported { position: self.peek().0, construct: "multiple tables".into() });
        }
        let mut conditions = Vec::new();
        if self.at_keyword("WHERE") {
            self.bump();
            conditions.push(self.condition()?);
            while self.at_keyword("AND") {
                self.bump();
                conditions.push(self.condition()?);
            }
        }
        if self.peek().1 == Lexeme::Semicolon {
            self.bump();
        }
        if self.peek().1 != Lexeme::End {
            let expected =
                if conditions.is_empty() { vec!["WHERE", "end of input"] } else { vec!["AND", "end of input"] };
            return self.fail(expected);
        }
        Ok(SqlQuery { select_column, aggregation, table, conditions })
    }
}

fn unsupported_keyword(word: &str) -> Option<String> {
    ["OR", "JOIN", "INNER", "LEFT", "RIGHT", "GROUP", "ORDER", "LIMIT", "UNION", "HAVING", "NOT"]
        .iter()
        .find(|k| k.eq_ignore_ascii_case(word))
        .map(|k| k.to_string())
}

pub fn parse_sql(text: &str) -> Result<SqlQuery, SqlError> {
    let lexemes = lex(text)?;
    Parser { lexemes, pos: 0 }.query()
}

impl std::str::FromStr for SqlQuery {
    type Err = SqlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sql(s)
    }
}

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let bare = !name.is_empty()
        && name.chars().all(is_word_char)
        && !is_reserved(name)
        && Aggregation::from_keyword(name).is_none();
    if bare {
        f.write_str(name)
    } else {
        write!(f, "`{}`", name.replace('`', "``"))
    }
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        match self.aggregation.keyword() {
            Some(agg) => {
                write!(f, "{agg}(")?;
                write_ident(f, &self.select_column)?;
                f.write_str(")")?;
            }
            None => write_ident(f, &self.select_column)?,
        }
        f.write_str(" FROM ")?;
        write_ident(f, &self.table)?;
        for (i, cond) in self.conditions.iter().enumerate() {
            f.write_str(if i == 0 { " WHERE " } else { " AND " })?;
            write_ident(f, &cond.column)?;
            write!(f, " {} '{}'", cond.op.as_str(), cond.value.replace('\'', "''"))?;
        }
        Ok(())
    }
}

/// Concepts mentioned by a query: the selected column, each condition column, and each
/// condition literal as a value under its column. Duplicates are dropped, first occurrence wins.
pub fn extract_concepts(sql: &SqlQuery) -> Vec<Concept> {
    let mut out: Vec<Concept> = Vec::new();
    let mut push = |c: Concept| {
        if !out.contains(&c) {
            out.push(c);
        }
    };
    push(Concept::column(&sql.select_column));
    for cond in &sql.conditions {
        push(Concept::column(&cond.column));
        push(Concept::value(&cond.value, &cond.column));
    }
    out
}
