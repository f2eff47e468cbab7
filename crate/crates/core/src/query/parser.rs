//! Parser for the metrics query language:
//!
//! ```graphql
//! query Named($min: Int = 0) {
//!   metrics(query: { functions_gt: $min, pragma_eq: "^0.6.0" }) {
//!     address
//!     functions
//!   }
//! }
//! ```
//!
//! plus the introspection form `{ __type(name: "Metrics") { ... } }`.
//! Commas are insignificant and `#` starts a comment, as in GraphQL.

use std::collections::HashMap;

use chrono::DateTime;
use serde_json::Value;

use super::fields::{Field, FieldKind, FilterValue, Numeric, Op};
use super::{FilterPredicate, Query, QueryError, Request};
use crate::address::ContractAddress;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Punct(char),
    Name(String),
    Number(String),
    Str(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Punct(c) => format!("'{c}'"),
            Tok::Name(n) => format!("name {n:?}"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut line_start) = (1usize, 0usize);
    let col = |pos: usize, ls: usize| text[ls..pos].chars().count() + 1;

    while let Some(&(pos, c)) = chars.peek() {
        let column = col(pos, line_start);
        let syntax = |message: String| QueryError::Syntax { message, line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                line_start = pos + 1;
            }
            c if c.is_whitespace() || c == ',' || c == '\u{feff}' => {
                chars.next();
            }
            '#' => {
                while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                    chars.next();
                }
            }
            '{' | '}' | '(' | ')' | ':' | '$' | '!' | '=' | '[' | ']' => {
                chars.next();
                out.push(Spanned { tok: Tok::Punct(c), line, column });
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some((_, '\n')) => return Err(syntax("unterminated string".into())),
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, '"')) => s.push('"'),
                            Some((_, '\\')) => s.push('\\'),
                            Some((_, '/')) => s.push('/'),
                            Some((_, 'n')) => s.push('\n'),
                            Some((_, 't')) => s.push('\t'),
                            Some((_, 'r')) => s.push('\r'),
                            Some((_, 'b')) => s.push('\u{8}'),
                            Some((_, 'f')) => s.push('\u{c}'),
                            Some((_, 'u')) => {
                                let hex: String = (0..4).filter_map(|_| chars.next().map(|(_, c)| c)).collect();
                                let ch = u32::from_str_radix(&hex, 16)
                                    .ok()
                                    .and_then(char::from_u32)
                                    .ok_or_else(|| syntax(format!("bad unicode escape \\u{hex}")))?;
                                s.push(ch);
                            }
                            other => {
                                return Err(syntax(format!(
                                    "bad escape sequence \\{}",
                                    other.map_or(String::new(), |(_, c)| c.to_string())
                                )))
                            }
                        },
                        Some((_, c)) => s.push(c),
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line, column });
            }
            c if c == '-' || c.is_ascii_digit() => {
                let mut s = String::new();
                s.push(c);
                chars.next();
                while let Some(&(_, n)) = chars.peek() {
                    let sign_after_exp = (n == '-' || n == '+') && s.ends_with(['e', 'E']);
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || sign_after_exp {
                        s.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if !s.bytes().any(|b| b.is_ascii_digit()) {
                    return Err(syntax(format!("malformed number {s:?}")));
                }
                out.push(Spanned { tok: Tok::Number(s), line, column });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Name(s), line, column });
            }
            other => return Err(syntax(format!("unexpected character {other:?}"))),
        }
    }
    let column = col(text.len(), line_start);
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

/// A value as written in the document, before it is typed against a field.
#[derive(Debug, Clone, PartialEq)]
enum Literal {
    Number(String),
    Str(String),
    Bool(bool),
    Null,
    Variable(String),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    bindings: &'a serde_json::Map<String, Value>,
    defaults: HashMap<String, Literal>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        let s = &self.toks[self.pos];
        QueryError::Syntax { message: message.into(), line: s.line, column: s.column }
    }

    fn unexpected(&self, expected: &str) -> QueryError {
        self.error(format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, c: char) -> Result<(), QueryError> {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn document(&mut self) -> Result<Request, QueryError> {
        if *self.peek() == Tok::Name("query".into()) {
            self.bump();
            if matches!(self.peek(), Tok::Name(_)) {
                self.bump();
            }
            if *self.peek() == Tok::Punct('(') {
                self.variable_definitions()?;
            }
        }
        self.expect('{')?;
        let root = self.name()?;
        let request = match root.as_str() {
            "metrics" => Request::Metrics(self.metrics()?),
            "__type" => Request::Introspect { type_name: self.type_introspection()? },
            other => return Err(QueryError::UnknownField(other.to_string())),
        };
        if *self.peek() != Tok::Punct('}') {
            return Err(self.unexpected("'}' (only one root field is supported)"));
        }
        self.bump();
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(request)
    }

    fn variable_definitions(&mut self) -> Result<(), QueryError> {
        self.expect('(')?;
        while !self.eat(')') {
            self.expect('$')?;
            let name = self.name()?;
            self.expect(':')?;
            self.type_ref()?;
            if self.eat('=') {
                let default = self.literal()?;
                if matches!(default, Literal::Variable(_)) {
                    return Err(self.error("variable default must be a constant"));
                }
                self.defaults.insert(name, default);
            }
        }
        Ok(())
    }

    fn type_ref(&mut self) -> Result<(), QueryError> {
        if self.eat('[') {
            self.type_ref()?;
            self.expect(']')?;
        } else {
            self.name()?;
        }
        self.eat('!');
        Ok(())
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        let lit = match self.peek().clone() {
            Tok::Number(n) => Literal::Number(n),
            Tok::Str(s) => Literal::Str(s),
            Tok::Name(n) if n == "true" => Literal::Bool(true),
            Tok::Name(n) if n == "false" => Literal::Bool(false),
            Tok::Name(n) if n == "null" => Literal::Null,
            Tok::Punct('$') => {
                self.bump();
                return Ok(Literal::Variable(self.name()?));
            }
            _ => return Err(self.unexpected("a value")),
        };
        self.bump();
        Ok(lit)
    }

    fn metrics(&mut self) -> Result<Query, QueryError> {
        let mut predicates = Vec::new();
        if self.eat('(') {
            while !self.eat(')') {
                let arg = self.name()?;
                if arg != "query" {
                    return Err(self.error(format!("unknown argument {arg:?} (expected \"query\")")));
                }
                self.expect(':')?;
                self.filter_object(&mut predicates)?;
            }
        }
        let selection = self.selection()?;
        Ok(Query { predicates, selection })
    }

    fn filter_object(&mut self, out: &mut Vec<FilterPredicate>) -> Result<(), QueryError> {
        self.expect('{')?;
        while !self.eat('}') {
            let key = self.name()?;
            self.expect(':')?;
            let lit = self.literal()?;
            let (field, op) = split_filter_key(&key)?;
            let value = self.resolve(lit)?;
            out.push(FilterPredicate { field, op, value: type_value(field, op, value)? });
        }
        Ok(())
    }

    fn resolve(&self, lit: Literal) -> Result<Literal, QueryError> {
        let Literal::Variable(name) = lit else {
            return Ok(lit);
        };
        match self.bindings.get(&name) {
            Some(v) => json_literal(&name, v),
            None => self.defaults.get(&name).cloned().ok_or(QueryError::UnboundVariable(name)),
        }
    }

    fn selection(&mut self) -> Result<Vec<Field>, QueryError> {
        self.expect('{')?;
        let mut fields = Vec::new();
        while !self.eat('}') {
            let name = self.name()?;
            match self.peek() {
                Tok::Punct('{') => return Err(self.error("nested selections are not supported")),
                Tok::Punct('(') => return Err(self.error("field arguments are not supported")),
                Tok::Punct(':') => return Err(self.error("aliases are not supported")),
                _ => {}
            }
            let field = Field::lookup(&name).ok_or(QueryError::UnknownField(name))?;
            if !fields.contains(&field) {
                fields.push(field);
            }
        }
        if fields.is_empty() {
            return Err(self.error("selection set must name at least one field"));
        }
        Ok(fields)
    }

    fn type_introspection(&mut self) -> Result<String, QueryError> {
        self.expect('(')?;
        let arg = self.name()?;
        if arg != "name" {
            return Err(self.error(format!("unknown argument {arg:?} (expected \"name\")")));
        }
        self.expect(':')?;
        let lit = self.literal()?;
        let type_name = match self.resolve(lit)? {
            Literal::Str(s) => s,
            _ => return Err(QueryError::TypeMismatch("__type name must be a string".into())),
        };
        self.expect(')')?;
        if *self.peek() == Tok::Punct('{') {
            self.skip_block()?;
        }
        Ok(type_name)
    }

    /// Consumes a balanced `{ ... }`. Introspection always returns the whole
    /// catalog, so its sub-selection is only checked for balance.
    fn skip_block(&mut self) -> Result<(), QueryError> {
        self.expect('{')?;
        let mut depth = 1;
        while depth > 0 {
            match self.bump() {
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => depth -= 1,
                Tok::Eof => return Err(self.error("unbalanced selection set")),
                _ => {}
            }
        }
        Ok(())
    }
}

fn split_filter_key(key: &str) -> Result<(Field, Op), QueryError> {
    if let Some((field, suffix)) = key.rsplit_once('_') {
        if let Some(op) = Op::from_suffix(suffix) {
            let field = Field::lookup(field).ok_or_else(|| QueryError::UnknownField(field.to_string()))?;
            return Ok((field, op));
        }
        if Field::lookup(field).is_some() {
            return Err(QueryError::UnknownOperator(format!("{suffix:?} in {key:?}")));
        }
    }
    if Field::lookup(key).is_some() {
        return Err(QueryError::UnknownOperator(format!(
            "{key:?} has no operator suffix (use {key}_eq, {key}_gt, ...)"
        )));
    }
    Err(QueryError::UnknownField(key.to_string()))
}

fn json_literal(name: &str, v: &Value) -> Result<Literal, QueryError> {
    match v {
        Value::Number(n) => Ok(Literal::Number(n.to_string())),
        Value::String(s) => Ok(Literal::Str(s.clone())),
        Value::Bool(b) => Ok(Literal::Bool(*b)),
        Value::Null => Ok(Literal::Null),
        _ => Err(QueryError::TypeMismatch(format!("variable ${name} must be a scalar"))),
    }
}

fn type_value(field: Field, op: Op, lit: Literal) -> Result<FilterValue, QueryError> {
    let key = format!("{}_{}", field.name(), op.suffix());
    if !field.filterable() {
        return Err(QueryError::TypeMismatch(format!("{} cannot be filtered", field.name())));
    }
    if op.is_ordering() && !field.operators().contains(&op) {
        return Err(QueryError::TypeMismatch(format!(
            "{key}: ordering comparisons need a numeric field, {} is {:?}",
            field.name(),
            field.kind()
        )));
    }
    let mismatch = |what: &str| QueryError::TypeMismatch(format!("{key} expects {what}, got {}", describe(&lit)));
    match (field.kind(), &lit) {
        (FieldKind::Number, Literal::Number(n)) => {
            Numeric::parse(n).map(FilterValue::Num).ok_or_else(|| mismatch("a number"))
        }
        (FieldKind::Number, _) => Err(mismatch("a number")),
        (FieldKind::Timestamp, Literal::Number(n)) => match Numeric::parse(n) {
            Some(num @ Numeric::Int(_)) => Ok(FilterValue::Num(num)),
            _ => Err(mismatch("integer seconds or an RFC 3339 string")),
        },
        (FieldKind::Timestamp, Literal::Str(s)) => DateTime::parse_from_rfc3339(s)
            .map(|dt| FilterValue::Num(Numeric::Int(dt.timestamp() as i128)))
            .map_err(|_| mismatch("integer seconds or an RFC 3339 string")),
        (FieldKind::Timestamp, _) => Err(mismatch("integer seconds or an RFC 3339 string")),
        (FieldKind::Address, Literal::Str(s)) => s
            .parse::<ContractAddress>()
            .map(FilterValue::Addr)
            .map_err(|_| mismatch("a 0x-prefixed 40-digit hex address")),
        (FieldKind::Address, _) => Err(mismatch("an address string")),
        (FieldKind::String, Literal::Str(s)) => Ok(FilterValue::Str(s.clone())),
        (FieldKind::String, _) => Err(mismatch("a string")),
        (FieldKind::List, _) => Err(QueryError::TypeMismatch(format!("{} cannot be filtered", field.name()))),
    }
}

fn describe(lit: &Literal) -> String {
    match lit {
        Literal::Number(n) => format!("number {n}"),
        Literal::Str(s) => format!("string {s:?}"),
        Literal::Bool(b) => format!("boolean {b}"),
        Literal::Null => "null".into(),
        Literal::Variable(v) => format!("variable ${v}"),
    }
}

pub fn parse_request(text: &str, variables: &serde_json::Map<String, Value>) -> Result<Request, QueryError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, bindings: variables, defaults: HashMap::new() };
    p.document()
}
