//! Comment- and string-aware tokenizer for Solidity source.
//!
//! This is not a full Solidity lexer. It produces just enough structure for
//! keyword counting: identifiers, keywords, numbers and single-character
//! punctuation, with comments and string literals dropped entirely.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Punctuation,
    Number,
    Other,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::Punctuation => "punctuation",
            TokenKind::Number => "number",
            TokenKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// Whether plain whitespace (not a comment or string) separates this token
    /// from the previous one.
    #[serde(skip)]
    pub spaced: bool,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_keyword(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme.len() == c.len_utf8() && self.lexeme.starts_with(c)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "address",
    "anonymous",
    "as",
    "assembly",
    "bool",
    "break",
    "byte",
    "bytes",
    "calldata",
    "catch",
    "constant",
    "constructor",
    "continue",
    "contract",
    "days",
    "delete",
    "do",
    "else",
    "emit",
    "enum",
    "ether",
    "event",
    "external",
    "fallback",
    "false",
    "fixed",
    "for",
    "function",
    "gwei",
    "hours",
    "if",
    "immutable",
    "import",
    "indexed",
    "int",
    "interface",
    "internal",
    "is",
    "library",
    "mapping",
    "memory",
    "minutes",
    "modifier",
    "new",
    "override",
    "payable",
    "pragma",
    "private",
    "public",
    "pure",
    "receive",
    "return",
    "returns",
    "seconds",
    "storage",
    "string",
    "struct",
    "true",
    "try",
    "type",
    "ufixed",
    "uint",
    "unchecked",
    "using",
    "var",
    "view",
    "virtual",
    "weeks",
    "wei",
    "while",
];

/// Keyword test, including the sized elementary types (`uint256`, `bytes32`, ...).
pub fn is_keyword(word: &str) -> bool {
    if KEYWORDS.contains(&word) {
        return true;
    }
    let sized = |prefix: &str, max: u32, step: u32| {
        word.strip_prefix(prefix)
            .filter(|n| !n.is_empty() && !n.starts_with('0'))
            .and_then(|n| n.parse::<u32>().ok())
            .is_some_and(|n| n >= 1 && n <= max && n % step == 0)
    };
    sized("uint", 256, 8) || sized("int", 256, 8) || sized("bytes", 32, 1)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn skip_line_comment(&mut self) {
        self.eat_while(|c| c != '\n');
    }

    /// Consumes through the closing `*/`, or to end of input if unterminated.
    fn skip_block_comment(&mut self) {
        self.bump();
        self.bump();
        while let Some(c) = self.bump() {
            if c == '*' && self.peek() == Some('/') {
                self.bump();
                return;
            }
        }
    }

    /// Consumes a quoted literal. A backslash escapes the next character, so
    /// an escaped quote never terminates. Unterminated literals run to end of
    /// input.
    fn skip_string(&mut self, quote: char) {
        self.bump();
        while let Some(c) = self.bump() {
            if c == '\\' {
                self.bump();
            } else if c == quote {
                return;
            }
        }
    }
}

/// Tokenizes already-validated UTF-8 source text.
pub fn tokenize(src: &str) -> TokenStream {
    let mut cur = Cursor { src, pos: 0, line: 1 };
    let mut tokens = Vec::new();
    let mut spaced = false;

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            spaced = true;
            continue;
        }
        match (c, cur.peek_second()) {
            ('/', Some('/')) => {
                cur.skip_line_comment();
                continue;
            }
            ('/', Some('*')) => {
                cur.skip_block_comment();
                continue;
            }
            ('"', _) | ('\'', _) => {
                cur.skip_string(c);
                continue;
            }
            _ => {}
        }

        let start = cur.pos;
        let line = cur.line;
        let kind = if is_ident_start(c) {
            cur.eat_while(is_ident_continue);
            if is_keyword(&src[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            cur.bump();
            loop {
                match cur.peek() {
                    Some(n) if n.is_ascii_alphanumeric() || n == '_' => {
                        cur.bump();
                    }
                    Some('.') if cur.peek_second().is_some_and(|n| n.is_ascii_digit()) => {
                        cur.bump();
                    }
                    _ => break,
                }
            }
            TokenKind::Number
        } else if c.is_ascii_punctuation() {
            cur.bump();
            TokenKind::Punctuation
        } else {
            cur.bump();
            TokenKind::Other
        };
        tokens.push(Token { kind, lexeme: src[start..cur.pos].to_string(), line, spaced });
        spaced = false;
    }

    TokenStream { tokens }
}
