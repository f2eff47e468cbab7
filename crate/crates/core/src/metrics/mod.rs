//! Intrinsic (code-derived) metrics of Solidity source files.
//!
//! Counting works on the token stream from [`lexer`], so anything inside a
//! comment or string literal is invisible to every metric except `sloc`.
//! Metrics are per file: a file with several contracts yields one vector.

pub mod lexer;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::ContractAddress;
pub use lexer::{Token, TokenKind, TokenStream};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzeError {
    #[error("source is not valid UTF-8 (first invalid byte at offset {offset})")]
    InvalidEncoding { offset: usize },
    #[error("address {0} appears more than once in the batch")]
    RepeatedAddress(ContractAddress),
}

/// UTF-8 text of one Solidity source file.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SourceText(String);

impl SourceText {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, AnalyzeError> {
        String::from_utf8(bytes)
            .map(Self)
            .map_err(|e| AnalyzeError::InvalidEncoding { offset: e.utf8_error().valid_up_to() })
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl From<String> for SourceText {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl From<&str> for SourceText {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl std::fmt::Debug for SourceText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SourceText({} bytes)", self.0.len())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntrinsicMetrics {
    pub pragma: String,
    pub sloc: u64,
    pub functions: u64,
    pub events: u64,
    pub modifiers: u64,
    pub payable: u64,
    pub mapping: u64,
    pub address_vars: u64,
}

pub fn lex(source: &SourceText) -> TokenStream {
    lexer::tokenize(source.as_str())
}

pub fn lex_bytes(bytes: &[u8]) -> Result<TokenStream, AnalyzeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AnalyzeError::InvalidEncoding { offset: e.valid_up_to() })?;
    Ok(lexer::tokenize(text))
}

/// Physical lines: newline-separated segments, counting a trailing segment
/// that has no newline.
pub fn physical_lines(text: &str) -> u64 {
    let newlines = text.bytes().filter(|&b| b == b'\n').count() as u64;
    if text.is_empty() || text.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

pub fn analyze(source: &SourceText) -> IntrinsicMetrics {
    let tokens = lex(source);
    metrics_from_tokens(&tokens.tokens, physical_lines(source.as_str()))
}

pub fn analyze_bytes(bytes: &[u8]) -> Result<IntrinsicMetrics, AnalyzeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AnalyzeError::InvalidEncoding { offset: e.valid_up_to() })?;
    let tokens = lexer::tokenize(text);
    Ok(metrics_from_tokens(&tokens.tokens, physical_lines(text)))
}

/// Analyzes every entry independently. Output order matches input order and
/// one bad entry never affects the others.
pub fn analyze_batch(
    sources: Vec<(ContractAddress, Vec<u8>)>,
) -> Vec<(ContractAddress, Result<IntrinsicMetrics, AnalyzeError>)> {
    let mut seen = std::collections::HashSet::with_capacity(sources.len());
    let repeated: Vec<bool> = sources.iter().map(|(a, _)| !seen.insert(*a)).collect();
    sources
        .into_par_iter()
        .zip(repeated)
        .map(|((address, bytes), repeated)| {
            let result = if repeated { Err(AnalyzeError::RepeatedAddress(address)) } else { analyze_bytes(&bytes) };
            (address, result)
        })
        .collect()
}

fn metrics_from_tokens(tokens: &[Token], sloc: u64) -> IntrinsicMetrics {
    let mut m = IntrinsicMetrics { pragma: extract_pragma(tokens), sloc, ..Default::default() };
    let prev_is_dot = |i: usize| i > 0 && tokens[i - 1].is_punct('.');
    let next_is_paren = |i: usize| tokens.get(i + 1).is_some_and(|t| t.is_punct('('));

    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword {
            continue;
        }
        match tok.lexeme.as_str() {
            "function" if !prev_is_dot(i) => {
                m.functions += 1;
                if function_is_payable(tokens, i) {
                    m.payable += 1;
                }
            }
            "event" => m.events += 1,
            "modifier" if !prev_is_dot(i) => m.modifiers += 1,
            "mapping" if next_is_paren(i) => m.mapping += 1,
            "address" if !next_is_paren(i) => m.address_vars += 1,
            _ => {}
        }
    }
    m
}

/// Constraint text of the first `pragma solidity ...;` directive. Tokens are
/// rejoined with a single space wherever the source had whitespace between
/// them, so comments inside the directive do not leak into the result.
fn extract_pragma(tokens: &[Token]) -> String {
    let start = tokens.windows(2).position(|w| w[0].is_keyword("pragma") && w[1].lexeme == "solidity");
    let Some(start) = start else {
        return String::new();
    };
    let mut out = String::new();
    for tok in tokens[start + 2..].iter().take_while(|t| !t.is_punct(';')) {
        if tok.spaced && !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&tok.lexeme);
    }
    out
}

/// Looks at the header of the function declared at `fn_idx`: the tokens after
/// the parameter list's closing parenthesis up to the first `{` or `;` at the
/// same depth. `address payable` inside the header is a type, not mutability.
fn function_is_payable(tokens: &[Token], fn_idx: usize) -> bool {
    let Some(open) = tokens[fn_idx + 1..]
        .iter()
        .position(|t| t.is_punct('(') || t.is_punct('{') || t.is_punct(';'))
        .map(|p| p + fn_idx + 1)
        .filter(|&p| tokens[p].is_punct('('))
    else {
        return false;
    };
    let Some(close) = matching_paren(tokens, open) else {
        return false;
    };
    let mut depth = 0usize;
    for i in close + 1..tokens.len() {
        let tok = &tokens[i];
        if tok.is_punct('(') {
            depth += 1;
        } else if tok.is_punct(')') {
            depth = depth.saturating_sub(1);
        } else if depth == 0 && (tok.is_punct('{') || tok.is_punct(';')) {
            return false;
        } else if tok.is_keyword("payable") && !tokens[i - 1].is_keyword("address") {
            return true;
        }
    }
    false
}

fn matching_paren(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, tok) in tokens.iter().enumerate().skip(open) {
        if tok.is_punct('(') {
            depth += 1;
        } else if tok.is_punct(')') {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}
