//! Front end for the `.mc` model language: lexing, parsing, name
//! resolution and validation.
//!
//! ```text
//! const MAXTIME = 3
//! enum Door { OPEN, CLOSED }
//! var door : Door
//! var timeRemaining : 0..MAXTIME
//! init { door in {OPEN, CLOSED} && timeRemaining = 0 }
//! action IncTime { when timeRemaining < MAXTIME  timeRemaining' = timeRemaining + 1 }
//! invariant Bounded { timeRemaining <= MAXTIME }
//! ```

mod lexer;
mod pretty;
mod resolve;
mod syntax;
mod validate;

use std::fmt;

use crate::kernel::Model;

pub use pretty::{expr_to_string, pretty};
pub use validate::{validate, STUTTER};

/// A position in the source text. Lines and columns are 1-based and count
/// characters; `length` may be zero at end of input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan::new(1, 1, 0)
    }
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line: line.max(1),
            column: column.max(1),
            length,
        }
    }

    /// Covers `self` through the end of `other` when both are on one line.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        if other.line == self.line && other.column >= self.column {
            let end = other.column + other.length;
            SourceSpan::new(self.line, self.column, end - self.column)
        } else {
            self
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Lexical,
    Syntactic,
    NameResolution,
    Type,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lexical => "lexical",
            ErrorKind::Syntactic => "syntax",
            ErrorKind::NameResolution => "name",
            ErrorKind::Type => "type",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, thiserror::Error)]
#[error("{span}: {kind} error: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ErrorKind,
    pub message: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, kind: ErrorKind, message: String) -> Self {
        ParseError {
            span,
            kind,
            message,
        }
    }
}

/// Parses and validates a model. On failure every error found in the pass is
/// returned, ordered by position.
pub fn parse(text: &str) -> Result<Model, Vec<ParseError>> {
    let (tokens, mut errors) = lexer::lex(text);
    let eof = tokens.last().map(|t| t.span).unwrap_or_default();
    let mut parser = syntax::Parser::new(tokens);
    let items = parser.items();
    errors.append(&mut parser.errors);

    // after a syntax error the init block may just have been skipped
    let (model, resolve_errors) = resolve::resolve(items, errors.is_empty().then_some(eof));
    errors.extend(resolve_errors);
    // type errors on a half-resolved model would be noise
    if errors.is_empty() {
        if let Err(mut e) = validate(&model) {
            errors.append(&mut e);
        }
    }
    if errors.is_empty() {
        Ok(model)
    } else {
        errors.sort_by_key(|e| (e.span.line, e.span.column));
        errors.dedup();
        Err(errors)
    }
}
