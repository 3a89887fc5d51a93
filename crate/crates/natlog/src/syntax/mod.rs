//! Surface syntax: whitespace-separated words with parenthesized tuples,
//! sentences terminated by `.` (clauses) or `?` (queries).

mod parser;
mod scanner;

pub use parser::{parse_program, parse_query, render_clause, render_goal, Clause, Goal, GoalTag, Query};
pub use scanner::{tokenize, Token, TokenKind};

use std::fmt;

/// Lexical or grammatical error, with the 1-based position it was found at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Lex,
    Parse,
}

impl SyntaxError {
    fn lex(message: impl Into<String>, line: usize, col: usize) -> SyntaxError {
        SyntaxError { kind: SyntaxErrorKind::Lex, message: message.into(), line, col }
    }

    fn parse(message: impl Into<String>, line: usize, col: usize) -> SyntaxError {
        SyntaxError { kind: SyntaxErrorKind::Parse, message: message.into(), line, col }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for SyntaxError {}
