//! Recursive-descent parser for clause and query sentences.
//!
//! A sentence is a sequence of whitespace-separated words; `.` ends a
//! clause, `?` ends a query. A clause without `:` is a fact. Parenthesized
//! tuples nest arbitrarily; variables are numbered per sentence by first
//! occurrence, head first.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::scanner::{tokenize, Token, TokenKind};
use super::SyntaxError;
use crate::term::Term;

/// How a body goal is dispatched by the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalTag {
    Plain,
    /// `#f ...` — host call for side effects only.
    Action,
    /// `` `f ... R `` — host function; result unifies with the last argument.
    Fun,
    /// ```` ``f ... R ```` — host generator; each yield unifies with the last argument.
    Gen,
    /// `^t ...` — emit the goal tuple as an answer and continue.
    Yield,
    /// `~p ...` — match the goal tuple against the ground fact database.
    Db,
}

impl GoalTag {
    pub fn sigil(self) -> &'static str {
        match self {
            GoalTag::Plain => "",
            GoalTag::Action => "#",
            GoalTag::Fun => "`",
            GoalTag::Gen => "``",
            GoalTag::Yield => "^",
            GoalTag::Db => "~",
        }
    }
}

/// One body or query goal: a tuple term plus its dispatch tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub tag: GoalTag,
    pub term: Term,
}

impl Goal {
    pub fn plain(term: Term) -> Goal {
        Goal { tag: GoalTag::Plain, term }
    }
}

/// A program clause. Variable indices in head and body lie in `0..nvars`,
/// numbered by first occurrence (head first, left to right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Goal>,
    pub nvars: usize,
}

/// A parsed query: its goals and the number of distinct variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goals: Vec<Goal>,
    pub nvars: usize,
}

struct Tokens {
    toks: Vec<Token>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Position of the current token, or just past the last one.
    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.toks.last().map_or((1, 1), |t| (t.line, t.col + 1)),
        }
    }
}

/// Per-sentence variable numbering. `_` alone is anonymous: fresh on every
/// occurrence. Named variables (including `_X` styles) are shared within
/// the sentence.
struct VarScope {
    named: HashMap<String, usize>,
    count: usize,
}

impl VarScope {
    fn new() -> VarScope {
        VarScope { named: HashMap::new(), count: 0 }
    }

    fn index_of(&mut self, name: &str) -> usize {
        if name == "_" {
            let i = self.count;
            self.count += 1;
            return i;
        }
        if let Some(&i) = self.named.get(name) {
            return i;
        }
        let i = self.count;
        self.count += 1;
        self.named.insert(name.to_string(), i);
        i
    }
}

/// Parses program text into clauses, one per `.`-terminated sentence.
pub fn parse_program(src: &str) -> Result<Vec<Clause>, SyntaxError> {
    let mut ts = Tokens { toks: tokenize(src)?, pos: 0 };
    let mut clauses = Vec::new();
    while ts.peek().is_some() {
        clauses.push(parse_clause(&mut ts)?);
    }
    Ok(clauses)
}

/// Parses one `?`-terminated query sentence.
pub fn parse_query(src: &str) -> Result<Query, SyntaxError> {
    let mut ts = Tokens { toks: tokenize(src)?, pos: 0 };
    let mut scope = VarScope::new();
    let mut goals = vec![parse_goal(&mut ts, &mut scope)?];
    loop {
        let (line, col) = ts.here();
        match ts.next() {
            Some(Token { kind: TokenKind::Comma, .. }) => {
                goals.push(parse_goal(&mut ts, &mut scope)?);
            }
            Some(Token { kind: TokenKind::QMark, .. }) => break,
            Some(Token { kind: TokenKind::Colon, .. }) => {
                return Err(SyntaxError::parse("rule syntax is not allowed in a query", line, col));
            }
            Some(Token { kind: TokenKind::Dot, .. }) => {
                return Err(SyntaxError::parse("query must end with `?`, not `.`", line, col));
            }
            _ => return Err(SyntaxError::parse("expected `,` or `?`", line, col)),
        }
    }
    if let Some(t) = ts.peek() {
        return Err(SyntaxError::parse("trailing input after `?`", t.line, t.col));
    }
    Ok(Query { goals, nvars: scope.count })
}

fn parse_clause(ts: &mut Tokens) -> Result<Clause, SyntaxError> {
    let mut scope = VarScope::new();
    let (line, col) = ts.here();
    if matches!(ts.peek().map(|t| &t.kind), Some(TokenKind::Dot | TokenKind::QMark)) {
        return Err(SyntaxError::parse("empty sentence", line, col));
    }
    if let Some(Token { kind: TokenKind::Prefix(_), line, col }) = ts.peek() {
        return Err(SyntaxError::parse("prefix sigil is not allowed in a clause head", *line, *col));
    }
    let head = parse_goal_term(ts, &mut scope)?;
    let mut body = Vec::new();
    let (line, col) = ts.here();
    match ts.next() {
        Some(Token { kind: TokenKind::Dot, .. }) => {}
        Some(Token { kind: TokenKind::Colon, .. }) => {
            body.push(parse_goal(ts, &mut scope)?);
            loop {
                let (line, col) = ts.here();
                match ts.next() {
                    Some(Token { kind: TokenKind::Comma, .. }) => {
                        body.push(parse_goal(ts, &mut scope)?);
                    }
                    Some(Token { kind: TokenKind::Dot, .. }) => break,
                    Some(Token { kind: TokenKind::QMark, .. }) => {
                        return Err(SyntaxError::parse(
                            "query terminator in a program sentence",
                            line,
                            col,
                        ));
                    }
                    _ => return Err(SyntaxError::parse("expected `,` or `.`", line, col)),
                }
            }
        }
        Some(Token { kind: TokenKind::QMark, .. }) => {
            return Err(SyntaxError::parse("query terminator in a program sentence", line, col));
        }
        _ => return Err(SyntaxError::parse("expected `:` or `.`", line, col)),
    }
    Ok(Clause { head, body, nvars: scope.count })
}

fn parse_goal(ts: &mut Tokens, scope: &mut VarScope) -> Result<Goal, SyntaxError> {
    let tag = match ts.peek() {
        Some(Token { kind: TokenKind::Prefix(tag), .. }) => {
            let tag = *tag;
            ts.next();
            tag
        }
        _ => GoalTag::Plain,
    };
    let (line, col) = ts.here();
    let term = parse_goal_term(ts, scope)?;
    if matches!(tag, GoalTag::Fun | GoalTag::Gen) {
        let len = match &term {
            Term::Tup(items) => items.len(),
            _ => 0,
        };
        if len < 2 {
            return Err(SyntaxError::parse(
                "function and generator goals need a result argument",
                line,
                col,
            ));
        }
    }
    Ok(Goal { tag, term })
}

/// A run of words forming one goal (or head): always a tuple of its words.
fn parse_goal_term(ts: &mut Tokens, scope: &mut VarScope) -> Result<Term, SyntaxError> {
    let mut items = Vec::new();
    while let Some(t) = ts.peek() {
        match t.kind {
            TokenKind::Dot | TokenKind::QMark | TokenKind::Comma | TokenKind::Colon => break,
            TokenKind::Prefix(_) => {
                return Err(SyntaxError::parse("prefix sigil inside a goal", t.line, t.col));
            }
            _ => items.push(parse_word(ts, scope)?),
        }
    }
    let (line, col) = ts.here();
    if items.is_empty() {
        return Err(SyntaxError::parse("expected a goal", line, col));
    }
    Ok(Term::tup(items))
}

fn parse_word(ts: &mut Tokens, scope: &mut VarScope) -> Result<Term, SyntaxError> {
    let (line, col) = ts.here();
    let tok = ts.next().ok_or_else(|| SyntaxError::parse("unexpected end of input", line, col))?;
    match tok.kind {
        TokenKind::Word(w) => Ok(Term::sym(w)),
        TokenKind::Var(name) => Ok(Term::Var(scope.index_of(&name))),
        TokenKind::Int(n) => Ok(Term::Int(n)),
        TokenKind::Real(x) => Ok(Term::Real(x)),
        TokenKind::Str(s) => Ok(Term::str(s)),
        TokenKind::LParen => {
            let mut items = Vec::new();
            loop {
                match ts.peek() {
                    Some(Token { kind: TokenKind::RParen, .. }) => {
                        ts.next();
                        return Ok(Term::tup(items));
                    }
                    Some(Token {
                        kind:
                            TokenKind::Comma
                            | TokenKind::Colon
                            | TokenKind::Dot
                            | TokenKind::QMark
                            | TokenKind::Prefix(_),
                        line,
                        col,
                    }) => {
                        return Err(SyntaxError::parse(
                            "unexpected punctuation inside a tuple",
                            *line,
                            *col,
                        ));
                    }
                    Some(_) => items.push(parse_word(ts, scope)?),
                    None => {
                        return Err(SyntaxError::parse("unbalanced parenthesis", tok.line, tok.col));
                    }
                }
            }
        }
        TokenKind::RParen => Err(SyntaxError::parse("unbalanced parenthesis", tok.line, tok.col)),
        _ => Err(SyntaxError::parse("unexpected token", tok.line, tok.col)),
    }
}

/// Renders a clause back to surface text. Reparsing the result gives a
/// structurally identical clause.
pub fn render_clause(c: &Clause) -> String {
    let mut out = String::new();
    render_words(&mut out, &c.head);
    if !c.body.is_empty() {
        out.push_str(" : ");
        for (i, g) in c.body.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&render_goal(g));
        }
    }
    out.push('.');
    out
}

/// Renders a goal with its sigil in surface syntax.
pub fn render_goal(g: &Goal) -> String {
    let mut out = String::from(g.tag.sigil());
    render_words(&mut out, &g.term);
    out
}

/// Goal level: words space-separated without the outer parentheses.
fn render_words(out: &mut String, term: &Term) {
    match term {
        Term::Tup(items) if !items.is_empty() => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                render_surface(out, item);
            }
        }
        other => render_surface(out, other),
    }
}

fn render_surface(out: &mut String, term: &Term) {
    match term {
        Term::Var(i) => {
            let _ = write!(out, "V{i}");
        }
        Term::Sym(s) => {
            if plain_word(s) {
                out.push_str(s);
            } else {
                let _ = write!(out, "'{s}'");
            }
        }
        Term::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Real(x) => {
            let _ = write!(out, "{x:?}");
        }
        Term::Str(s) => {
            let _ = write!(out, "\"{s}\"");
        }
        Term::Tup(items) => {
            out.push('(');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                render_surface(out, item);
            }
            out.push(')');
        }
    }
}

/// True when a symbol reparses as itself without quoting.
fn plain_word(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else { return false };
    if first.is_uppercase() || first == '_' || first.is_ascii_digit() {
        return false;
    }
    if first == '-' && s[1..].starts_with(|c: char| c.is_ascii_digit()) {
        return false;
    }
    let delims = ['(', ')', ',', ':', '.', '?', '%', '\'', '"', '#', '`', '^', '~'];
    s.chars().all(|c| !c.is_whitespace() && !c.is_control() && !delims.contains(&c))
}
