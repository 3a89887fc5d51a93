//! Tokenizer. Words are split on whitespace and on the structural
//! characters `( ) , : . ?`; the prefix sigils `#`, `` ` ``, ```` `` ````,
//! `^` and `~` are standalone tokens whether or not whitespace follows them.

use super::SyntaxError;
use crate::syntax::parser::GoalTag;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    /// Constant word, plain or single-quoted.
    Word(String),
    /// Capitalized or `_`-initial word.
    Var(String),
    Int(i64),
    Real(f64),
    /// Double-quoted string constant.
    Str(String),
    LParen,
    RParen,
    Colon,
    Comma,
    Dot,
    QMark,
    /// Goal prefix sigil; attaches to the goal that follows.
    Prefix(GoalTag),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

/// Characters that terminate a word and stand for themselves.
fn is_delimiter(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | ':' | '.' | '?' | '%' | '\'' | '"' | '#' | '`' | '^' | '~')
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !is_delimiter(c) && !c.is_control()
}

struct Scanner<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner { src, chars: src.chars().peekable(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits source text into tokens. Every position of the input belongs to
/// exactly one token, comment or whitespace span.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut s = Scanner::new(src);
    let mut out = Vec::new();

    while let Some(c) = s.peek() {
        let (line, col) = (s.line, s.col);
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        if c == '%' {
            while let Some(c) = s.bump() {
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        let kind = match c {
            '(' => {
                s.bump();
                TokenKind::LParen
            }
            ')' => {
                s.bump();
                TokenKind::RParen
            }
            ',' => {
                s.bump();
                TokenKind::Comma
            }
            ':' => {
                s.bump();
                TokenKind::Colon
            }
            '.' => {
                s.bump();
                TokenKind::Dot
            }
            '?' => {
                s.bump();
                TokenKind::QMark
            }
            '#' => {
                s.bump();
                TokenKind::Prefix(GoalTag::Action)
            }
            '^' => {
                s.bump();
                TokenKind::Prefix(GoalTag::Yield)
            }
            '~' => {
                s.bump();
                TokenKind::Prefix(GoalTag::Db)
            }
            '`' => {
                s.bump();
                if s.peek() == Some('`') {
                    s.bump();
                    TokenKind::Prefix(GoalTag::Gen)
                } else {
                    TokenKind::Prefix(GoalTag::Fun)
                }
            }
            '\'' => scan_quoted(&mut s, '\'', line, col)?,
            '"' => scan_quoted(&mut s, '"', line, col)?,
            c if c.is_ascii_digit() => scan_number(&mut s, line, col)?,
            '-' if s.peek2().is_some_and(|c| c.is_ascii_digit()) => scan_number(&mut s, line, col)?,
            c if is_word_char(c) => scan_word(&mut s),
            c => {
                return Err(SyntaxError::lex(format!("illegal character {c:?}"), line, col));
            }
        };
        out.push(Token { kind, line, col });
    }
    Ok(out)
}

fn scan_quoted(s: &mut Scanner, quote: char, line: usize, col: usize) -> Result<TokenKind, SyntaxError> {
    s.bump(); // opening quote
    let mut text = String::new();
    loop {
        match s.bump() {
            Some(c) if c == quote => break,
            Some(c) => text.push(c),
            None => return Err(SyntaxError::lex("unterminated quote", line, col)),
        }
    }
    Ok(if quote == '\'' { TokenKind::Word(text) } else { TokenKind::Str(text) })
}

fn scan_word(s: &mut Scanner) -> TokenKind {
    let mut word = String::new();
    while let Some(c) = s.peek() {
        if !is_word_char(c) {
            break;
        }
        word.push(c);
        s.bump();
    }
    let first = word.chars().next().expect("word is nonempty");
    if first == '_' || first.is_uppercase() {
        TokenKind::Var(word)
    } else {
        TokenKind::Word(word)
    }
}

fn scan_number(s: &mut Scanner, line: usize, col: usize) -> Result<TokenKind, SyntaxError> {
    let mut text = String::new();
    if s.peek() == Some('-') {
        text.push('-');
        s.bump();
    }
    let mut is_real = false;
    while s.peek().is_some_and(|c| c.is_ascii_digit()) {
        text.push(s.bump().unwrap());
    }
    // Fractional part only when a digit follows the dot, so `5.` stays
    // an integer followed by a sentence terminator.
    if s.peek() == Some('.') && s.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_real = true;
        text.push(s.bump().unwrap());
        while s.peek().is_some_and(|c| c.is_ascii_digit()) {
            text.push(s.bump().unwrap());
        }
    }
    if matches!(s.peek(), Some('e' | 'E')) {
        let after = s.peek2();
        let exp_ok = match after {
            Some(c) if c.is_ascii_digit() => true,
            Some('+' | '-') => {
                let mut it = s.src[s.pos..].chars();
                it.next();
                it.next();
                it.next().is_some_and(|c| c.is_ascii_digit())
            }
            _ => false,
        };
        if exp_ok {
            is_real = true;
            text.push(s.bump().unwrap());
            if matches!(s.peek(), Some('+' | '-')) {
                text.push(s.bump().unwrap());
            }
            while s.peek().is_some_and(|c| c.is_ascii_digit()) {
                text.push(s.bump().unwrap());
            }
        }
    }
    if s.peek().is_some_and(is_word_char) {
        return Err(SyntaxError::lex(
            format!("malformed number starting at {text:?}"),
            line,
            col,
        ));
    }
    if is_real {
        let value: f64 = text
            .parse()
            .map_err(|_| SyntaxError::lex(format!("bad real literal {text:?}"), line, col))?;
        Ok(TokenKind::Real(value))
    } else {
        match text.parse::<i64>() {
            Ok(n) => Ok(TokenKind::Int(n)),
            // Out-of-range integers degrade to reals.
            Err(_) => text
                .parse::<f64>()
                .map(TokenKind::Real)
                .map_err(|_| SyntaxError::lex(format!("bad number literal {text:?}"), line, col)),
        }
    }
}
