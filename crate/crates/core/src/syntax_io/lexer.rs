//! Tokenizer shared by the metamodel, model and equivalence formats.

use super::FormatError;
use crate::text;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Real(f64),
    /// `#n`
    EntityRef(u64),
    /// `@n`
    LinkRef(u64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Str(s) => format!("string {}", text::quote(s)),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Real(x) => format!("real {}", text::format_real(*x)),
            Tok::EntityRef(n) => format!("'#{n}'"),
            Tok::LinkRef(n) => format!("'@{n}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const SYMBOLS: [&str; 15] = [
    "->", "..", "{", "}", "(", ")", "[", "]", ":", ";", ",", "=", "~", "*", ".",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

pub(crate) struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    pos: Pos,
    peeked: Option<(Tok, Pos)>,
}

pub(crate) type LResult<T> = Result<T, FormatError>;

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Lexer {
            src,
            offset: 0,
            pos: Pos { line: 1, column: 1 },
            peeked: None,
        }
    }

    pub(crate) fn error_at<T>(&self, pos: Pos, message: impl Into<String>) -> LResult<T> {
        Err(FormatError::Syntax {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        })
    }

    fn advance(&mut self, bytes: usize) {
        for c in self.src[self.offset..self.offset + bytes].chars() {
            if c == '\n' {
                self.pos.line += 1;
                self.pos.column = 1;
            } else {
                self.pos.column += 1;
            }
        }
        self.offset += bytes;
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = self.rest();
            let ws = rest.len() - rest.trim_start().len();
            if ws > 0 {
                self.advance(ws);
                continue;
            }
            if rest.starts_with("//") {
                let end = rest.find('\n').unwrap_or(rest.len());
                self.advance(end);
                continue;
            }
            break;
        }
    }

    fn lex(&mut self) -> LResult<(Tok, Pos)> {
        self.skip_trivia();
        let start = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::Eof, start));
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            let word = rest[..len].to_string();
            self.advance(len);
            return Ok((Tok::Ident(word), start));
        }
        if c == '"' {
            return match text::read_string_body(&rest[1..]) {
                Ok((s, used)) => {
                    self.advance(used + 1);
                    Ok((Tok::Str(s), start))
                }
                Err((at, msg)) => {
                    self.advance(1 + at.min(rest.len() - 1));
                    self.error_at(self.pos, msg)
                }
            };
        }
        if c == '#' || c == '@' {
            let digits = rest[1..].find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len() - 1);
            if digits == 0 {
                return self.error_at(start, format!("expected digits after '{c}'"));
            }
            let Ok(n) = rest[1..1 + digits].parse::<u64>() else {
                return self.error_at(start, "identifier number out of range");
            };
            self.advance(1 + digits);
            return Ok((if c == '#' { Tok::EntityRef(n) } else { Tok::LinkRef(n) }, start));
        }
        if c.is_ascii_digit() || (c == '-' && rest[1..].starts_with(|d: char| d.is_ascii_digit())) {
            return self.number(start);
        }
        for sym in SYMBOLS {
            if rest.starts_with(sym) {
                self.advance(sym.len());
                return Ok((Tok::Sym(sym), start));
            }
        }
        self.error_at(start, format!("unexpected character '{}'", c.escape_debug()))
    }

    fn number(&mut self, start: Pos) -> LResult<(Tok, Pos)> {
        let b = self.rest().as_bytes();
        let mut i = usize::from(b[0] == b'-');
        let digits = |i: &mut usize| {
            while *i < b.len() && b[*i].is_ascii_digit() {
                *i += 1;
            }
        };
        digits(&mut i);
        let mut real = false;
        // a '.' is a fraction only when a digit follows; `1..2` is a range
        if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
            real = true;
            i += 1;
            digits(&mut i);
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                real = true;
                i = j;
                digits(&mut i);
            }
        }
        let text = &self.rest()[..i];
        let tok = if real {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Tok::Real(x),
                _ => return self.error_at(start, format!("real literal {text} out of range")),
            }
        } else {
            match text.parse::<i64>() {
                Ok(n) => Tok::Int(n),
                Err(_) => return self.error_at(start, format!("integer literal {text} out of range")),
            }
        };
        self.advance(i);
        Ok((tok, start))
    }

    pub(crate) fn peek(&mut self) -> LResult<&Tok> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(&self.peeked.as_ref().expect("just filled").0)
    }

    pub(crate) fn peek_pos(&mut self) -> LResult<Pos> {
        self.peek()?;
        Ok(self.peeked.as_ref().expect("just filled").1)
    }

    pub(crate) fn next(&mut self) -> LResult<(Tok, Pos)> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    pub(crate) fn expect_sym(&mut self, sym: &str) -> LResult<Pos> {
        let (tok, pos) = self.next()?;
        if tok == Tok::Sym(sym_static(sym)) {
            Ok(pos)
        } else {
            self.error_at(pos, format!("expected '{sym}', found {}", tok.describe()))
        }
    }

    pub(crate) fn eat_sym(&mut self, sym: &str) -> LResult<bool> {
        if *self.peek()? == Tok::Sym(sym_static(sym)) {
            self.next()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> LResult<(String, Pos)> {
        match self.next()? {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => self.error_at(pos, format!("expected {what}, found {}", tok.describe())),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> LResult<Pos> {
        match self.next()? {
            (Tok::Ident(s), pos) if s == kw => Ok(pos),
            (tok, pos) => self.error_at(pos, format!("expected '{kw}', found {}", tok.describe())),
        }
    }

    pub(crate) fn string(&mut self, what: &str) -> LResult<String> {
        match self.next()? {
            (Tok::Str(s), _) => Ok(s),
            (tok, pos) => self.error_at(pos, format!("expected {what}, found {}", tok.describe())),
        }
    }

    /// An identifier or a quoted string.
    pub(crate) fn name(&mut self, what: &str) -> LResult<String> {
        match self.next()? {
            (Tok::Ident(s) | Tok::Str(s), _) => Ok(s),
            (tok, pos) => self.error_at(pos, format!("expected {what}, found {}", tok.describe())),
        }
    }

    pub(crate) fn uint(&mut self, what: &str) -> LResult<u64> {
        match self.next()? {
            (Tok::Int(n), _) if n >= 0 => Ok(n as u64),
            (tok, pos) => self.error_at(pos, format!("expected {what}, found {}", tok.describe())),
        }
    }

    pub(crate) fn entity_ref(&mut self) -> LResult<(u64, Pos)> {
        match self.next()? {
            (Tok::EntityRef(n), pos) => Ok((n, pos)),
            (tok, pos) => self.error_at(pos, format!("expected an entity id, found {}", tok.describe())),
        }
    }

    pub(crate) fn link_ref(&mut self) -> LResult<(u64, Pos)> {
        match self.next()? {
            (Tok::LinkRef(n), pos) => Ok((n, pos)),
            (tok, pos) => self.error_at(pos, format!("expected a link id, found {}", tok.describe())),
        }
    }

    /// Consumes raw text up to the `}` that closes the block just opened,
    /// skipping over string literals. Returns the text and where it starts.
    pub(crate) fn raw_until_close_brace(&mut self) -> LResult<(&'a str, Pos)> {
        debug_assert!(self.peeked.is_none());
        let start_offset = self.offset;
        let start = self.pos;
        let rest = self.rest();
        let mut depth = 0usize;
        let mut iter = rest.char_indices();
        while let Some((i, c)) = iter.next() {
            match c {
                '"' => match text::read_string_body(&rest[i + 1..]) {
                    Ok((_, used)) => {
                        let end = i + 1 + used;
                        while iter.clone().next().is_some_and(|(k, _)| k < end) {
                            iter.next();
                        }
                    }
                    Err((at, msg)) => {
                        self.advance(i + 1 + at);
                        return self.error_at(self.pos, msg);
                    }
                },
                '{' => depth += 1,
                '}' if depth == 0 => {
                    let body = &self.src[start_offset..start_offset + i];
                    self.advance(i + 1);
                    return Ok((body, start));
                }
                '}' => depth -= 1,
                _ => {}
            }
        }
        self.advance(rest.len());
        self.error_at(start, "unterminated block")
    }
}

fn sym_static(sym: &str) -> &'static str {
    SYMBOLS
        .iter()
        .find(|s| **s == sym)
        .copied()
        .expect("symbol is part of the token set")
}
