//! Tokenizer and recursive-descent parser for constraint text.
//!
//! ```text
//! constraint := Ident '.' expr
//! expr       := or ('implies' or)*
//! or         := and ('or' and)*
//! and        := cmp ('and' cmp)*
//! cmp        := unary (('=' | '<>' | '<' | '<=' | '>' | '>=') unary)*
//! unary      := 'not' unary | '-' number | postfix
//! postfix    := primary ('.' Ident ['(' args ')'] | '->' Ident '(' [Ident '|' expr] ')')*
//! primary    := literal | 'self' | Ident ['(' args ')'] | '(' expr ')'
//! ```

use super::ast::{BinOp, CollectionOp, ConstraintExpr, Expr, Literal, NavOp, KEYWORDS};
use super::ConstraintError;
use crate::text;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Number(String),
    Dot,
    Arrow,
    LParen,
    RParen,
    Pipe,
    Comma,
    Minus,
    Op(BinOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Str(s) => text::quote(s),
            Tok::Number(n) => n.clone(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Comma => "','".into(),
            Tok::Minus => "'-'".into(),
            Tok::Op(op) => format!("'{}'", op.symbol()),
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

fn tokenize(src: &str) -> Result<Vec<Spanned>, ConstraintError> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let column = src[line_start..i].chars().count() + 1;
        let err = |message: String| ConstraintError::Syntax { line, column, message };
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = match c {
            b'.' => (Tok::Dot, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'|' => (Tok::Pipe, 1),
            b',' => (Tok::Comma, 1),
            b'=' => (Tok::Op(BinOp::Eq), 1),
            b'-' if bytes.get(i + 1) == Some(&b'>') => (Tok::Arrow, 2),
            b'-' => (Tok::Minus, 1),
            b'<' if bytes.get(i + 1) == Some(&b'>') => (Tok::Op(BinOp::Ne), 2),
            b'<' if bytes.get(i + 1) == Some(&b'=') => (Tok::Op(BinOp::Le), 2),
            b'<' => (Tok::Op(BinOp::Lt), 1),
            b'>' if bytes.get(i + 1) == Some(&b'=') => (Tok::Op(BinOp::Ge), 2),
            b'>' => (Tok::Op(BinOp::Gt), 1),
            b'"' => {
                let (s, used) = text::read_string_body(&src[i + 1..]).map_err(|(_, m)| err(m))?;
                // strings may span lines
                for (k, ch) in src[i + 1..i + 1 + used].char_indices() {
                    if ch == '\n' {
                        line += 1;
                        line_start = i + 1 + k + 1;
                    }
                }
                (Tok::Str(s), used + 1)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                // a fraction needs a digit after the dot so `x.1` style chains stay unambiguous
                if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                (Tok::Number(src[i..j].to_string()), j - i)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &src[i..j];
                let tok = match word {
                    "and" => Tok::Op(BinOp::And),
                    "or" => Tok::Op(BinOp::Or),
                    "implies" => Tok::Op(BinOp::Implies),
                    _ => Tok::Ident(word.to_string()),
                };
                (tok, j - i)
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(format!("unexpected character '{ch}'")));
            }
        };
        toks.push(Spanned { tok, line, column });
        i += len;
    }
    let column = src[line_start..].chars().count() + 1;
    toks.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<String>,
}

type PResult<T> = Result<T, ConstraintError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ConstraintError::Syntax {
            line: s.line,
            column: s.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            ))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn constraint(&mut self) -> PResult<ConstraintExpr> {
        let context = self.ident("context class name")?;
        if KEYWORDS.contains(&context.as_str()) {
            return self.error(format!("'{context}' cannot name a context class"));
        }
        self.expect(Tok::Dot)?;
        let body = self.expr()?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", self.peek().describe()));
        }
        Ok(ConstraintExpr { context, body })
    }

    fn binary_level(&mut self, level: u8) -> PResult<Expr> {
        if level > 4 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Op(op) if op.precedence() == level => *op,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary_level(1)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Ident(s) if s == "not" => {
                self.bump();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Number(n) => self.number(&format!("-{n}")),
                    _ => {
                        self.pos -= 1;
                        self.error("expected a number after '-'")
                    }
                }
            }
            _ => self.postfix(),
        }
    }

    fn number(&self, text: &str) -> PResult<Expr> {
        if text.contains(['.', 'e', 'E']) {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Expr::Literal(Literal::Real(x))),
                _ => self.error(format!("real literal {text} out of range")),
            }
        } else {
            match text.parse::<i64>() {
                Ok(i) => Ok(Expr::Literal(Literal::Integer(i))),
                Err(_) => self.error(format!("integer literal {text} out of range")),
            }
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let name = self.ident("attribute or operation name")?;
                    if *self.peek() == Tok::LParen {
                        let op = self.nav_call(&name)?;
                        e = Expr::Nav {
                            receiver: Box::new(e),
                            op,
                        };
                    } else {
                        e = Expr::Attribute {
                            receiver: Box::new(e),
                            name,
                        };
                    }
                }
                Tok::Arrow => {
                    self.bump();
                    let name = self.ident("collection operation")?;
                    let op = self.collection_call(&name)?;
                    e = Expr::Collection {
                        receiver: Box::new(e),
                        op,
                    };
                }
                _ => return Ok(e),
            }
        }
    }

    fn nav_call(&mut self, name: &str) -> PResult<NavOp> {
        self.expect(Tok::LParen)?;
        let op = match name {
            "attachingConnections" => NavOp::AttachingConnections(self.name_arg("association name")?),
            "connectionPoints" => NavOp::ConnectionPoints(self.name_arg("role name")?),
            "target" => NavOp::Target,
            "parent" => NavOp::Parent,
            "forAll" | "exists" | "theOnly" | "size" => {
                self.pos -= 1;
                return self.error(format!("collection operation '{name}' must be applied with '->'"));
            }
            other => {
                self.pos -= 1;
                return self.error(format!("unknown operation '{other}'"));
            }
        };
        self.expect(Tok::RParen)?;
        Ok(op)
    }

    fn name_arg(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn collection_call(&mut self, name: &str) -> PResult<CollectionOp> {
        self.expect(Tok::LParen)?;
        let op = match name {
            "forAll" | "exists" => {
                let var = self.ident("iterator variable")?;
                if KEYWORDS.contains(&var.as_str()) {
                    self.pos -= 1;
                    return self.error(format!("'{var}' cannot be an iterator variable"));
                }
                self.expect(Tok::Pipe)?;
                self.scope.push(var.clone());
                let body = Box::new(self.expr()?);
                self.scope.pop();
                if name == "forAll" {
                    CollectionOp::ForAll { var, body }
                } else {
                    CollectionOp::Exists { var, body }
                }
            }
            "theOnly" => CollectionOp::TheOnly,
            "size" => CollectionOp::Size,
            other => {
                self.pos -= 1;
                return self.error(format!("unknown collection operation '{other}'"));
            }
        };
        self.expect(Tok::RParen)?;
        Ok(op)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Literal(Literal::String(s)))
            }
            Tok::Number(n) => {
                self.bump();
                self.number(&n)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(word) => match word.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Literal(Literal::Boolean(word == "true")))
                }
                "self" => {
                    self.bump();
                    Ok(Expr::SelfRef)
                }
                "not" => self.error("unexpected 'not'"),
                _ => {
                    self.bump();
                    if *self.peek_at(0) == Tok::LParen {
                        let op = self.nav_call(&word)?;
                        Ok(Expr::Nav {
                            receiver: Box::new(Expr::SelfRef),
                            op,
                        })
                    } else if self.scope.contains(&word) {
                        Ok(Expr::Var(word))
                    } else {
                        Ok(Expr::Attribute {
                            receiver: Box::new(Expr::SelfRef),
                            name: word,
                        })
                    }
                }
            },
            other => self.error(format!("unexpected {}", other.describe())),
        }
    }
}

/// Parses constraint text without consulting a metamodel.
pub fn parse(src: &str) -> Result<ConstraintExpr, ConstraintError> {
    let toks = tokenize(src)?;
    Parser {
        toks,
        pos: 0,
        scope: Vec::new(),
    }
    .constraint()
}
