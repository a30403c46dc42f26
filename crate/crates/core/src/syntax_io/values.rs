//! Self-describing attribute literals: quoted strings, integers, reals with a
//! fraction or exponent, `true`/`false`, and enum literals written bare or as
//! `enum "text"` when they are not plain identifiers.

use super::lexer::{LResult, Lexer, Tok};
use super::FormatError;
use crate::meta_core::Value;
use crate::text;

/// Parses a single literal written as in a model file, e.g. `1.5`, `"x"` or
/// `enum "two words"`.
pub fn parse_value_literal(src: &str) -> Result<Value, FormatError> {
    let mut lx = Lexer::new(src);
    let v = parse_value(&mut lx)?;
    let (tok, pos) = lx.next()?;
    if tok != Tok::Eof {
        return lx.error_at(pos, format!("unexpected {} after the value", tok.describe()));
    }
    Ok(v)
}

/// The model-file spelling of `v`.
pub fn format_value_literal(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

pub(crate) fn parse_value(lx: &mut Lexer<'_>) -> LResult<Value> {
    let (tok, pos) = lx.next()?;
    Ok(match tok {
        Tok::Str(s) => Value::String(s),
        Tok::Int(i) => Value::Integer(i),
        Tok::Real(x) => Value::Real(x),
        Tok::Ident(w) if w == "true" => Value::Boolean(true),
        Tok::Ident(w) if w == "false" => Value::Boolean(false),
        Tok::Ident(w) if w == "enum" && matches!(lx.peek()?, Tok::Str(_)) => Value::Enum(lx.string("an enum literal")?),
        Tok::Ident(w) => Value::Enum(w),
        other => return lx.error_at(pos, format!("expected a value, found {}", other.describe())),
    })
}

pub(crate) fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Enum(lit) if text::is_identifier(lit) && !matches!(lit.as_str(), "true" | "false" | "enum") => {
            out.push_str(lit)
        }
        Value::Enum(lit) => {
            out.push_str("enum ");
            out.push_str(&text::quote(lit));
        }
        other => out.push_str(&other.to_string()),
    }
}
