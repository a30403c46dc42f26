//! The `.eqv` format: one entry per line, `mode Left ~ Right as New`, with
//! `mode` one of `identity`, `interface` or `implementation`.

use super::lexer::{Lexer, Tok};
use super::FormatError;
use crate::merge::{EquivalenceEntry, EquivalenceMode, EquivalenceSpec};

pub fn parse_equivalence(src: &str) -> Result<EquivalenceSpec, FormatError> {
    let mut lx = Lexer::new(src);
    let mut entries = Vec::new();
    loop {
        let (tok, pos) = lx.next()?;
        let mode = match tok {
            Tok::Eof => return Ok(EquivalenceSpec { entries }),
            Tok::Ident(w) if w == "identity" => EquivalenceMode::Identity,
            Tok::Ident(w) if w == "interface" => EquivalenceMode::Interface,
            Tok::Ident(w) if w == "implementation" => EquivalenceMode::Implementation,
            other => {
                return lx.error_at(
                    pos,
                    format!(
                        "expected 'identity', 'interface' or 'implementation', found {}",
                        other.describe()
                    ),
                )
            }
        };
        let (left, _) = lx.ident("a left class name")?;
        lx.expect_sym("~")?;
        let (right, _) = lx.ident("a right class name")?;
        lx.keyword("as")?;
        let (new_name, _) = lx.ident("a merged class name")?;
        let next = lx.peek_pos()?;
        if next.line == pos.line && *lx.peek()? != Tok::Eof {
            return lx.error_at(next, "one entry per line");
        }
        entries.push(EquivalenceEntry::new(mode, &left, &right, &new_name));
    }
}

pub fn serialize_equivalence(spec: &EquivalenceSpec) -> String {
    spec.entries
        .iter()
        .map(|e| format!("{} {} ~ {} as {}\n", e.mode.keyword(), e.left, e.right, e.new_name))
        .collect()
}
