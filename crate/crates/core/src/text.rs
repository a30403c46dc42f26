//! Small lexical helpers shared by the textual formats and the constraint printer.

use std::fmt::Write;

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Renders `s` as a double-quoted literal with escapes.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Formats a finite real so that it always lexes back as a real literal.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Reads the body of a string literal whose opening quote has already been
/// consumed. Returns the decoded string and the number of bytes consumed
/// (including the closing quote), or an error message with the byte offset
/// where decoding failed.
pub fn read_string_body(src: &str) -> Result<(String, usize), (usize, String)> {
    let mut out = String::new();
    let mut iter = src.char_indices();
    while let Some((i, c)) = iter.next() {
        match c {
            '"' => return Ok((out, i + 1)),
            '\\' => {
                let Some((j, e)) = iter.next() else {
                    return Err((i, "unterminated escape".into()));
                };
                match e {
                    '"' => out.push('"'),
                    '\\' => out.push('\\'),
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    'u' => {
                        let rest = &src[j + 1..];
                        if !rest.starts_with('{') {
                            return Err((j, "expected '{' after \\u".into()));
                        }
                        let Some(close) = rest.find('}') else {
                            return Err((j, "unterminated unicode escape".into()));
                        };
                        let hex = &rest[1..close];
                        let ch = u32::from_str_radix(hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| (j, format!("invalid unicode escape '{hex}'")))?;
                        out.push(ch);
                        // skip "{hex}"
                        for _ in 0..close + 1 {
                            iter.next();
                        }
                    }
                    other => return Err((j, format!("unknown escape '\\{other}'"))),
                }
            }
            c => out.push(c),
        }
    }
    Err((src.len(), "unterminated string literal".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quote_and_read_back() {
        for s in ["", "plain", "with \"quotes\"", "tab\tnew\nline\\", "\u{1}ctl", "ünï"] {
            let q = quote(s);
            let (back, used) = read_string_body(&q[1..]).unwrap();
            assert_eq!(back, s);
            assert_eq!(used, q.len() - 1);
        }
    }

    #[test]
    fn reals_keep_a_marker() {
        assert_eq!(format_real(1.0), "1.0");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(1e-7), "1e-7");
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("Port_2"));
        assert!(is_identifier("_x"));
        assert!(!is_identifier("2x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }
}
