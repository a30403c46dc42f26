//! Textual formats: `.mm` metamodels, `.mdl` models and `.eqv`
//! equivalence specs, plus the concrete-syntax lint.
//!
//! Every format starts with a header line naming what it holds; all
//! parsers report the line and column of the first problem.

mod equivalence;
mod lexer;
mod lint;
mod metamodel;
mod model;
mod values;

use thiserror::Error;

use crate::diagnostics::Diagnostics;

pub use equivalence::{parse_equivalence, serialize_equivalence};
pub use lint::{lint_syntax_overrides, GLYPH_KEY};
pub use metamodel::{parse_metamodel, parse_metamodel_unchecked, serialize_metamodel};
pub use model::{parse_model, parse_model_unchecked, serialize_model};
pub use values::{format_value_literal, parse_value_literal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{} validation error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Validation(Diagnostics),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("model conforms to {found} but the metamodel is {expected}")]
    MetamodelMismatch { expected: String, found: String },
    #[error("inconsistent model: {0}")]
    Corrupt(String),
}

/// Decodes UTF-8, reporting the position of the first invalid byte.
pub fn decode(bytes: &[u8]) -> Result<&str, FormatError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let valid = &bytes[..e.valid_up_to()];
        let line = valid.iter().filter(|b| **b == b'\n').count() + 1;
        let line_start = valid.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
        let column = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
        FormatError::Syntax {
            line,
            column,
            message: "invalid UTF-8".into(),
        }
    })
}
