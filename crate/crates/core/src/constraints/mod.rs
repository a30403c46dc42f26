//! The OCL-style well-formedness constraint language: parsing, static
//! checking and evaluation over a model.

mod ast;
mod eval;
mod parser;
mod typeck;

use thiserror::Error;

pub use ast::{BinOp, CollectionOp, ConstraintExpr, Expr, Literal, NavOp};
pub use eval::{eval_all, eval_constraint, ConstraintResult, EvalError, Evaluation, Violation, Witness};
pub use typeck::type_check;

use crate::meta_core::Metamodel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("type error: {0}")]
    Type(String),
}

/// Parses constraint text and checks value kinds without a metamodel.
pub fn parse_constraint(text: &str) -> Result<ConstraintExpr, ConstraintError> {
    let expr = parser::parse(text)?;
    type_check(&expr, None)?;
    Ok(expr)
}

/// Parses constraint text and checks it against the classes, associations
/// and attributes of `mm`.
pub fn parse_constraint_in(text: &str, mm: &Metamodel) -> Result<ConstraintExpr, ConstraintError> {
    let expr = parser::parse(text)?;
    type_check(&expr, Some(mm))?;
    Ok(expr)
}
