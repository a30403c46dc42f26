//! Diagnostics shared by metamodel validation, conformance checking and linting.

use std::fmt;

use crate::model_store::{EntityId, LinkId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Machine-readable classification of a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagCode {
    // metamodel well-formedness
    SpecializationCycle,
    UnresolvedName,
    DuplicateName,
    InvalidMultiplicity,
    AttributeConflict,
    InvalidDefault,
    InvalidEnum,
    AssociationArity,
    InvalidConstraint,
    // model conformance
    UnknownClass,
    AbstractInstance,
    UnknownAttribute,
    AttributeType,
    IllegalContainment,
    ContainmentMultiplicity,
    UnknownAssociation,
    RoleMismatch,
    DanglingReference,
    RoleMultiplicity,
    ConstraintViolation,
    // lint
    GlyphOverride,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::SpecializationCycle => "specialization-cycle",
            DiagCode::UnresolvedName => "unresolved-name",
            DiagCode::DuplicateName => "duplicate-name",
            DiagCode::InvalidMultiplicity => "invalid-multiplicity",
            DiagCode::AttributeConflict => "attribute-conflict",
            DiagCode::InvalidDefault => "invalid-default",
            DiagCode::InvalidEnum => "invalid-enum",
            DiagCode::AssociationArity => "association-arity",
            DiagCode::InvalidConstraint => "invalid-constraint",
            DiagCode::UnknownClass => "unknown-class",
            DiagCode::AbstractInstance => "abstract-instance",
            DiagCode::UnknownAttribute => "unknown-attribute",
            DiagCode::AttributeType => "attribute-type",
            DiagCode::IllegalContainment => "illegal-containment",
            DiagCode::ContainmentMultiplicity => "containment-multiplicity",
            DiagCode::UnknownAssociation => "unknown-association",
            DiagCode::RoleMismatch => "role-mismatch",
            DiagCode::DanglingReference => "dangling-reference",
            DiagCode::RoleMultiplicity => "role-multiplicity",
            DiagCode::ConstraintViolation => "constraint-violation",
            DiagCode::GlyphOverride => "glyph-override",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The element a diagnostic is attached to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Metamodel,
    Class(String),
    Attribute { class: String, attribute: String },
    Association(String),
    Constraint(String),
    Entity(EntityId),
    Link(LinkId),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Metamodel => f.write_str("metamodel"),
            Location::Class(c) => write!(f, "class {c}"),
            Location::Attribute { class, attribute } => write!(f, "attribute {class}.{attribute}"),
            Location::Association(a) => write!(f, "association {a}"),
            Location::Constraint(c) => write!(f, "constraint {c}"),
            Location::Entity(id) => write!(f, "{id}"),
            Location::Link(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            location,
            message: message.into(),
        }
    }

    pub fn warning(code: DiagCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            location,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}] {}: {}",
            self.severity, self.code, self.location, self.message
        )
    }
}

pub type Diagnostics = Vec<Diagnostic>;
