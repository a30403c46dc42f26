//! The `.mm` format.
//!
//! ```text
//! metamodel SignalFlow version 1
//! abstract class Port {
//!   attr label: string = "";
//! }
//! class OutPort {
//!   extends Port;
//! }
//! class Component {
//!   attr gain: real = 1.0;
//!   contains Port [0..*];
//!   glyph "block";
//! }
//! association BufferedConnection {
//!   role src: Port [0..*];
//!   role dst: Port [0..*];
//! }
//! constraint NoSiblingOutputs {
//!   OutPort.attachingConnections(BufferedConnection)->size() = 0
//! }
//! ```

use std::fmt::Write as _;

use super::lexer::{LResult, Lexer, Pos, Tok};
use super::values::{parse_value, write_value};
use super::FormatError;
use crate::constraints::{self, ConstraintError};
use crate::diagnostics::Severity;
use crate::meta_core::{
    AssociationDef, AttributeDef, ConstraintDef, ContainmentRule, InheritanceKind, MetaClass, Metamodel, Multiplicity,
    RoleDef, SuperRef, Value, ValueType,
};
use crate::text;

/// Parses and validates a metamodel.
pub fn parse_metamodel(src: &str) -> Result<Metamodel, FormatError> {
    let mm = parse_metamodel_unchecked(src)?;
    let errors: Vec<_> = mm
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(mm)
    } else {
        Err(FormatError::Validation(errors))
    }
}

/// Parses a metamodel without checking its well-formedness.
pub fn parse_metamodel_unchecked(src: &str) -> Result<Metamodel, FormatError> {
    let mut lx = Lexer::new(src);
    lx.keyword("metamodel")?;
    let (name, _) = lx.ident("a metamodel name")?;
    lx.keyword("version")?;
    let version = lx.uint("a version number")?;
    let mut mm = Metamodel::new(name, version);
    loop {
        let (tok, pos) = lx.next()?;
        match tok {
            Tok::Eof => return Ok(mm),
            Tok::Ident(kw) if kw == "class" => class(&mut lx, &mut mm, false, pos)?,
            Tok::Ident(kw) if kw == "abstract" => {
                let pos = lx.keyword("class")?;
                class(&mut lx, &mut mm, true, pos)?
            }
            Tok::Ident(kw) if kw == "association" => association(&mut lx, &mut mm)?,
            Tok::Ident(kw) if kw == "constraint" => constraint(&mut lx, &mut mm)?,
            other => {
                return lx.error_at(
                    pos,
                    format!(
                        "expected 'class', 'association' or 'constraint', found {}",
                        other.describe()
                    ),
                )
            }
        }
    }
}

fn class(lx: &mut Lexer<'_>, mm: &mut Metamodel, is_abstract: bool, pos: Pos) -> LResult<()> {
    let (name, _) = lx.ident("a class name")?;
    let mut cls = MetaClass::new(name);
    cls.is_abstract = is_abstract;
    lx.expect_sym("{")?;
    loop {
        let (tok, at) = lx.next()?;
        let kw = match tok {
            Tok::Sym("}") => break,
            Tok::Ident(kw) => kw,
            other => return lx.error_at(at, format!("expected a class member, found {}", other.describe())),
        };
        match kw.as_str() {
            "attr" => {
                let (attr, _) = lx.ident("an attribute name")?;
                lx.expect_sym(":")?;
                let ty = value_type(lx)?;
                let default = if lx.eat_sym("=")? {
                    let vpos = lx.peek_pos()?;
                    let v = parse_value(lx)?;
                    coerce(v, &ty)
                        .or_else(|v| lx.error_at(vpos, format!("default {} does not match type {ty}", v.kind_name())))?
                } else {
                    ty.zero()
                };
                cls.attributes.push(AttributeDef::new(attr, ty, default));
            }
            "extends" => {
                let (first, _) = lx.ident("a superclass name")?;
                let kind = match first.as_str() {
                    "interface" => InheritanceKind::Interface,
                    "implementation" => InheritanceKind::Implementation,
                    _ => InheritanceKind::Full,
                };
                let sup = if kind != InheritanceKind::Full && matches!(lx.peek()?, Tok::Ident(_)) {
                    SuperRef {
                        name: lx.ident("a superclass name")?.0,
                        kind,
                    }
                } else {
                    SuperRef::full(first)
                };
                cls.superclasses.push(sup);
            }
            "contains" => {
                let (child, _) = lx.ident("a class name")?;
                let multiplicity = optional_multiplicity(lx)?;
                cls.containments.push(ContainmentRule { child, multiplicity });
            }
            "glyph" => {
                if cls.glyph.is_some() {
                    return lx.error_at(at, "glyph given twice");
                }
                cls.glyph = Some(lx.string("a glyph string")?);
            }
            "aspect" => cls.aspects.push(lx.string("an aspect name")?),
            other => return lx.error_at(at, format!("unknown class member '{other}'")),
        }
        lx.expect_sym(";")?;
    }
    mm.add_class(cls).or_else(|e| lx.error_at(pos, e.to_string()))
}

/// Converts a literal to the declared type where the text form is
/// ambiguous: integers for reals, strings and booleans for enum literals.
fn coerce(v: Value, ty: &ValueType) -> Result<Value, Value> {
    match (v, ty) {
        (Value::Integer(i), ValueType::Real) => Ok(Value::Real(i as f64)),
        (Value::String(s), ValueType::Enum(_)) => Ok(Value::Enum(s)),
        (Value::Boolean(b), ValueType::Enum(_)) => Ok(Value::Enum(b.to_string())),
        // membership is left to validation
        (v, ty) if v.kind_name() == ty.zero().kind_name() => Ok(v),
        (v, _) => Err(v),
    }
}

fn value_type(lx: &mut Lexer<'_>) -> LResult<ValueType> {
    let (name, pos) = lx.ident("a type")?;
    Ok(match name.as_str() {
        "string" => ValueType::String,
        "integer" => ValueType::Integer,
        "real" => ValueType::Real,
        "boolean" => ValueType::Boolean,
        "enum" => {
            lx.expect_sym("(")?;
            let mut lits = Vec::new();
            if !lx.eat_sym(")")? {
                loop {
                    lits.push(lx.name("an enum literal")?);
                    if lx.eat_sym(")")? {
                        break;
                    }
                    lx.expect_sym(",")?;
                }
            }
            ValueType::Enum(lits)
        }
        other => return lx.error_at(pos, format!("unknown type '{other}'")),
    })
}

fn optional_multiplicity(lx: &mut Lexer<'_>) -> LResult<Multiplicity> {
    if *lx.peek()? != Tok::Sym("[") {
        return Ok(Multiplicity::ANY);
    }
    lx.expect_sym("[")?;
    let min = bound(lx)?;
    lx.expect_sym("..")?;
    let max = if lx.eat_sym("*")? { None } else { Some(bound(lx)?) };
    lx.expect_sym("]")?;
    Ok(Multiplicity::new(min, max))
}

fn bound(lx: &mut Lexer<'_>) -> LResult<u32> {
    let pos = lx.peek_pos()?;
    let n = lx.uint("a multiplicity bound")?;
    u32::try_from(n).or_else(|_| lx.error_at(pos, format!("multiplicity bound {n} out of range")))
}

fn association(lx: &mut Lexer<'_>, mm: &mut Metamodel) -> LResult<()> {
    let (name, pos) = lx.ident("an association name")?;
    lx.expect_sym("{")?;
    let mut roles = Vec::new();
    while !lx.eat_sym("}")? {
        lx.keyword("role")?;
        let (role, _) = lx.ident("a role name")?;
        lx.expect_sym(":")?;
        let (endpoint, _) = lx.ident("a class name")?;
        let multiplicity = optional_multiplicity(lx)?;
        lx.expect_sym(";")?;
        roles.push(RoleDef::new(role, endpoint, multiplicity));
    }
    mm.add_association(AssociationDef::new(name, roles))
        .or_else(|e| lx.error_at(pos, e.to_string()))
}

fn constraint(lx: &mut Lexer<'_>, mm: &mut Metamodel) -> LResult<()> {
    let (name, pos) = lx.ident("a constraint name")?;
    lx.expect_sym("{")?;
    let (body, start) = lx.raw_until_close_brace()?;
    let expr = constraints::parse_constraint(body).or_else(|e| match e {
        ConstraintError::Syntax { line, column, message } => {
            let column = if line == 1 { start.column + column - 1 } else { column };
            lx.error_at(
                Pos {
                    line: start.line + line - 1,
                    column,
                },
                format!("in constraint {name}: {message}"),
            )
        }
        ConstraintError::Type(message) => lx.error_at(start, format!("in constraint {name}: {message}")),
    })?;
    mm.add_constraint(ConstraintDef::new(name, expr))
        .or_else(|e| lx.error_at(pos, e.to_string()))
}

fn write_multiplicity(out: &mut String, m: Multiplicity) {
    let _ = write!(out, "{m}");
}

fn write_type(out: &mut String, ty: &ValueType) {
    match ty {
        ValueType::Enum(lits) => {
            out.push_str("enum(");
            for (i, lit) in lits.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if text::is_identifier(lit) {
                    out.push_str(lit);
                } else {
                    out.push_str(&text::quote(lit));
                }
            }
            out.push(')');
        }
        other => {
            let _ = write!(out, "{other}");
        }
    }
}

/// Canonical text: declaration order, two-space indentation, explicit
/// multiplicities and defaults.
pub fn serialize_metamodel(mm: &Metamodel) -> String {
    let mut out = format!("metamodel {} version {}\n", mm.name, mm.version);
    for cls in mm.classes() {
        out.push('\n');
        if cls.is_abstract {
            out.push_str("abstract ");
        }
        let _ = writeln!(out, "class {} {{", cls.name);
        for sup in &cls.superclasses {
            let kind = match sup.kind {
                InheritanceKind::Full => "",
                InheritanceKind::Interface => "interface ",
                InheritanceKind::Implementation => "implementation ",
            };
            let _ = writeln!(out, "  extends {kind}{};", sup.name);
        }
        for attr in &cls.attributes {
            let _ = write!(out, "  attr {}: ", attr.name);
            write_type(&mut out, &attr.value_type);
            out.push_str(" = ");
            write_value(&mut out, &attr.default);
            out.push_str(";\n");
        }
        for rule in &cls.containments {
            let _ = write!(out, "  contains {} ", rule.child);
            write_multiplicity(&mut out, rule.multiplicity);
            out.push_str(";\n");
        }
        if let Some(g) = &cls.glyph {
            let _ = writeln!(out, "  glyph {};", text::quote(g));
        }
        for a in &cls.aspects {
            let _ = writeln!(out, "  aspect {};", text::quote(a));
        }
        out.push_str("}\n");
    }
    for assoc in mm.associations() {
        let _ = writeln!(out, "\nassociation {} {{", assoc.name);
        for role in &assoc.roles {
            let _ = write!(out, "  role {}: {} ", role.name, role.endpoint);
            write_multiplicity(&mut out, role.multiplicity);
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    for c in mm.constraints() {
        let _ = writeln!(out, "\nconstraint {} {{\n  {}\n}}", c.name, c.text());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta_core::fixtures::signal_flow;

    #[test]
    fn signal_flow_round_trips() {
        let mm = signal_flow();
        let text = serialize_metamodel(&mm);
        assert_eq!(parse_metamodel(&text).unwrap(), mm);
        assert_eq!(serialize_metamodel(&parse_metamodel(&text).unwrap()), text);
    }

    #[test]
    fn empty_metamodel_round_trips() {
        let mm = Metamodel::new("Empty", 3);
        assert_eq!(serialize_metamodel(&mm), "metamodel Empty version 3\n");
        assert_eq!(parse_metamodel(&serialize_metamodel(&mm)).unwrap(), mm);
    }

    #[test]
    fn omitted_parts_take_defaults() {
        let mm = parse_metamodel(
            "metamodel M version 1 class A { attr n: integer; attr k: enum(x, \"y z\") = \"y z\"; attr r: real = 2; contains A; }",
        )
        .unwrap();
        let a = mm.class("A").unwrap();
        assert_eq!(a.attributes[0].default, Value::Integer(0));
        assert_eq!(a.attributes[1].default, Value::Enum("y z".into()));
        assert_eq!(a.attributes[2].default, Value::Real(2.0));
        assert_eq!(a.containments[0].multiplicity, Multiplicity::ANY);
    }

    #[test]
    fn partial_inheritance_keywords() {
        let mm = parse_metamodel(
            "metamodel M version 1 class B {} class interface {} \
             class A { extends interface B; extends implementation B; extends interface; }",
        );
        // B listed twice is a validation error; the parse itself is fine
        assert!(matches!(mm, Err(FormatError::Validation(_))));
        let mm = parse_metamodel_unchecked(
            "metamodel M version 1 class B {} class interface {} \
             class A { extends interface B; extends interface; }",
        )
        .unwrap();
        let sups = &mm.class("A").unwrap().superclasses;
        assert_eq!(
            sups[0],
            SuperRef {
                name: "B".into(),
                kind: InheritanceKind::Interface
            }
        );
        assert_eq!(sups[1], SuperRef::full("interface"));
    }

    #[test]
    fn located_errors() {
        let err = parse_metamodel("metamodel M version 1\nclass A {\n  attr x string;\n}").unwrap_err();
        assert_eq!(
            err,
            FormatError::Syntax {
                line: 3,
                column: 10,
                message: "expected ':', found 'string'".into()
            }
        );
        let err = parse_metamodel("metamodel M version 1\nconstraint C {\n  A.x = \n}").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 4, .. }), "{err:?}");
        let err = parse_metamodel("metamodel M version 1 class A {} class A {}").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { .. }));
        let err = parse_metamodel("metamodel M version 1 class A { extends B; }").unwrap_err();
        assert!(matches!(err, FormatError::Validation(d) if d.len() == 1));
    }
}
