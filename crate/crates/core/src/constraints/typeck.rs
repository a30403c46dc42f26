//! Static value-kind checking. Without a metamodel only kinds are checked;
//! with one, class, association, role and attribute names are resolved too.

use super::ast::{BinOp, CollectionOp, ConstraintExpr, Expr, Literal, NavOp};
use super::ConstraintError;
use crate::meta_core::{Facet, Metamodel, ValueType};

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    /// An entity, with its class when statically known.
    Entity(Option<String>),
    /// A link, with its association when statically known.
    Link(Option<String>),
    /// A link end, with the endpoint class of its role when known.
    LinkEnd(Option<String>),
    Collection(Box<Ty>),
    Str,
    Int,
    Real,
    Bool,
    Any,
}

impl Ty {
    fn describe(&self) -> String {
        match self {
            Ty::Entity(_) => "an entity".into(),
            Ty::Link(_) => "a link".into(),
            Ty::LinkEnd(_) => "a link end".into(),
            Ty::Collection(_) => "a collection".into(),
            Ty::Str => "a string".into(),
            Ty::Int => "an integer".into(),
            Ty::Real => "a real".into(),
            Ty::Bool => "a boolean".into(),
            Ty::Any => "a value".into(),
        }
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Real)
    }
}

fn attr_ty(vt: &ValueType) -> Ty {
    match vt {
        ValueType::String | ValueType::Enum(_) => Ty::Str,
        ValueType::Integer => Ty::Int,
        ValueType::Real => Ty::Real,
        ValueType::Boolean => Ty::Bool,
    }
}

struct Checker<'a> {
    mm: Option<&'a Metamodel>,
    context: &'a str,
    env: Vec<(String, Ty)>,
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConstraintError> {
    Err(ConstraintError::Type(msg.into()))
}

impl Checker<'_> {
    fn expr(&mut self, e: &Expr) -> Result<Ty, ConstraintError> {
        match e {
            Expr::SelfRef => Ok(Ty::Entity(self.mm.map(|_| self.context.to_string()))),
            Expr::Var(v) => match self.env.iter().rev().find(|(n, _)| n == v) {
                Some((_, t)) => Ok(t.clone()),
                None => err(format!("unbound variable '{v}'")),
            },
            Expr::Literal(lit) => Ok(match lit {
                Literal::String(_) => Ty::Str,
                Literal::Integer(_) => Ty::Int,
                Literal::Real(_) => Ty::Real,
                Literal::Boolean(_) => Ty::Bool,
            }),
            Expr::Attribute { receiver, name } => {
                let class = match self.expr(receiver)? {
                    Ty::Entity(c) => c,
                    Ty::Any => None,
                    other => return err(format!("attribute '{name}' read from {}", other.describe())),
                };
                match (self.mm, class) {
                    (Some(mm), Some(class)) => {
                        // the attribute may live on any conforming subclass
                        let def = mm.descendants(&class, Facet::Attributes).into_iter().find_map(|c| {
                            mm.effective_features(c)
                                .ok()
                                .and_then(|f| f.attribute(name).map(|a| a.value_type.clone()))
                        });
                        match def {
                            Some(vt) => Ok(attr_ty(&vt)),
                            None => err(format!("class '{class}' and its subclasses have no attribute '{name}'")),
                        }
                    }
                    _ => Ok(Ty::Any),
                }
            }
            Expr::Nav { receiver, op } => {
                let recv = self.expr(receiver)?;
                match op {
                    NavOp::AttachingConnections(kind) => {
                        if !matches!(recv, Ty::Entity(_) | Ty::Any) {
                            return err(format!("attachingConnections applied to {}", recv.describe()));
                        }
                        if let Some(mm) = self.mm {
                            if mm.association(kind).is_none() {
                                return if mm.class(kind).is_some() {
                                    err(format!(
                                        "attachingConnections expects an association but '{kind}' is a class"
                                    ))
                                } else {
                                    err(format!("unknown association '{kind}'"))
                                };
                            }
                        }
                        Ok(Ty::Collection(Box::new(Ty::Link(Some(kind.clone())))))
                    }
                    NavOp::ConnectionPoints(role) => {
                        let endpoint = match (&recv, self.mm) {
                            (Ty::Link(Some(assoc)), Some(mm)) => {
                                let def = mm.association(assoc).and_then(|a| a.role(role));
                                match def {
                                    Some(r) => Some(r.endpoint.clone()),
                                    None => return err(format!("association '{assoc}' has no role '{role}'")),
                                }
                            }
                            (Ty::Link(_) | Ty::Any, _) => None,
                            _ => return err(format!("connectionPoints applied to {}", recv.describe())),
                        };
                        Ok(Ty::Collection(Box::new(Ty::LinkEnd(endpoint))))
                    }
                    NavOp::Target => match recv {
                        Ty::LinkEnd(c) => Ok(Ty::Entity(c)),
                        Ty::Any => Ok(Ty::Entity(None)),
                        other => err(format!("target applied to {}", other.describe())),
                    },
                    NavOp::Parent => match recv {
                        Ty::Entity(_) | Ty::Any => Ok(Ty::Entity(None)),
                        other => err(format!("parent applied to {}", other.describe())),
                    },
                }
            }
            Expr::Collection { receiver, op } => {
                let elem = match self.expr(receiver)? {
                    Ty::Collection(t) => *t,
                    Ty::Any => Ty::Any,
                    other => return err(format!("{} applied to {}", op.name(), other.describe())),
                };
                match op {
                    CollectionOp::ForAll { var, body } | CollectionOp::Exists { var, body } => {
                        self.env.push((var.clone(), elem));
                        let t = self.expr(body);
                        self.env.pop();
                        self.boolean(t?, op.name())?;
                        Ok(Ty::Bool)
                    }
                    CollectionOp::TheOnly => Ok(elem),
                    CollectionOp::Size => Ok(Ty::Int),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                match op {
                    BinOp::And | BinOp::Or | BinOp::Implies => {
                        self.boolean(l, op.symbol())?;
                        self.boolean(r, op.symbol())?;
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if !comparable(&l, &r, false) {
                            return err(format!("cannot compare {} with {}", l.describe(), r.describe()));
                        }
                    }
                    _ => {
                        if !comparable(&l, &r, true) {
                            return err(format!("cannot order {} against {}", l.describe(), r.describe()));
                        }
                    }
                }
                Ok(Ty::Bool)
            }
            Expr::Not(inner) => {
                let t = self.expr(inner)?;
                self.boolean(t, "not")?;
                Ok(Ty::Bool)
            }
        }
    }

    fn boolean(&self, t: Ty, what: &str) -> Result<(), ConstraintError> {
        match t {
            Ty::Bool | Ty::Any => Ok(()),
            other => err(format!("'{what}' needs a boolean, found {}", other.describe())),
        }
    }
}

fn comparable(l: &Ty, r: &Ty, ordering: bool) -> bool {
    if matches!(l, Ty::Collection(_)) || matches!(r, Ty::Collection(_)) {
        return false;
    }
    if *l == Ty::Any || *r == Ty::Any {
        return true;
    }
    if l.is_numeric() && r.is_numeric() {
        return true;
    }
    let scalar = |t: &Ty| matches!(t, Ty::Str | Ty::Bool);
    match (l, r) {
        (Ty::Str, Ty::Str) => true,
        (Ty::Bool, Ty::Bool) => !ordering,
        _ if ordering || scalar(l) || scalar(r) || l.is_numeric() || r.is_numeric() => false,
        (Ty::Entity(_), Ty::Entity(_)) | (Ty::Link(_), Ty::Link(_)) | (Ty::LinkEnd(_), Ty::LinkEnd(_)) => true,
        _ => false,
    }
}

/// Checks value kinds throughout `expr` and, when `mm` is given, that every
/// referenced class, association, role and attribute exists.
pub fn type_check(expr: &ConstraintExpr, mm: Option<&Metamodel>) -> Result<(), ConstraintError> {
    if let Some(mm) = mm {
        if mm.class(&expr.context).is_none() {
            return err(format!("unknown context class '{}'", expr.context));
        }
    }
    let mut checker = Checker {
        mm,
        context: &expr.context,
        env: Vec::new(),
    };
    let t = checker.expr(&expr.body)?;
    checker.boolean(t, "constraint body")
}
