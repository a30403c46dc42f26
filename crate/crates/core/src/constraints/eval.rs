//! Evaluation of constraints over a model. Evaluation never mutates the
//! model; errors inside a context become violations for that context.

use std::cmp::Ordering;

use thiserror::Error;

use super::ast::{BinOp, CollectionOp, Expr, Literal, NavOp};
use crate::meta_core::{ConstraintDef, Facet, Metamodel, Value};
use crate::model_store::{EntityId, LinkId, Model};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("theOnly() applied to a collection of {0} elements")]
    NonSingleton(usize),
    #[error("{0} has no parent")]
    NoParent(String),
    #[error("{entity} has no attribute '{attribute}'")]
    UnknownAttribute { entity: String, attribute: String },
    #[error("{0}")]
    Kind(String),
}

/// The model element a violation is pinned to, when one can be singled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Witness {
    Entity(EntityId),
    Link(LinkId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub context: EntityId,
    pub witness: Option<Witness>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintResult {
    pub name: String,
    /// Holds exactly when `violations` is empty.
    pub overall: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// One result per constraint, in declaration order.
    pub results: Vec<ConstraintResult>,
    pub well_formed: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Entity(EntityId),
    Link(LinkId),
    /// A link end: the link and the role played there.
    End(LinkId, String),
    Coll(Vec<Val>),
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl Val {
    fn kind(&self) -> &'static str {
        match self {
            Val::Entity(_) => "an entity",
            Val::Link(_) => "a link",
            Val::End(..) => "a link end",
            Val::Coll(_) => "a collection",
            Val::Str(_) => "a string",
            Val::Int(_) => "an integer",
            Val::Real(_) => "a real",
            Val::Bool(_) => "a boolean",
        }
    }

    fn witness(&self) -> Option<Witness> {
        match self {
            Val::Entity(e) => Some(Witness::Entity(*e)),
            Val::Link(l) | Val::End(l, _) => Some(Witness::Link(*l)),
            _ => None,
        }
    }
}

type EResult<T> = Result<T, EvalError>;

fn kind_err<T>(msg: String) -> EResult<T> {
    Err(EvalError::Kind(msg))
}

struct Eval<'a> {
    model: &'a Model,
    mm: &'a Metamodel,
    this: EntityId,
    env: Vec<(String, Val)>,
}

impl Eval<'_> {
    fn describe(&self, v: &Val) -> String {
        match v {
            Val::Entity(e) => self.model.path_of(*e),
            Val::Link(l) => self.model.link_path(*l),
            Val::End(l, r) => format!("{}.{r}", self.model.link_path(*l)),
            other => other.kind().to_string(),
        }
    }

    fn entity(&self, v: Val, what: &str) -> EResult<EntityId> {
        match v {
            Val::Entity(e) => Ok(e),
            other => kind_err(format!("{what} applied to {}", other.kind())),
        }
    }

    fn boolean(&self, v: Val, what: &str) -> EResult<bool> {
        match v {
            Val::Bool(b) => Ok(b),
            other => kind_err(format!("'{what}' needs a boolean, found {}", other.kind())),
        }
    }

    fn collection(&self, v: Val, what: &str) -> EResult<Vec<Val>> {
        match v {
            Val::Coll(items) => Ok(items),
            other => kind_err(format!("{what} applied to {}", other.kind())),
        }
    }

    fn attribute(&self, id: EntityId, name: &str) -> EResult<Val> {
        let entity = self
            .model
            .entity(id)
            .ok_or_else(|| EvalError::Kind(format!("dangling entity {id}")))?;
        let value = match entity.attributes.get(name) {
            Some(v) => v.clone(),
            None => self
                .mm
                .effective_features(&entity.class)
                .ok()
                .and_then(|f| f.attribute(name).map(|a| a.default.clone()))
                .ok_or_else(|| EvalError::UnknownAttribute {
                    entity: self.model.path_of(id),
                    attribute: name.to_string(),
                })?,
        };
        Ok(match value {
            Value::String(s) | Value::Enum(s) => Val::Str(s),
            Value::Integer(i) => Val::Int(i),
            Value::Real(x) => Val::Real(x),
            Value::Boolean(b) => Val::Bool(b),
        })
    }

    fn eval(&mut self, e: &Expr) -> EResult<Val> {
        match e {
            Expr::SelfRef => Ok(Val::Entity(self.this)),
            Expr::Var(v) => match self.env.iter().rev().find(|(n, _)| n == v) {
                Some((_, val)) => Ok(val.clone()),
                None => kind_err(format!("unbound variable '{v}'")),
            },
            Expr::Literal(lit) => Ok(match lit {
                Literal::String(s) => Val::Str(s.clone()),
                Literal::Integer(i) => Val::Int(*i),
                Literal::Real(x) => Val::Real(*x),
                Literal::Boolean(b) => Val::Bool(*b),
            }),
            Expr::Attribute { receiver, name } => {
                let r = self.eval(receiver)?;
                let id = self.entity(r, &format!("attribute '{name}'"))?;
                self.attribute(id, name)
            }
            Expr::Nav { receiver, op } => {
                let r = self.eval(receiver)?;
                self.nav(r, op)
            }
            Expr::Collection { receiver, op } => {
                let r = self.eval(receiver)?;
                let items = self.collection(r, op.name())?;
                match op {
                    CollectionOp::ForAll { var, body } => {
                        for item in items {
                            if !self.bound(var, item, body)? {
                                return Ok(Val::Bool(false));
                            }
                        }
                        Ok(Val::Bool(true))
                    }
                    CollectionOp::Exists { var, body } => {
                        for item in items {
                            if self.bound(var, item, body)? {
                                return Ok(Val::Bool(true));
                            }
                        }
                        Ok(Val::Bool(false))
                    }
                    CollectionOp::TheOnly => {
                        if items.len() == 1 {
                            Ok(items.into_iter().next().unwrap_or(Val::Bool(false)))
                        } else {
                            Err(EvalError::NonSingleton(items.len()))
                        }
                    }
                    CollectionOp::Size => Ok(Val::Int(items.len() as i64)),
                }
            }
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    let l = self.eval(lhs)?;
                    let l = self.boolean(l, op.symbol())?;
                    let short = match op {
                        BinOp::And => (!l).then_some(false),
                        BinOp::Or => l.then_some(true),
                        _ => (!l).then_some(true),
                    };
                    if let Some(b) = short {
                        return Ok(Val::Bool(b));
                    }
                    let r = self.eval(rhs)?;
                    Ok(Val::Bool(self.boolean(r, op.symbol())?))
                }
                _ => {
                    let l = self.eval(lhs)?;
                    let r = self.eval(rhs)?;
                    compare(*op, &l, &r).map(Val::Bool)
                }
            },
            Expr::Not(inner) => {
                let v = self.eval(inner)?;
                Ok(Val::Bool(!self.boolean(v, "not")?))
            }
        }
    }

    fn bound(&mut self, var: &str, item: Val, body: &Expr) -> EResult<bool> {
        self.env.push((var.to_string(), item));
        let v = self.eval(body);
        self.env.pop();
        self.boolean(v?, "iterator body")
    }

    fn nav(&self, r: Val, op: &NavOp) -> EResult<Val> {
        match op {
            NavOp::AttachingConnections(kind) => {
                let id = self.entity(r, "attachingConnections")?;
                Ok(Val::Coll(
                    self.model
                        .links()
                        .filter(|l| l.association == *kind && l.touches(id))
                        .map(|l| Val::Link(l.id))
                        .collect(),
                ))
            }
            NavOp::ConnectionPoints(role) => match r {
                Val::Link(l) => {
                    let link = self
                        .model
                        .link(l)
                        .ok_or_else(|| EvalError::Kind(format!("dangling link {l}")))?;
                    let ends = if link.ends.contains_key(role) {
                        vec![Val::End(l, role.clone())]
                    } else {
                        Vec::new()
                    };
                    Ok(Val::Coll(ends))
                }
                other => kind_err(format!("connectionPoints applied to {}", other.kind())),
            },
            NavOp::Target => match r {
                Val::End(l, role) => self
                    .model
                    .link(l)
                    .and_then(|link| link.ends.get(&role))
                    .map(|e| Val::Entity(*e))
                    .ok_or_else(|| EvalError::Kind(format!("dangling link end {l}.{role}"))),
                other => kind_err(format!("target applied to {}", other.kind())),
            },
            NavOp::Parent => {
                let id = self.entity(r, "parent")?;
                match self.model.entity(id).and_then(|e| e.parent) {
                    Some(p) => Ok(Val::Entity(p)),
                    None => Err(EvalError::NoParent(self.model.path_of(id))),
                }
            }
        }
    }
}

fn compare(op: BinOp, l: &Val, r: &Val) -> EResult<bool> {
    let ord = match (l, r) {
        (Val::Int(a), Val::Int(b)) => Some(a.cmp(b)),
        (Val::Int(a), Val::Real(b)) => (*a as f64).partial_cmp(b),
        (Val::Real(a), Val::Int(b)) => a.partial_cmp(&(*b as f64)),
        (Val::Real(a), Val::Real(b)) => a.partial_cmp(b),
        (Val::Str(a), Val::Str(b)) => Some(a.cmp(b)),
        _ => None,
    };
    if let Some(ord) = ord {
        return Ok(match op {
            BinOp::Eq => ord == Ordering::Equal,
            BinOp::Ne => ord != Ordering::Equal,
            BinOp::Lt => ord == Ordering::Less,
            BinOp::Le => ord != Ordering::Greater,
            BinOp::Gt => ord == Ordering::Greater,
            _ => ord != Ordering::Less,
        });
    }
    let same = match (l, r) {
        (Val::Bool(a), Val::Bool(b)) => a == b,
        (Val::Entity(a), Val::Entity(b)) => a == b,
        (Val::Link(a), Val::Link(b)) => a == b,
        (Val::End(a, x), Val::End(b, y)) => a == b && x == y,
        _ => return kind_err(format!("cannot compare {} with {}", l.kind(), r.kind())),
    };
    match op {
        BinOp::Eq => Ok(same),
        BinOp::Ne => Ok(!same),
        _ => kind_err(format!("cannot order {} values", l.kind())),
    }
}

/// Evaluates one constraint for every entity whose class conforms to the
/// context class, in entity-id order.
///
/// When the body is a `forAll`, each violation is pinned to the first element
/// that failed, and violations pinned to the same element are reported once.
pub fn eval_constraint(model: &Model, mm: &Metamodel, constraint: &ConstraintDef) -> ConstraintResult {
    let expr = &constraint.expr;
    let mut violations: Vec<Violation> = Vec::new();
    for entity in model.entities() {
        if !mm.conforms(&entity.class, &expr.context, Facet::Attributes) {
            continue;
        }
        let mut ev = Eval {
            model,
            mm,
            this: entity.id,
            env: Vec::new(),
        };
        let outcome = match &expr.body {
            Expr::Collection {
                receiver,
                op: CollectionOp::ForAll { var, body },
            } => eval_for_all(&mut ev, receiver, var, body),
            body => match ev.eval(body).and_then(|v| ev.boolean(v, "constraint body")) {
                Ok(true) => None,
                Ok(false) => Some((None, "evaluates to false".to_string())),
                Err(e) => Some((None, e.to_string())),
            },
        };
        if let Some((witness, message)) = outcome {
            if witness.is_some() && violations.iter().any(|v| v.witness == witness) {
                continue;
            }
            violations.push(Violation {
                context: entity.id,
                witness,
                message,
            });
        }
    }
    ConstraintResult {
        name: constraint.name.clone(),
        overall: violations.is_empty(),
        violations,
    }
}

fn eval_for_all(ev: &mut Eval<'_>, receiver: &Expr, var: &str, body: &Expr) -> Option<(Option<Witness>, String)> {
    let items = match ev.eval(receiver).and_then(|v| ev.collection(v, "forAll")) {
        Ok(items) => items,
        Err(e) => return Some((None, e.to_string())),
    };
    for item in items {
        let witness = item.witness();
        let name = ev.describe(&item);
        match ev.bound(var, item, body) {
            Ok(true) => {}
            Ok(false) => return Some((witness, format!("fails for {name}"))),
            Err(e) => return Some((witness, format!("{e} (for {name})"))),
        }
    }
    None
}

/// Evaluates every constraint of `mm`; the model is well formed with respect
/// to them exactly when every result holds.
pub fn eval_all(model: &Model, mm: &Metamodel) -> Evaluation {
    let results: Vec<ConstraintResult> = mm.constraints().iter().map(|c| eval_constraint(model, mm, c)).collect();
    let well_formed = results.iter().all(|r| r.overall);
    Evaluation { results, well_formed }
}
