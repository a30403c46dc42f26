use std::fmt;

use crate::text;

/// A parsed constraint: a context class and a boolean body evaluated once per
/// instance of that class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintExpr {
    pub context: String,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    String(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NavOp {
    /// Links of the named association with any end at the receiver.
    AttachingConnections(String),
    /// The ends of the receiver link playing the named role.
    ConnectionPoints(String),
    /// The entity at a link end.
    Target,
    /// The containment parent.
    Parent,
}

impl NavOp {
    pub fn name(&self) -> &'static str {
        match self {
            NavOp::AttachingConnections(_) => "attachingConnections",
            NavOp::ConnectionPoints(_) => "connectionPoints",
            NavOp::Target => "target",
            NavOp::Parent => "parent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CollectionOp {
    ForAll { var: String, body: Box<Expr> },
    Exists { var: String, body: Box<Expr> },
    TheOnly,
    Size,
}

impl CollectionOp {
    pub fn name(&self) -> &'static str {
        match self {
            CollectionOp::ForAll { .. } => "forAll",
            CollectionOp::Exists { .. } => "exists",
            CollectionOp::TheOnly => "theOnly",
            CollectionOp::Size => "size",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// The implicit context instance.
    SelfRef,
    Var(String),
    Literal(Literal),
    Attribute {
        receiver: Box<Expr>,
        name: String,
    },
    Nav {
        receiver: Box<Expr>,
        op: NavOp,
    },
    Collection {
        receiver: Box<Expr>,
        op: CollectionOp,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
}

const NOT_PREC: u8 = 5;
const POSTFIX_PREC: u8 = 6;
const ATOM_PREC: u8 = 7;

pub(crate) const KEYWORDS: &[&str] = &["and", "or", "not", "implies", "true", "false", "self"];

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Not(_) => NOT_PREC,
            Expr::Attribute { .. } | Expr::Nav { .. } | Expr::Collection { .. } => POSTFIX_PREC,
            // negative numbers lex as a prefix minus
            Expr::Literal(Literal::Integer(i)) if *i < 0 => NOT_PREC,
            Expr::Literal(Literal::Real(x)) if x.is_sign_negative() => NOT_PREC,
            _ => ATOM_PREC,
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }
}

struct Printer<'a> {
    out: &'a mut dyn fmt::Write,
    scope: Vec<String>,
}

impl Printer<'_> {
    fn wrap(&mut self, e: &Expr, parens: bool) -> fmt::Result {
        if parens {
            self.out.write_char('(')?;
            self.expr(e)?;
            self.out.write_char(')')
        } else {
            self.expr(e)
        }
    }

    fn receiver(&mut self, r: &Expr) -> Result<bool, fmt::Error> {
        // returns whether the receiver was printed (implicit self is not)
        if *r == Expr::SelfRef {
            return Ok(false);
        }
        self.wrap(r, r.precedence() < POSTFIX_PREC)?;
        Ok(true)
    }

    fn expr(&mut self, e: &Expr) -> fmt::Result {
        match e {
            Expr::SelfRef => self.out.write_str("self"),
            Expr::Var(v) => self.out.write_str(v),
            Expr::Literal(lit) => match lit {
                Literal::String(s) => self.out.write_str(&text::quote(s)),
                Literal::Integer(i) => write!(self.out, "{i}"),
                Literal::Real(x) => self.out.write_str(&text::format_real(*x)),
                Literal::Boolean(b) => write!(self.out, "{b}"),
            },
            Expr::Attribute { receiver, name } => {
                let printed = self.receiver(receiver)?;
                if printed {
                    write!(self.out, ".{name}")
                } else if self.scope.iter().any(|v| v == name) || KEYWORDS.contains(&name.as_str()) {
                    write!(self.out, "self.{name}")
                } else {
                    self.out.write_str(name)
                }
            }
            Expr::Nav { receiver, op } => {
                if self.receiver(receiver)? {
                    self.out.write_char('.')?;
                }
                write!(self.out, "{}(", op.name())?;
                match op {
                    NavOp::AttachingConnections(kind) => {
                        if text::is_identifier(kind) && !KEYWORDS.contains(&kind.as_str()) {
                            self.out.write_str(kind)?;
                        } else {
                            self.out.write_str(&text::quote(kind))?;
                        }
                    }
                    NavOp::ConnectionPoints(role) => self.out.write_str(&text::quote(role))?,
                    NavOp::Target | NavOp::Parent => {}
                }
                self.out.write_char(')')
            }
            Expr::Collection { receiver, op } => {
                if !self.receiver(receiver)? {
                    self.out.write_str("self")?;
                }
                write!(self.out, "->{}(", op.name())?;
                match op {
                    CollectionOp::ForAll { var, body } | CollectionOp::Exists { var, body } => {
                        write!(self.out, "{var} | ")?;
                        self.scope.push(var.clone());
                        self.expr(body)?;
                        self.scope.pop();
                    }
                    CollectionOp::TheOnly | CollectionOp::Size => {}
                }
                self.out.write_char(')')
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                self.wrap(lhs, lhs.precedence() < p)?;
                write!(self.out, " {} ", op.symbol())?;
                self.wrap(rhs, rhs.precedence() <= p)
            }
            Expr::Not(inner) => {
                self.out.write_str("not ")?;
                self.wrap(inner, inner.precedence() < NOT_PREC)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            out: f,
            scope: Vec::new(),
        }
        .expr(self)
    }
}

/// Canonical text: `Context.body` with minimal parentheses.
impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.context, self.body)
    }
}
