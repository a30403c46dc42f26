//! The meta-metamodel: classes, attributes, specialization, containment,
//! associations and constraints, plus the well-formedness rules for
//! metamodels built from them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::constraints::{self, ConstraintExpr};
use crate::diagnostics::{DiagCode, Diagnostic, Diagnostics, Location};
use crate::text;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetaError {
    #[error("unknown class '{0}'")]
    UnknownClass(String),
    #[error("unknown association '{0}'")]
    UnknownAssociation(String),
    #[error("duplicate definition of '{0}'")]
    Duplicate(String),
}

/// The type of an attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueType {
    String,
    Integer,
    Real,
    Boolean,
    Enum(Vec<String>),
}

impl ValueType {
    /// The value an attribute of this type takes when no default is written.
    pub fn zero(&self) -> Value {
        match self {
            ValueType::String => Value::String(String::new()),
            ValueType::Integer => Value::Integer(0),
            ValueType::Real => Value::Real(0.0),
            ValueType::Boolean => Value::Boolean(false),
            ValueType::Enum(lits) => Value::Enum(lits.first().cloned().unwrap_or_default()),
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::String => f.write_str("string"),
            ValueType::Integer => f.write_str("integer"),
            ValueType::Real => f.write_str("real"),
            ValueType::Boolean => f.write_str("boolean"),
            ValueType::Enum(lits) => write!(f, "enum({})", lits.join(", ")),
        }
    }
}

/// An attribute value. Reals are always finite.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    String(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Enum(String),
}

impl Value {
    pub fn conforms_to(&self, ty: &ValueType) -> bool {
        match (self, ty) {
            (Value::String(_), ValueType::String)
            | (Value::Integer(_), ValueType::Integer)
            | (Value::Boolean(_), ValueType::Boolean) => true,
            (Value::Real(x), ValueType::Real) => x.is_finite(),
            (Value::Enum(lit), ValueType::Enum(lits)) => lits.contains(lit),
            _ => false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::String(_) => "string",
            Value::Integer(_) => "integer",
            Value::Real(_) => "real",
            Value::Boolean(_) => "boolean",
            Value::Enum(_) => "enum literal",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => f.write_str(&text::quote(s)),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(x) => f.write_str(&text::format_real(*x)),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Enum(lit) => f.write_str(lit),
        }
    }
}

/// `min..max`, with `max == None` meaning unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub min: u32,
    pub max: Option<u32>,
}

impl Multiplicity {
    pub const ANY: Multiplicity = Multiplicity { min: 0, max: None };

    pub fn new(min: u32, max: Option<u32>) -> Self {
        Multiplicity { min, max }
    }

    pub fn exactly(n: u32) -> Self {
        Multiplicity { min: n, max: Some(n) }
    }

    pub fn is_valid(&self) -> bool {
        self.max.is_none_or(|max| self.min <= max)
    }

    pub fn admits(&self, count: usize) -> bool {
        count >= self.min as usize && self.max.is_none_or(|max| count <= max as usize)
    }
}

impl Default for Multiplicity {
    fn default() -> Self {
        Multiplicity::ANY
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "[{}..{}]", self.min, max),
            None => write!(f, "[{}..*]", self.min),
        }
    }
}

/// How much of a superclass a class inherits.
///
/// `Full` is ordinary specialization. `Interface` transfers attributes and
/// association-role participation only; `Implementation` transfers attributes
/// and containment rules (as container and as containee) only. The partial
/// kinds are produced by metamodel merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InheritanceKind {
    Full,
    Interface,
    Implementation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuperRef {
    pub name: String,
    pub kind: InheritanceKind,
}

impl SuperRef {
    pub fn full(name: impl Into<String>) -> Self {
        SuperRef {
            name: name.into(),
            kind: InheritanceKind::Full,
        }
    }
}

/// Which inherited relation a subtype query follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    /// Plain specialization (`Full` edges only).
    Specialization,
    /// Attributes and constraint applicability (every edge kind).
    Attributes,
    /// Association-role participation (`Full` and `Interface` edges).
    Roles,
    /// Containment rules (`Full` and `Implementation` edges).
    Containment,
}

impl Facet {
    fn follows(self, kind: InheritanceKind) -> bool {
        match self {
            Facet::Specialization => kind == InheritanceKind::Full,
            Facet::Attributes => true,
            Facet::Roles => kind != InheritanceKind::Implementation,
            Facet::Containment => kind != InheritanceKind::Interface,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttributeDef {
    pub name: String,
    pub value_type: ValueType,
    pub default: Value,
}

// Reals in defaults are finite, so equality is reflexive.
impl Eq for Value {}
impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::String(s) | Value::Enum(s) => s.hash(state),
            Value::Integer(i) => i.hash(state),
            Value::Real(x) => x.to_bits().hash(state),
            Value::Boolean(b) => b.hash(state),
        }
    }
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, value_type: ValueType, default: Value) -> Self {
        AttributeDef {
            name: name.into(),
            value_type,
            default,
        }
    }

    /// An attribute whose default is the type's zero value.
    pub fn with_zero(name: impl Into<String>, value_type: ValueType) -> Self {
        let default = value_type.zero();
        AttributeDef::new(name, value_type, default)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContainmentRule {
    pub child: String,
    pub multiplicity: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaClass {
    pub name: String,
    pub is_abstract: bool,
    pub attributes: Vec<AttributeDef>,
    pub superclasses: Vec<SuperRef>,
    pub containments: Vec<ContainmentRule>,
    pub glyph: Option<String>,
    /// Viewpoints this class is shown in. Stored, never rendered.
    pub aspects: Vec<String>,
}

impl MetaClass {
    pub fn new(name: impl Into<String>) -> Self {
        MetaClass {
            name: name.into(),
            is_abstract: false,
            attributes: Vec::new(),
            superclasses: Vec::new(),
            containments: Vec::new(),
            glyph: None,
            aspects: Vec::new(),
        }
    }

    pub fn set_abstract(mut self) -> Self {
        self.is_abstract = true;
        self
    }

    pub fn extends(mut self, sup: impl Into<String>) -> Self {
        self.superclasses.push(SuperRef::full(sup));
        self
    }

    pub fn inherits(mut self, sup: impl Into<String>, kind: InheritanceKind) -> Self {
        self.superclasses.push(SuperRef { name: sup.into(), kind });
        self
    }

    pub fn attr(mut self, def: AttributeDef) -> Self {
        self.attributes.push(def);
        self
    }

    pub fn contains(mut self, child: impl Into<String>, multiplicity: Multiplicity) -> Self {
        self.containments.push(ContainmentRule {
            child: child.into(),
            multiplicity,
        });
        self
    }

    pub fn glyph(mut self, glyph: impl Into<String>) -> Self {
        self.glyph = Some(glyph.into());
        self
    }

    /// The declared glyph, or the class name when none is declared.
    pub fn effective_glyph(&self) -> &str {
        self.glyph.as_deref().unwrap_or(&self.name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoleDef {
    pub name: String,
    pub endpoint: String,
    pub multiplicity: Multiplicity,
}

impl RoleDef {
    pub fn new(name: impl Into<String>, endpoint: impl Into<String>, multiplicity: Multiplicity) -> Self {
        RoleDef {
            name: name.into(),
            endpoint: endpoint.into(),
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDef {
    pub name: String,
    pub roles: Vec<RoleDef>,
}

impl AssociationDef {
    pub fn new(name: impl Into<String>, roles: Vec<RoleDef>) -> Self {
        AssociationDef {
            name: name.into(),
            roles,
        }
    }

    pub fn role(&self, name: &str) -> Option<&RoleDef> {
        self.roles.iter().find(|r| r.name == name)
    }
}

/// A named well-formedness constraint. The text is always the canonical
/// rendering of the parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDef {
    pub name: String,
    pub expr: ConstraintExpr,
}

impl ConstraintDef {
    pub fn new(name: impl Into<String>, expr: ConstraintExpr) -> Self {
        ConstraintDef {
            name: name.into(),
            expr,
        }
    }

    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self, constraints::ConstraintError> {
        Ok(ConstraintDef::new(name, constraints::parse_constraint(source)?))
    }

    pub fn text(&self) -> String {
        self.expr.to_string()
    }
}

/// A language definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Metamodel {
    pub name: String,
    pub version: u64,
    pub(crate) classes: IndexMap<String, MetaClass>,
    pub(crate) associations: IndexMap<String, AssociationDef>,
    pub(crate) constraints: Vec<ConstraintDef>,
}

/// A class with everything it inherits flattened in.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenedClass {
    pub name: String,
    pub is_abstract: bool,
    pub glyph: String,
    pub attributes: Vec<AttributeDef>,
    pub containments: Vec<ContainmentRule>,
    pub roles: Vec<RoleParticipation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleParticipation {
    pub association: String,
    pub role: String,
    pub endpoint: String,
    pub multiplicity: Multiplicity,
}

impl FlattenedClass {
    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

impl Metamodel {
    pub fn new(name: impl Into<String>, version: u64) -> Self {
        Metamodel {
            name: name.into(),
            version,
            classes: IndexMap::new(),
            associations: IndexMap::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_class(&mut self, class: MetaClass) -> Result<(), MetaError> {
        if self.classes.contains_key(&class.name) {
            return Err(MetaError::Duplicate(class.name));
        }
        self.classes.insert(class.name.clone(), class);
        Ok(())
    }

    pub fn add_association(&mut self, assoc: AssociationDef) -> Result<(), MetaError> {
        if self.associations.contains_key(&assoc.name) {
            return Err(MetaError::Duplicate(assoc.name));
        }
        self.associations.insert(assoc.name.clone(), assoc);
        Ok(())
    }

    pub fn add_constraint(&mut self, constraint: ConstraintDef) -> Result<(), MetaError> {
        if self.constraints.iter().any(|c| c.name == constraint.name) {
            return Err(MetaError::Duplicate(constraint.name));
        }
        self.constraints.push(constraint);
        Ok(())
    }

    pub fn remove_class(&mut self, name: &str) -> Option<MetaClass> {
        self.classes.shift_remove(name)
    }

    pub fn remove_association(&mut self, name: &str) -> Option<AssociationDef> {
        self.associations.shift_remove(name)
    }

    pub fn remove_constraint(&mut self, name: &str) -> Option<ConstraintDef> {
        let idx = self.constraints.iter().position(|c| c.name == name)?;
        Some(self.constraints.remove(idx))
    }

    pub fn class(&self, name: &str) -> Option<&MetaClass> {
        self.classes.get(name)
    }

    pub fn class_mut(&mut self, name: &str) -> Option<&mut MetaClass> {
        self.classes.get_mut(name)
    }

    pub fn classes(&self) -> impl Iterator<Item = &MetaClass> {
        self.classes.values()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn association(&self, name: &str) -> Option<&AssociationDef> {
        self.associations.get(name)
    }

    pub fn associations(&self) -> impl Iterator<Item = &AssociationDef> {
        self.associations.values()
    }

    pub fn constraints(&self) -> &[ConstraintDef] {
        &self.constraints
    }

    pub fn constraint(&self, name: &str) -> Option<&ConstraintDef> {
        self.constraints.iter().find(|c| c.name == name)
    }

    /// Reflexive ancestor closure following `facet`, supers first in
    /// declaration order, the class itself last. Tolerates cycles and
    /// dangling names.
    pub fn ancestors(&self, class: &str, facet: Facet) -> Vec<&str> {
        fn visit<'a>(mm: &'a Metamodel, name: &str, facet: Facet, seen: &mut HashSet<String>, out: &mut Vec<&'a str>) {
            let Some((key, cls)) = mm.classes.get_key_value(name) else {
                return;
            };
            if !seen.insert(key.clone()) {
                return;
            }
            for sup in &cls.superclasses {
                if facet.follows(sup.kind) {
                    visit(mm, &sup.name, facet, seen, out);
                }
            }
            out.push(key.as_str());
        }
        let mut out = Vec::new();
        visit(self, class, facet, &mut HashSet::new(), &mut out);
        out
    }

    /// Whether `sub` reaches `sup` along edges allowed by `facet`
    /// (reflexive). Unknown names never conform.
    pub fn conforms(&self, sub: &str, sup: &str, facet: Facet) -> bool {
        if !self.classes.contains_key(sup) {
            return false;
        }
        self.ancestors(sub, facet).contains(&sup)
    }

    /// Reflexive, transitive specialization.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, MetaError> {
        for name in [sub, sup] {
            if !self.classes.contains_key(name) {
                return Err(MetaError::UnknownClass(name.to_string()));
            }
        }
        Ok(self.conforms(sub, sup, Facet::Specialization))
    }

    /// All classes that conform to `sup` along `facet`, in declaration order.
    pub fn descendants(&self, sup: &str, facet: Facet) -> Vec<&str> {
        self.classes
            .keys()
            .filter(|c| self.conforms(c, sup, facet))
            .map(String::as_str)
            .collect()
    }

    pub fn effective_features(&self, class: &str) -> Result<FlattenedClass, MetaError> {
        let cls = self
            .classes
            .get(class)
            .ok_or_else(|| MetaError::UnknownClass(class.to_string()))?;

        let mut attributes: Vec<AttributeDef> = Vec::new();
        for anc in self.ancestors(class, Facet::Attributes) {
            for attr in &self.classes[anc].attributes {
                if !attributes.iter().any(|a| a.name == attr.name) {
                    attributes.push(attr.clone());
                }
            }
        }

        let mut containments: Vec<ContainmentRule> = Vec::new();
        for anc in self.ancestors(class, Facet::Containment) {
            for rule in &self.classes[anc].containments {
                if !containments.contains(rule) {
                    containments.push(rule.clone());
                }
            }
        }

        let role_ancestors = self.ancestors(class, Facet::Roles);
        let mut roles = Vec::new();
        for assoc in self.associations.values() {
            for role in &assoc.roles {
                if role_ancestors.contains(&role.endpoint.as_str()) {
                    roles.push(RoleParticipation {
                        association: assoc.name.clone(),
                        role: role.name.clone(),
                        endpoint: role.endpoint.clone(),
                        multiplicity: role.multiplicity,
                    });
                }
            }
        }

        Ok(FlattenedClass {
            name: cls.name.clone(),
            is_abstract: cls.is_abstract,
            glyph: cls.effective_glyph().to_string(),
            attributes,
            containments,
            roles,
        })
    }

    /// Whether an instance of `child` may be placed directly under an
    /// instance of `parent`.
    pub fn permits_containment(&self, parent: &str, child: &str) -> bool {
        self.ancestors(parent, Facet::Containment).iter().any(|anc| {
            self.classes[*anc]
                .containments
                .iter()
                .any(|rule| self.conforms(child, &rule.child, Facet::Containment))
        })
    }

    /// Checks every metamodel invariant, returning one diagnostic per violation.
    pub fn validate(&self) -> Diagnostics {
        validate_metamodel(self)
    }
}

/// Checks the well-formedness of a metamodel.
pub fn validate_metamodel(mm: &Metamodel) -> Diagnostics {
    let mut diags = Vec::new();
    let cyclic = check_specialization_cycles(mm, &mut diags);

    for cls in mm.classes.values() {
        let loc = || Location::Class(cls.name.clone());
        let mut seen_supers = HashSet::new();
        for sup in &cls.superclasses {
            if !mm.classes.contains_key(&sup.name) {
                diags.push(Diagnostic::error(
                    DiagCode::UnresolvedName,
                    loc(),
                    format!("superclass '{}' of {} is not a class", sup.name, cls.name),
                ));
            }
            if !seen_supers.insert(sup.name.as_str()) {
                diags.push(Diagnostic::error(
                    DiagCode::DuplicateName,
                    loc(),
                    format!("superclass '{}' listed more than once", sup.name),
                ));
            }
        }
        for rule in &cls.containments {
            if !mm.classes.contains_key(&rule.child) {
                diags.push(Diagnostic::error(
                    DiagCode::UnresolvedName,
                    loc(),
                    format!("contained class '{}' of {} is not a class", rule.child, cls.name),
                ));
            }
            if !rule.multiplicity.is_valid() {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidMultiplicity,
                    loc(),
                    format!("containment of {} has min > max {}", rule.child, rule.multiplicity),
                ));
            }
        }
        let mut own = HashSet::new();
        for attr in &cls.attributes {
            let aloc = || Location::Attribute {
                class: cls.name.clone(),
                attribute: attr.name.clone(),
            };
            if !own.insert(attr.name.as_str()) {
                diags.push(Diagnostic::error(
                    DiagCode::DuplicateName,
                    aloc(),
                    format!("attribute '{}' declared twice in {}", attr.name, cls.name),
                ));
            }
            if let ValueType::Enum(lits) = &attr.value_type {
                if lits.is_empty() {
                    diags.push(Diagnostic::error(DiagCode::InvalidEnum, aloc(), "enum has no literals"));
                }
                let mut uniq = HashSet::new();
                for lit in lits {
                    if !uniq.insert(lit) {
                        diags.push(Diagnostic::error(
                            DiagCode::InvalidEnum,
                            aloc(),
                            format!("enum literal '{lit}' repeated"),
                        ));
                    }
                }
            }
            if !attr.default.conforms_to(&attr.value_type) {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidDefault,
                    aloc(),
                    format!("default {} does not match type {}", attr.default, attr.value_type),
                ));
            }
        }
        if !cyclic.contains(cls.name.as_str()) {
            check_inherited_attributes(mm, cls, &mut diags);
        }
    }

    for assoc in mm.associations.values() {
        let loc = || Location::Association(assoc.name.clone());
        if mm.classes.contains_key(&assoc.name) {
            diags.push(Diagnostic::error(
                DiagCode::DuplicateName,
                loc(),
                format!("association '{}' has the same name as a class", assoc.name),
            ));
        }
        if assoc.roles.len() < 2 {
            diags.push(Diagnostic::error(
                DiagCode::AssociationArity,
                loc(),
                format!(
                    "association '{}' declares {} role(s), needs at least 2",
                    assoc.name,
                    assoc.roles.len()
                ),
            ));
        }
        let mut names = HashSet::new();
        for role in &assoc.roles {
            if !names.insert(role.name.as_str()) {
                diags.push(Diagnostic::error(
                    DiagCode::DuplicateName,
                    loc(),
                    format!("role '{}' declared twice", role.name),
                ));
            }
            if !mm.classes.contains_key(&role.endpoint) {
                diags.push(Diagnostic::error(
                    DiagCode::UnresolvedName,
                    loc(),
                    format!("role '{}' refers to unknown class '{}'", role.name, role.endpoint),
                ));
            }
            if !role.multiplicity.is_valid() {
                diags.push(Diagnostic::error(
                    DiagCode::InvalidMultiplicity,
                    loc(),
                    format!("role '{}' has min > max {}", role.name, role.multiplicity),
                ));
            }
        }
    }

    let mut constraint_names = HashSet::new();
    for c in &mm.constraints {
        let loc = || Location::Constraint(c.name.clone());
        if !constraint_names.insert(c.name.as_str()) {
            diags.push(Diagnostic::error(
                DiagCode::DuplicateName,
                loc(),
                format!("constraint '{}' declared twice", c.name),
            ));
        }
        if let Err(e) = constraints::type_check(&c.expr, Some(mm)) {
            diags.push(Diagnostic::error(DiagCode::InvalidConstraint, loc(), e.to_string()));
        }
    }

    diags
}

/// Reports one diagnostic per cyclic strongly connected component of the
/// specialization graph and returns every class on a cycle.
fn check_specialization_cycles<'a>(mm: &'a Metamodel, diags: &mut Diagnostics) -> BTreeSet<&'a str> {
    // reach[c] = classes reachable from c through one or more super edges
    let mut reach: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for name in mm.classes.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = mm.classes[name]
            .superclasses
            .iter()
            .filter_map(|s| mm.classes.get_key_value(&s.name).map(|(k, _)| k.as_str()))
            .collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(
                    mm.classes[n]
                        .superclasses
                        .iter()
                        .filter_map(|s| mm.classes.get_key_value(&s.name).map(|(k, _)| k.as_str())),
                );
            }
        }
        reach.insert(name.as_str(), seen);
    }

    let mut cyclic = BTreeSet::new();
    let mut reported: HashSet<&str> = HashSet::new();
    for name in mm.classes.keys() {
        let name = name.as_str();
        if !reach[name].contains(name) {
            continue;
        }
        cyclic.insert(name);
        if reported.contains(name) {
            continue;
        }
        let scc: Vec<&str> = mm
            .classes
            .keys()
            .map(String::as_str)
            .filter(|other| *other == name || (reach[name].contains(other) && reach[other].contains(name)))
            .collect();
        reported.extend(scc.iter().copied());
        diags.push(Diagnostic::error(
            DiagCode::SpecializationCycle,
            Location::Class(name.to_string()),
            format!("specialization cycle at {name}"),
        ));
    }
    cyclic
}

fn check_inherited_attributes(mm: &Metamodel, cls: &MetaClass, diags: &mut Diagnostics) {
    let mut inherited: BTreeMap<&str, (&AttributeDef, &str)> = BTreeMap::new();
    let mut reported = HashSet::new();
    for anc in mm.ancestors(&cls.name, Facet::Attributes) {
        if anc == cls.name {
            continue;
        }
        for attr in &mm.classes[anc].attributes {
            if cls.attribute(&attr.name).is_some() {
                if reported.insert(attr.name.as_str()) {
                    diags.push(Diagnostic::error(
                        DiagCode::AttributeConflict,
                        Location::Attribute {
                            class: cls.name.clone(),
                            attribute: attr.name.clone(),
                        },
                        format!(
                            "attribute '{}' of {} redeclares the one inherited from {}",
                            attr.name, cls.name, anc
                        ),
                    ));
                }
                continue;
            }
            match inherited.get(attr.name.as_str()) {
                None => {
                    inherited.insert(&attr.name, (attr, anc));
                }
                Some((prev, origin)) if *prev != attr => {
                    if reported.insert(attr.name.as_str()) {
                        diags.push(Diagnostic::error(
                            DiagCode::AttributeConflict,
                            Location::Attribute {
                                class: cls.name.clone(),
                                attribute: attr.name.clone(),
                            },
                            format!(
                                "{} inherits conflicting definitions of '{}' from {} and {}",
                                cls.name, attr.name, origin, anc
                            ),
                        ));
                    }
                }
                Some(_) => {}
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The port-interconnection language: components containing ports and
    /// sub-components, with buffered connections between ports.
    pub fn signal_flow() -> Metamodel {
        let mut mm = Metamodel::new("SignalFlow", 1);
        mm.add_class(
            MetaClass::new("Component")
                .attr(AttributeDef::new("gain", ValueType::Real, Value::Real(1.0)))
                .contains("Port", Multiplicity::ANY)
                .contains("Component", Multiplicity::ANY),
        )
        .unwrap();
        mm.add_class(
            MetaClass::new("Port")
                .set_abstract()
                .attr(AttributeDef::with_zero("label", ValueType::String)),
        )
        .unwrap();
        mm.add_class(MetaClass::new("InPort").extends("Port")).unwrap();
        mm.add_class(MetaClass::new("OutPort").extends("Port")).unwrap();
        mm.add_association(AssociationDef::new(
            "BufferedConnection",
            vec![
                RoleDef::new("src", "Port", Multiplicity::ANY),
                RoleDef::new("dst", "Port", Multiplicity::ANY),
            ],
        ))
        .unwrap();
        mm
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::signal_flow;
    use super::*;

    #[test]
    fn empty_metamodel_is_valid() {
        assert!(validate_metamodel(&Metamodel::new("Empty", 1)).is_empty());
    }

    #[test]
    fn self_specialization_is_a_cycle() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("A").extends("A")).unwrap();
        let diags = validate_metamodel(&mm);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::SpecializationCycle);
        assert_eq!(diags[0].message, "specialization cycle at A");
    }

    #[test]
    fn two_class_cycle_reported_once() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("A").extends("B")).unwrap();
        mm.add_class(MetaClass::new("B").extends("A")).unwrap();
        let diags = validate_metamodel(&mm);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].message, "specialization cycle at A");
    }

    #[test]
    fn signal_flow_is_valid() {
        assert_eq!(validate_metamodel(&signal_flow()), vec![]);
    }

    #[test]
    fn in_port_inherits_port_features() {
        let mm = signal_flow();
        let flat = mm.effective_features("InPort").unwrap();
        assert_eq!(flat.attributes.len(), 1);
        assert_eq!(flat.attributes[0].name, "label");
        let roles: Vec<_> = flat
            .roles
            .iter()
            .map(|r| (r.association.as_str(), r.role.as_str()))
            .collect();
        assert_eq!(
            roles,
            vec![("BufferedConnection", "src"), ("BufferedConnection", "dst")]
        );
        assert!(flat.containments.is_empty());
    }

    #[test]
    fn root_class_has_only_own_features() {
        let mm = signal_flow();
        let flat = mm.effective_features("Component").unwrap();
        assert_eq!(flat.attributes, mm.class("Component").unwrap().attributes);
        assert_eq!(flat.containments, mm.class("Component").unwrap().containments);
        assert!(flat.roles.is_empty());
    }

    #[test]
    fn diamond_flattens_to_one_attribute() {
        let mut mm = Metamodel::new("Diamond", 1);
        mm.add_class(MetaClass::new("A").attr(AttributeDef::with_zero("x", ValueType::Integer)))
            .unwrap();
        mm.add_class(MetaClass::new("B").extends("A")).unwrap();
        mm.add_class(MetaClass::new("C").extends("A")).unwrap();
        mm.add_class(MetaClass::new("D").extends("B").extends("C")).unwrap();
        assert!(validate_metamodel(&mm).is_empty());
        let flat = mm.effective_features("D").unwrap();
        assert_eq!(flat.attributes.iter().filter(|a| a.name == "x").count(), 1);
        assert_eq!(mm.ancestors("D", Facet::Specialization), vec!["A", "B", "C", "D"]);
    }

    #[test]
    fn conflicting_inherited_attributes_are_rejected() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("B").attr(AttributeDef::with_zero("x", ValueType::Integer)))
            .unwrap();
        mm.add_class(MetaClass::new("C").attr(AttributeDef::with_zero("x", ValueType::Real)))
            .unwrap();
        mm.add_class(MetaClass::new("D").extends("B").extends("C")).unwrap();
        let diags = validate_metamodel(&mm);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagCode::AttributeConflict);

        // identical definitions from distinct paths merge silently
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("B").attr(AttributeDef::with_zero("x", ValueType::Integer)))
            .unwrap();
        mm.add_class(MetaClass::new("C").attr(AttributeDef::with_zero("x", ValueType::Integer)))
            .unwrap();
        mm.add_class(MetaClass::new("D").extends("B").extends("C")).unwrap();
        assert!(validate_metamodel(&mm).is_empty());
    }

    #[test]
    fn redeclaring_inherited_attribute_is_rejected() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("A").attr(AttributeDef::with_zero("x", ValueType::Integer)))
            .unwrap();
        mm.add_class(
            MetaClass::new("B")
                .extends("A")
                .attr(AttributeDef::with_zero("x", ValueType::Integer)),
        )
        .unwrap();
        assert_eq!(validate_metamodel(&mm)[0].code, DiagCode::AttributeConflict);
    }

    #[test]
    fn dangling_names_and_bad_multiplicities() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(
            MetaClass::new("A")
                .extends("Nope")
                .contains("Ghost", Multiplicity::new(3, Some(1)))
                .attr(AttributeDef::new("k", ValueType::Enum(vec![]), Value::Enum("z".into()))),
        )
        .unwrap();
        mm.add_association(AssociationDef::new(
            "A",
            vec![RoleDef::new("r", "A", Multiplicity::ANY)],
        ))
        .unwrap();
        let codes: Vec<_> = validate_metamodel(&mm).iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            vec![
                DiagCode::UnresolvedName,
                DiagCode::UnresolvedName,
                DiagCode::InvalidMultiplicity,
                DiagCode::InvalidEnum,
                DiagCode::InvalidDefault,
                DiagCode::DuplicateName,
                DiagCode::AssociationArity,
            ]
        );
    }

    #[test]
    fn subtype_queries() {
        let mm = signal_flow();
        assert!(mm.is_subtype("OutPort", "Port").unwrap());
        assert!(mm.is_subtype("Port", "Port").unwrap());
        assert!(!mm.is_subtype("Port", "OutPort").unwrap());
        assert_eq!(
            mm.is_subtype("Nope", "Port"),
            Err(MetaError::UnknownClass("Nope".into()))
        );
        assert!(mm.effective_features("Nope").is_err());
    }

    #[test]
    fn partial_inheritance_facets() {
        let mut mm = Metamodel::new("M", 1);
        mm.add_class(MetaClass::new("Box").contains("Box", Multiplicity::ANY))
            .unwrap();
        mm.add_class(MetaClass::new("Pin")).unwrap();
        mm.add_association(AssociationDef::new(
            "Wire",
            vec![
                RoleDef::new("a", "Box", Multiplicity::ANY),
                RoleDef::new("b", "Pin", Multiplicity::ANY),
            ],
        ))
        .unwrap();
        mm.add_class(MetaClass::new("Iface").inherits("Box", InheritanceKind::Interface))
            .unwrap();
        mm.add_class(MetaClass::new("Impl").inherits("Box", InheritanceKind::Implementation))
            .unwrap();
        assert!(validate_metamodel(&mm).is_empty());

        let iface = mm.effective_features("Iface").unwrap();
        assert!(iface.containments.is_empty());
        assert_eq!(iface.roles.len(), 1);
        let imp = mm.effective_features("Impl").unwrap();
        assert_eq!(imp.containments.len(), 1);
        assert!(imp.roles.is_empty());

        assert!(!mm.is_subtype("Iface", "Box").unwrap());
        assert!(mm.permits_containment("Impl", "Impl"));
        assert!(mm.permits_containment("Box", "Impl"));
        assert!(!mm.permits_containment("Box", "Iface"));
    }

    #[test]
    fn multiplicity_admits() {
        let m = Multiplicity::new(1, Some(2));
        assert!(!m.admits(0));
        assert!(m.admits(1) && m.admits(2));
        assert!(!m.admits(3));
        assert!(Multiplicity::ANY.admits(1000));
        assert_eq!(m.to_string(), "[1..2]");
        assert_eq!(Multiplicity::ANY.to_string(), "[0..*]");
    }
}
