//! Metamodel diffs and the impact of a metamodel revision on an existing
//! model. Versions are matched by name; nothing here mutates a model.

use std::fmt;

use crate::diagnostics::{DiagCode, Diagnostic, Location};
use crate::meta_core::{AttributeDef, Metamodel, Multiplicity, SuperRef};
use crate::model_store::{check_conformance_with, CheckOptions, Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Change {
    ClassAdded(String),
    ClassRemoved(String),
    AbstractnessChanged {
        class: String,
        is_abstract: bool,
    },
    SuperclassesChanged {
        class: String,
        before: Vec<SuperRef>,
        after: Vec<SuperRef>,
    },
    GlyphChanged {
        class: String,
        before: Option<String>,
        after: Option<String>,
    },
    AttributeAdded {
        class: String,
        attribute: AttributeDef,
    },
    AttributeRemoved {
        class: String,
        attribute: String,
    },
    AttributeRetyped {
        class: String,
        before: AttributeDef,
        after: AttributeDef,
    },
    ContainmentChanged {
        class: String,
        child: String,
        before: Option<Multiplicity>,
        after: Option<Multiplicity>,
    },
    AssociationAdded(String),
    AssociationRemoved(String),
    RoleChanged {
        association: String,
        role: String,
    },
    ConstraintAdded(String),
    ConstraintRemoved(String),
    ConstraintTextChanged(String),
}

fn mult(m: &Option<Multiplicity>) -> String {
    m.map_or_else(|| "none".to_string(), |m| m.to_string())
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Change::ClassAdded(c) => write!(f, "class added: {c}"),
            Change::ClassRemoved(c) => write!(f, "class removed: {c}"),
            Change::AbstractnessChanged { class, is_abstract } => {
                write!(
                    f,
                    "class {class} is now {}",
                    if *is_abstract { "abstract" } else { "concrete" }
                )
            }
            Change::SuperclassesChanged { class, after, .. } => {
                let names: Vec<&str> = after.iter().map(|s| s.name.as_str()).collect();
                write!(f, "superclasses of {class} changed to [{}]", names.join(", "))
            }
            Change::GlyphChanged { class, before, after } => write!(
                f,
                "glyph of {class}: {} -> {}",
                before.as_deref().unwrap_or("default"),
                after.as_deref().unwrap_or("default")
            ),
            Change::AttributeAdded { class, attribute } => {
                write!(
                    f,
                    "attribute added: {class}.{}: {}",
                    attribute.name, attribute.value_type
                )
            }
            Change::AttributeRemoved { class, attribute } => write!(f, "attribute removed: {class}.{attribute}"),
            Change::AttributeRetyped { class, before, after } => write!(
                f,
                "attribute changed: {class}.{}: {} = {} -> {} = {}",
                before.name, before.value_type, before.default, after.value_type, after.default
            ),
            Change::ContainmentChanged {
                class,
                child,
                before,
                after,
            } => write!(f, "containment {class} -> {child}: {} -> {}", mult(before), mult(after)),
            Change::AssociationAdded(a) => write!(f, "association added: {a}"),
            Change::AssociationRemoved(a) => write!(f, "association removed: {a}"),
            Change::RoleChanged { association, role } => write!(f, "role changed: {association}.{role}"),
            Change::ConstraintAdded(c) => write!(f, "constraint added: {c}"),
            Change::ConstraintRemoved(c) => write!(f, "constraint removed: {c}"),
            Change::ConstraintTextChanged(c) => write!(f, "constraint changed: {c}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetamodelDiff {
    pub changes: Vec<Change>,
}

impl MetamodelDiff {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }
}

/// Name-matched differences between two metamodel versions, in v1
/// declaration order followed by additions in v2 order.
pub fn diff_metamodels(v1: &Metamodel, v2: &Metamodel) -> MetamodelDiff {
    let mut changes = Vec::new();
    for c1 in v1.classes() {
        let Some(c2) = v2.class(&c1.name) else {
            changes.push(Change::ClassRemoved(c1.name.clone()));
            continue;
        };
        let class = || c1.name.clone();
        if c1.is_abstract != c2.is_abstract {
            changes.push(Change::AbstractnessChanged {
                class: class(),
                is_abstract: c2.is_abstract,
            });
        }
        if c1.superclasses != c2.superclasses {
            changes.push(Change::SuperclassesChanged {
                class: class(),
                before: c1.superclasses.clone(),
                after: c2.superclasses.clone(),
            });
        }
        if c1.glyph != c2.glyph {
            changes.push(Change::GlyphChanged {
                class: class(),
                before: c1.glyph.clone(),
                after: c2.glyph.clone(),
            });
        }
        for a1 in &c1.attributes {
            match c2.attribute(&a1.name) {
                None => changes.push(Change::AttributeRemoved {
                    class: class(),
                    attribute: a1.name.clone(),
                }),
                Some(a2) if a2 != a1 => changes.push(Change::AttributeRetyped {
                    class: class(),
                    before: a1.clone(),
                    after: a2.clone(),
                }),
                Some(_) => {}
            }
        }
        for a2 in c2.attributes.iter().filter(|a| c1.attribute(&a.name).is_none()) {
            changes.push(Change::AttributeAdded {
                class: class(),
                attribute: a2.clone(),
            });
        }
        let children = c1
            .containments
            .iter()
            .chain(&c2.containments)
            .map(|r| r.child.as_str())
            .fold(Vec::new(), |mut acc, c| {
                if !acc.contains(&c) {
                    acc.push(c);
                }
                acc
            });
        for child in children {
            let find = |cls: &crate::meta_core::MetaClass| {
                cls.containments
                    .iter()
                    .find(|r| r.child == child)
                    .map(|r| r.multiplicity)
            };
            let (before, after) = (find(c1), find(c2));
            if before != after {
                changes.push(Change::ContainmentChanged {
                    class: class(),
                    child: child.to_string(),
                    before,
                    after,
                });
            }
        }
    }
    for c2 in v2.classes().filter(|c| v1.class(&c.name).is_none()) {
        changes.push(Change::ClassAdded(c2.name.clone()));
    }

    for a1 in v1.associations() {
        let Some(a2) = v2.association(&a1.name) else {
            changes.push(Change::AssociationRemoved(a1.name.clone()));
            continue;
        };
        for r1 in &a1.roles {
            if a2.role(&r1.name) != Some(r1) {
                changes.push(Change::RoleChanged {
                    association: a1.name.clone(),
                    role: r1.name.clone(),
                });
            }
        }
        for r2 in a2.roles.iter().filter(|r| a1.role(&r.name).is_none()) {
            changes.push(Change::RoleChanged {
                association: a1.name.clone(),
                role: r2.name.clone(),
            });
        }
    }
    for a2 in v2.associations().filter(|a| v1.association(&a.name).is_none()) {
        changes.push(Change::AssociationAdded(a2.name.clone()));
    }

    for k1 in v1.constraints() {
        match v2.constraint(&k1.name) {
            None => changes.push(Change::ConstraintRemoved(k1.name.clone())),
            Some(k2) if k2.text() != k1.text() => changes.push(Change::ConstraintTextChanged(k1.name.clone())),
            Some(_) => {}
        }
    }
    for k2 in v2.constraints().iter().filter(|k| v1.constraint(&k.name).is_none()) {
        changes.push(Change::ConstraintAdded(k2.name.clone()));
    }
    MetamodelDiff { changes }
}

/// How a model element is affected by moving to a new metamodel version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ImpactKind {
    Orphaned,
    AttributeInvalid,
    ContainmentInvalid,
    LinkInvalid,
    NewConstraintViolation,
}

impl ImpactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImpactKind::Orphaned => "Orphaned",
            ImpactKind::AttributeInvalid => "AttributeInvalid",
            ImpactKind::ContainmentInvalid => "ContainmentInvalid",
            ImpactKind::LinkInvalid => "LinkInvalid",
            ImpactKind::NewConstraintViolation => "NewConstraintViolation",
        }
    }

    fn of(code: DiagCode) -> ImpactKind {
        match code {
            DiagCode::UnknownClass | DiagCode::AbstractInstance => ImpactKind::Orphaned,
            DiagCode::UnknownAttribute | DiagCode::AttributeType => ImpactKind::AttributeInvalid,
            DiagCode::IllegalContainment | DiagCode::ContainmentMultiplicity => ImpactKind::ContainmentInvalid,
            DiagCode::ConstraintViolation => ImpactKind::NewConstraintViolation,
            _ => ImpactKind::LinkInvalid,
        }
    }
}

impl fmt::Display for ImpactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Impact {
    pub kind: ImpactKind,
    pub location: Location,
    /// Path of the affected entity or link.
    pub path: String,
    /// The diff entry that most plausibly explains the impact.
    pub cause: Option<Change>,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvolutionReport {
    pub diff: MetamodelDiff,
    /// One entry per conformance diagnostic against the new version.
    pub impacts: Vec<Impact>,
}

impl EvolutionReport {
    pub fn is_empty(&self) -> bool {
        self.impacts.is_empty()
    }

    pub fn count(&self, kind: ImpactKind) -> usize {
        self.impacts.iter().filter(|i| i.kind == kind).count()
    }
}

fn cause(model: &Model, diff: &MetamodelDiff, d: &Diagnostic) -> Option<Change> {
    let entity = match &d.location {
        Location::Entity(e) => model.entity(*e),
        _ => None,
    };
    let class = entity.map(|e| e.class.as_str());
    let link = match &d.location {
        Location::Link(l) => model.link(*l),
        _ => None,
    };
    diff.changes
        .iter()
        .find(|c| match (d.code, c) {
            (DiagCode::UnknownClass, Change::ClassRemoved(n)) => Some(n.as_str()) == class,
            (DiagCode::AbstractInstance, Change::AbstractnessChanged { class: n, .. }) => Some(n.as_str()) == class,
            (DiagCode::UnknownAttribute, Change::AttributeRemoved { .. })
            | (DiagCode::AttributeType, Change::AttributeRetyped { .. }) => true,
            (DiagCode::IllegalContainment | DiagCode::ContainmentMultiplicity, Change::ContainmentChanged { .. }) => {
                true
            }
            (DiagCode::UnknownAssociation, Change::AssociationRemoved(n)) => link.is_some_and(|l| l.association == *n),
            (DiagCode::RoleMismatch | DiagCode::DanglingReference, Change::ClassRemoved(n)) => {
                link.is_some_and(|l| l.ends.values().any(|e| model.entity(*e).is_some_and(|e| e.class == *n)))
            }
            (DiagCode::RoleMismatch | DiagCode::RoleMultiplicity, Change::RoleChanged { .. }) => true,
            (DiagCode::ConstraintViolation, Change::ConstraintAdded(n) | Change::ConstraintTextChanged(n)) => {
                d.message.starts_with(&format!("constraint {n} violated"))
            }
            _ => false,
        })
        .cloned()
}

/// Classifies every conformance diagnostic of `model` against `v2`. The
/// model must reference `v1`.
pub fn evolution_report(model: &Model, v1: &Metamodel, v2: &Metamodel) -> Result<EvolutionReport, ModelError> {
    // rejects a model that does not belong to v1
    check_conformance_with(
        model,
        v1,
        CheckOptions {
            skip_constraints: true,
            ignore_metamodel_ref: false,
        },
    )?;
    let diff = diff_metamodels(v1, v2);
    let diags = check_conformance_with(
        model,
        v2,
        CheckOptions {
            skip_constraints: false,
            ignore_metamodel_ref: true,
        },
    )?;
    // grouped by kind in declaration order; within a kind, model order
    let mut impacts: Vec<Impact> = diags
        .into_iter()
        .map(|d| Impact {
            kind: ImpactKind::of(d.code),
            path: model.location_path(&d.location),
            location: d.location.clone(),
            cause: cause(model, &diff, &d),
            diagnostic: d,
        })
        .collect();
    impacts.sort_by_key(|i| i.kind);
    Ok(EvolutionReport { diff, impacts })
}

/// Whether `model` already conforms to `mm`, ignoring the version it names.
pub fn conforms_to_version(model: &Model, mm: &Metamodel) -> Result<bool, ModelError> {
    Ok(check_conformance_with(
        model,
        mm,
        CheckOptions {
            skip_constraints: false,
            ignore_metamodel_ref: true,
        },
    )?
    .is_empty())
}
