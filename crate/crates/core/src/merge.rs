//! Merging two disjoint metamodels under an equivalence specification.
//!
//! Identity entries fuse a left and a right class into one; interface and
//! implementation entries add a new class inheriting from both with the
//! matching [`InheritanceKind`]. Containment and role multiplicities that
//! would reject models of either input are relaxed so the merge stays
//! conservative; each relaxation is reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::diagnostics::Diagnostics;
use crate::meta_core::{
    AssociationDef, ConstraintDef, ContainmentRule, Facet, InheritanceKind, MetaClass, Metamodel, Multiplicity,
};
use crate::model_store::{check_conformance, MetamodelRef, Model, ModelError};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquivalenceMode {
    Identity,
    Interface,
    Implementation,
}

impl EquivalenceMode {
    pub fn keyword(self) -> &'static str {
        match self {
            EquivalenceMode::Identity => "identity",
            EquivalenceMode::Interface => "interface",
            EquivalenceMode::Implementation => "implementation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceEntry {
    pub left: String,
    pub right: String,
    pub mode: EquivalenceMode,
    /// The fused class for identity, the new subclass otherwise.
    pub new_name: String,
}

impl EquivalenceEntry {
    pub fn new(mode: EquivalenceMode, left: &str, right: &str, new_name: &str) -> Self {
        EquivalenceEntry {
            left: left.into(),
            right: right.into(),
            mode,
            new_name: new_name.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivalenceSpec {
    pub entries: Vec<EquivalenceEntry>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MergeError {
    #[error("name '{0}' is defined more than once in the merge")]
    NameCollision(String),
    #[error("'{0}' is not a valid class name")]
    InvalidName(String),
    #[error("class '{class}' does not exist in the {side} metamodel")]
    UnknownClassInSpec { side: &'static str, class: String },
    #[error("class '{0}' appears in more than one equivalence entry")]
    DuplicateSpecEntry(String),
    #[error("merge conflict: {0}")]
    MergeConflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewrittenConstraint {
    pub name: String,
    /// `(old, new)` context renames; empty when carried verbatim.
    pub substitutions: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlaggedConstraint {
    pub name: String,
    pub reason: String,
}

/// A multiplicity weakened so that models of an input keep conforming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relaxation {
    pub location: String,
    pub before: Multiplicity,
    pub after: Multiplicity,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeReport {
    pub produced_classes: Vec<String>,
    /// Every input constraint lands in exactly one of `rewritten` and `flagged`.
    pub rewritten: Vec<RewrittenConstraint>,
    pub flagged: Vec<FlaggedConstraint>,
    pub relaxed: Vec<Relaxation>,
    /// Class renames applied to left and right names.
    pub left_renames: BTreeMap<String, String>,
    pub right_renames: BTreeMap<String, String>,
}

impl fmt::Display for MergeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.produced_classes {
            writeln!(f, "produced {c}")?;
        }
        for r in &self.rewritten {
            let subs: Vec<String> = r.substitutions.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
            writeln!(f, "rewritten {} [{}]", r.name, subs.join(", "))?;
        }
        for c in &self.flagged {
            writeln!(f, "flagged {}: {}", c.name, c.reason)?;
        }
        for r in &self.relaxed {
            writeln!(f, "relaxed {} {} -> {}", r.location, r.before, r.after)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Left,
    Right,
}

/// Which inputs a merged class (or rule) stems from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Origin {
    left: bool,
    right: bool,
}

impl Origin {
    fn of(side: Side) -> Self {
        match side {
            Side::Left => Origin {
                left: true,
                right: false,
            },
            Side::Right => Origin {
                left: false,
                right: true,
            },
        }
    }

    fn has(self, side: Side) -> bool {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn union(self, other: Origin) -> Origin {
        Origin {
            left: self.left || other.left,
            right: self.right || other.right,
        }
    }

    /// Whether `self` includes an input outside `sides`.
    fn exceeds(self, sides: Origin) -> bool {
        (self.left && !sides.left) || (self.right && !sides.right)
    }

    fn sides(self) -> impl Iterator<Item = Side> {
        [(self.left, Side::Left), (self.right, Side::Right)]
            .into_iter()
            .filter(|(b, _)| *b)
            .map(|(_, s)| s)
    }
}

struct Inputs<'a> {
    left: &'a Metamodel,
    right: &'a Metamodel,
    left_renames: BTreeMap<String, String>,
    right_renames: BTreeMap<String, String>,
}

impl Inputs<'_> {
    fn mm(&self, side: Side) -> &Metamodel {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn rename<'n>(&'n self, side: Side, name: &'n str) -> &'n str {
        let map = match side {
            Side::Left => &self.left_renames,
            Side::Right => &self.right_renames,
        };
        map.get(name).map_or(name, String::as_str)
    }

    /// The input name that `merged` came from on `side`.
    fn preimage(&self, side: Side, merged: &str) -> Option<String> {
        let map = match side {
            Side::Left => &self.left_renames,
            Side::Right => &self.right_renames,
        };
        if let Some((k, _)) = map.iter().find(|(_, v)| *v == merged) {
            return Some(k.clone());
        }
        (self.mm(side).class(merged).is_some() && !map.contains_key(merged)).then(|| merged.to_string())
    }

    fn renamed_class(&self, side: Side, class: &MetaClass) -> MetaClass {
        let mut c = class.clone();
        c.name = self.rename(side, &class.name).to_string();
        for s in &mut c.superclasses {
            s.name = self.rename(side, &s.name).to_string();
        }
        for r in &mut c.containments {
            r.child = self.rename(side, &r.child).to_string();
        }
        c
    }
}

fn check_spec(left: &Metamodel, right: &Metamodel, spec: &EquivalenceSpec) -> Result<(), MergeError> {
    let names = |mm: &Metamodel| -> BTreeSet<String> {
        mm.classes()
            .map(|c| c.name.clone())
            .chain(mm.associations().map(|a| a.name.clone()))
            .collect()
    };
    let (ln, rn) = (names(left), names(right));
    if let Some(n) = ln.intersection(&rn).next() {
        return Err(MergeError::NameCollision(n.clone()));
    }
    let lc: BTreeSet<&str> = left.constraints().iter().map(|c| c.name.as_str()).collect();
    if let Some(c) = right.constraints().iter().find(|c| lc.contains(c.name.as_str())) {
        return Err(MergeError::NameCollision(c.name.clone()));
    }

    let mut seen_left = BTreeSet::new();
    let mut seen_right = BTreeSet::new();
    for e in &spec.entries {
        if left.class(&e.left).is_none() {
            return Err(MergeError::UnknownClassInSpec {
                side: "left",
                class: e.left.clone(),
            });
        }
        if right.class(&e.right).is_none() {
            return Err(MergeError::UnknownClassInSpec {
                side: "right",
                class: e.right.clone(),
            });
        }
        if !seen_left.insert(e.left.as_str()) {
            return Err(MergeError::DuplicateSpecEntry(e.left.clone()));
        }
        if !seen_right.insert(e.right.as_str()) {
            return Err(MergeError::DuplicateSpecEntry(e.right.clone()));
        }
        if !text::is_identifier(&e.new_name) {
            return Err(MergeError::InvalidName(e.new_name.clone()));
        }
    }

    let mut taken: BTreeSet<String> = ln.union(&rn).cloned().collect();
    for e in spec.entries.iter().filter(|e| e.mode == EquivalenceMode::Identity) {
        taken.remove(&e.left);
        taken.remove(&e.right);
    }
    for e in &spec.entries {
        if !taken.insert(e.new_name.clone()) {
            return Err(MergeError::NameCollision(e.new_name.clone()));
        }
    }
    Ok(())
}

fn fuse(name: &str, a: MetaClass, b: MetaClass) -> Result<MetaClass, MergeError> {
    let mut fused = MetaClass::new(name);
    fused.is_abstract = a.is_abstract && b.is_abstract;
    fused.glyph = a.glyph.clone().or(b.glyph.clone());
    fused.attributes = a.attributes.clone();
    for attr in b.attributes {
        match fused.attributes.iter().find(|x| x.name == attr.name) {
            None => fused.attributes.push(attr),
            Some(existing) if *existing == attr => {}
            Some(existing) => {
                return Err(MergeError::MergeConflict(format!(
                    "attribute '{}' is {} in {} but {} in {}",
                    attr.name, existing.value_type, a.name, attr.value_type, b.name
                )))
            }
        }
    }
    // one edge per superclass; differing kinds widen to the union of facets
    for s in a.superclasses.into_iter().chain(b.superclasses) {
        match fused.superclasses.iter_mut().find(|x| x.name == s.name) {
            Some(x) if x.kind != s.kind => x.kind = InheritanceKind::Full,
            Some(_) => {}
            None => fused.superclasses.push(s),
        }
    }
    fused.containments = a.containments;
    fused.containments.extend(b.containments);
    for aspect in a.aspects.into_iter().chain(b.aspects) {
        if !fused.aspects.contains(&aspect) {
            fused.aspects.push(aspect);
        }
    }
    Ok(fused)
}

/// Combines rules naming the same child: lowest minimum, highest maximum.
fn combine_rules(rules: Vec<(ContainmentRule, Origin)>) -> Vec<(ContainmentRule, Origin)> {
    let mut out: Vec<(ContainmentRule, Origin)> = Vec::new();
    for (rule, origin) in rules {
        match out.iter_mut().find(|(r, _)| r.child == rule.child) {
            Some((r, o)) => {
                r.multiplicity.min = r.multiplicity.min.min(rule.multiplicity.min);
                r.multiplicity.max = match (r.multiplicity.max, rule.multiplicity.max) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
                *o = o.union(origin);
            }
            None => out.push((rule, origin)),
        }
    }
    out
}

/// Merges `left` and `right` into a metamodel named `{left}_{right}`.
pub fn merge(
    left: &Metamodel,
    right: &Metamodel,
    spec: &EquivalenceSpec,
) -> Result<(Metamodel, MergeReport), MergeError> {
    merge_named(left, right, spec, &format!("{}_{}", left.name, right.name))
}

pub fn merge_named(
    left: &Metamodel,
    right: &Metamodel,
    spec: &EquivalenceSpec,
    name: &str,
) -> Result<(Metamodel, MergeReport), MergeError> {
    check_spec(left, right, spec)?;
    let mut inputs = Inputs {
        left,
        right,
        left_renames: BTreeMap::new(),
        right_renames: BTreeMap::new(),
    };
    for e in spec.entries.iter().filter(|e| e.mode == EquivalenceMode::Identity) {
        inputs.left_renames.insert(e.left.clone(), e.new_name.clone());
        inputs.right_renames.insert(e.right.clone(), e.new_name.clone());
    }
    let identity_right: BTreeSet<&str> = spec
        .entries
        .iter()
        .filter(|e| e.mode == EquivalenceMode::Identity)
        .map(|e| e.right.as_str())
        .collect();

    let mut report = MergeReport::default();
    let mut classes: Vec<(MetaClass, Origin)> = Vec::new();
    let mut rule_origins: BTreeMap<String, Vec<Origin>> = BTreeMap::new();
    for c in left.classes() {
        let renamed = inputs.renamed_class(Side::Left, c);
        let entry = spec
            .entries
            .iter()
            .find(|e| e.mode == EquivalenceMode::Identity && e.left == c.name);
        match entry {
            Some(e) => {
                let other = inputs.renamed_class(Side::Right, right.class(&e.right).expect("checked"));
                let mut origins = vec![Origin::of(Side::Left); renamed.containments.len()];
                origins.extend(vec![Origin::of(Side::Right); other.containments.len()]);
                let fused = fuse(&e.new_name, renamed, other)?;
                rule_origins.insert(fused.name.clone(), origins);
                report.produced_classes.push(fused.name.clone());
                classes.push((
                    fused,
                    Origin {
                        left: true,
                        right: true,
                    },
                ));
            }
            None => {
                rule_origins.insert(
                    renamed.name.clone(),
                    vec![Origin::of(Side::Left); renamed.containments.len()],
                );
                classes.push((renamed, Origin::of(Side::Left)));
            }
        }
    }
    for c in right.classes().filter(|c| !identity_right.contains(c.name.as_str())) {
        let renamed = inputs.renamed_class(Side::Right, c);
        rule_origins.insert(
            renamed.name.clone(),
            vec![Origin::of(Side::Right); renamed.containments.len()],
        );
        classes.push((renamed, Origin::of(Side::Right)));
    }
    for e in spec.entries.iter().filter(|e| e.mode != EquivalenceMode::Identity) {
        let kind = match e.mode {
            EquivalenceMode::Interface => InheritanceKind::Interface,
            _ => InheritanceKind::Implementation,
        };
        let class = MetaClass::new(&e.new_name)
            .inherits(&e.left, kind)
            .inherits(&e.right, kind);
        rule_origins.insert(e.new_name.clone(), Vec::new());
        report.produced_classes.push(e.new_name.clone());
        classes.push((class, Origin::default()));
    }

    let mut merged = Metamodel::new(name, 1);
    let mut class_origin: BTreeMap<String, Origin> = BTreeMap::new();
    let mut rules_with_origin: BTreeMap<String, Vec<(ContainmentRule, Origin)>> = BTreeMap::new();
    for (mut class, origin) in classes {
        let origins = rule_origins.remove(&class.name).unwrap_or_default();
        let tagged = combine_rules(class.containments.drain(..).zip(origins).collect());
        class.containments = tagged.iter().map(|(r, _)| r.clone()).collect();
        class_origin.insert(class.name.clone(), origin);
        rules_with_origin.insert(class.name.clone(), tagged);
        merged
            .add_class(class)
            .map_err(|e| MergeError::NameCollision(e.to_string()))?;
    }

    let mut assoc_origin: BTreeMap<String, Side> = BTreeMap::new();
    for (side, mm) in [(Side::Left, left), (Side::Right, right)] {
        for a in mm.associations() {
            let mut a: AssociationDef = a.clone();
            for r in &mut a.roles {
                r.endpoint = inputs.rename(side, &r.endpoint).to_string();
            }
            assoc_origin.insert(a.name.clone(), side);
            merged
                .add_association(a)
                .map_err(|e| MergeError::NameCollision(e.to_string()))?;
        }
    }

    for (side, mm) in [(Side::Left, left), (Side::Right, right)] {
        for c in mm.constraints() {
            let context = c.expr.context.clone();
            let inheritance = spec.entries.iter().find(|e| {
                e.mode != EquivalenceMode::Identity
                    && match side {
                        Side::Left => e.left == context,
                        Side::Right => e.right == context,
                    }
            });
            let mut def: ConstraintDef = c.clone();
            if let Some(e) = inheritance {
                report.flagged.push(FlaggedConstraint {
                    name: c.name.clone(),
                    reason: format!(
                        "context {context} is a source of {} class {}; review whether it should apply there",
                        e.mode.keyword(),
                        e.new_name
                    ),
                });
            } else {
                let renamed = inputs.rename(side, &context).to_string();
                let substitutions = if renamed != context {
                    def.expr.context = renamed.clone();
                    vec![(context, renamed)]
                } else {
                    Vec::new()
                };
                report.rewritten.push(RewrittenConstraint {
                    name: c.name.clone(),
                    substitutions,
                });
            }
            merged
                .add_constraint(def)
                .map_err(|e| MergeError::NameCollision(e.to_string()))?;
        }
    }

    relax(
        &mut merged,
        &inputs,
        &class_origin,
        &rules_with_origin,
        &assoc_origin,
        &mut report,
    );

    let errors: Diagnostics = merged.validate().into_iter().filter(|d| d.is_error()).collect();
    if !errors.is_empty() {
        let msgs: Vec<String> = errors.iter().map(|d| d.to_string()).collect();
        return Err(MergeError::MergeConflict(msgs.join("; ")));
    }
    report.left_renames = inputs.left_renames;
    report.right_renames = inputs.right_renames;
    Ok((merged, report))
}

fn conforming(mm: &Metamodel, sup: &str, facet: Facet) -> BTreeSet<String> {
    mm.descendants(sup, facet).into_iter().map(String::from).collect()
}

/// The part of a merged class set that stems from `side`.
fn side_part(set: &BTreeSet<String>, origin: &BTreeMap<String, Origin>, side: Side) -> BTreeSet<String> {
    set.iter()
        .filter(|c| origin.get(*c).is_some_and(|o| o.has(side)))
        .cloned()
        .collect()
}

/// Whether the classes conforming to `merged_sup` that stem from one of
/// `sides` differ from what conformed in that input.
fn changed(
    merged: &Metamodel,
    inputs: &Inputs<'_>,
    origin: &BTreeMap<String, Origin>,
    merged_sup: &str,
    sides: Origin,
    facet: Facet,
) -> bool {
    let now = conforming(merged, merged_sup, facet);
    sides.sides().any(|side| {
        let Some(orig_sup) = inputs.preimage(side, merged_sup) else {
            return true;
        };
        let before: BTreeSet<String> = conforming(inputs.mm(side), &orig_sup, facet)
            .iter()
            .map(|c| inputs.rename(side, c).to_string())
            .collect();
        side_part(&now, origin, side) != before
    })
}

fn foreign(set: &BTreeSet<String>, origin: &BTreeMap<String, Origin>, sides: Origin) -> bool {
    set.iter().any(|c| origin.get(c).is_some_and(|o| o.exceeds(sides)))
}

fn relax(
    merged: &mut Metamodel,
    inputs: &Inputs<'_>,
    origin: &BTreeMap<String, Origin>,
    rules: &BTreeMap<String, Vec<(ContainmentRule, Origin)>>,
    assoc_origin: &BTreeMap<String, Side>,
    report: &mut MergeReport,
) {
    let mut rule_updates = Vec::new();
    for (owner, tagged) in rules {
        let applies = conforming(merged, owner, Facet::Containment);
        for (i, (rule, sides)) in tagged.iter().enumerate() {
            let counted = conforming(merged, &rule.child, Facet::Containment);
            let app_changed = changed(merged, inputs, origin, owner, *sides, Facet::Containment);
            let app_foreign = foreign(&applies, origin, *sides);
            let counted_changed = changed(merged, inputs, origin, &rule.child, *sides, Facet::Containment);
            let counted_foreign = foreign(&counted, origin, *sides);
            let before = rule.multiplicity;
            let after = if app_changed {
                Multiplicity::ANY
            } else if app_foreign {
                Multiplicity::new(
                    0,
                    if counted_foreign || counted_changed {
                        None
                    } else {
                        before.max
                    },
                )
            } else if counted_changed {
                Multiplicity::new(before.min, None)
            } else {
                before
            };
            if after != before {
                rule_updates.push((owner.clone(), i, after));
                report.relaxed.push(Relaxation {
                    location: format!("{owner} contains {}", rule.child),
                    before,
                    after,
                });
            }
        }
    }
    for (owner, i, after) in rule_updates {
        merged.class_mut(&owner).expect("merged class").containments[i].multiplicity = after;
    }

    let mut role_updates = Vec::new();
    for assoc in merged.associations() {
        let sides = Origin::of(assoc_origin[&assoc.name]);
        for (i, role) in assoc.roles.iter().enumerate() {
            if role.multiplicity.min == 0 {
                continue;
            }
            let players = conforming(merged, &role.endpoint, Facet::Roles);
            if foreign(&players, origin, sides) || changed(merged, inputs, origin, &role.endpoint, sides, Facet::Roles)
            {
                let after = Multiplicity::new(0, role.multiplicity.max);
                role_updates.push((assoc.name.clone(), i, after));
                report.relaxed.push(Relaxation {
                    location: format!("{}.{}", assoc.name, role.name),
                    before: role.multiplicity,
                    after,
                });
            }
        }
    }
    for (assoc, i, after) in role_updates {
        merged.associations.get_mut(&assoc).expect("merged association").roles[i].multiplicity = after;
    }
}

/// Conformance of a model to a merged metamodel.
pub fn check_merged_conformance(model: &Model, merged: &Metamodel) -> Result<Diagnostics, ModelError> {
    check_conformance(model, merged)
}

/// A copy of `model` with classes renamed and retargeted at `merged`.
pub fn translate_model(model: &Model, renames: &BTreeMap<String, String>, merged: &Metamodel) -> Model {
    let mut out = model.clone();
    out.metamodel = MetamodelRef {
        name: merged.name.clone(),
        version: merged.version,
    };
    for e in out.entities.values_mut() {
        if let Some(n) = renames.get(&e.class) {
            e.class = n.clone();
        }
    }
    out
}
