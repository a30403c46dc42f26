//! Prototypes and clones: instantiation by deep copy, correspondence
//! maintenance, attribute copy-on-write and structural propagation.
//!
//! Every derivation is recorded in the model's [`CloneRegistry`] as a
//! [`CorrespondenceMap`] from the prototype subtree to the derived subtree.
//! For `Clone` maps the correspondence is a bijection; for `Subprototype`
//! maps it is injective and the derived side may carry local additions.
//!
//! The raw mutators on [`Model`] do not consult the registry. The functions
//! in this module are the correspondence-aware counterparts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::meta_core::{Metamodel, Value};
use crate::model_store::{CloneInfo, EntityId, Link, LinkId, Model, ModelError, Removal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivationKind {
    Clone,
    Subprototype,
}

impl DerivationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DerivationKind::Clone => "clone",
            DerivationKind::Subprototype => "subprototype",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceMap {
    pub prototype_root: EntityId,
    pub clone_root: EntityId,
    pub kind: DerivationKind,
    /// Every entity of the prototype subtree to its correspondent.
    pub pairs: BTreeMap<EntityId, EntityId>,
    /// Every internal link of the prototype subtree to its correspondent.
    pub link_pairs: BTreeMap<LinkId, LinkId>,
}

/// All derivations of a model, keyed by derived root.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CloneRegistry {
    pub(crate) maps: BTreeMap<EntityId, CorrespondenceMap>,
}

impl CloneRegistry {
    pub fn maps(&self) -> impl Iterator<Item = &CorrespondenceMap> {
        self.maps.values()
    }

    pub fn map(&self, clone_root: EntityId) -> Option<&CorrespondenceMap> {
        self.maps.get(&clone_root)
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Registers a map without any checks; used when loading models.
    pub(crate) fn insert(&mut self, map: CorrespondenceMap) {
        self.maps.insert(map.clone_root, map);
    }

    /// The map in which `entity` is a derived correspondent, if any.
    pub fn derived_in(&self, entity: EntityId) -> Option<&CorrespondenceMap> {
        self.maps.values().find(|m| m.pairs.values().any(|v| *v == entity))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CloneError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("deriving from {prototype} here would make it derive from itself")]
    DerivationCycle { prototype: EntityId },
    #[error("{parent} lies inside clone {clone_root}; a clone cannot hold elements its prototype lacks")]
    InsideClone { parent: EntityId, clone_root: EntityId },
    #[error("{element} corresponds to a prototype element and changes only through its prototype")]
    DerivedElement { element: String },
    #[error("{entity} is a prototype of {dependents:?}; delete those first")]
    DependentsExist {
        entity: EntityId,
        dependents: Vec<EntityId>,
    },
    #[error("corrupt correspondence: {0}")]
    CorruptCorrespondence(String),
}

/// Outcome of the containment guard for adding under a parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Permit,
    Reject { clone_root: EntityId },
}

/// A structural change already applied to a prototype.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralChange {
    AddEntity(EntityId),
    AddLink(LinkId),
    DeleteEntity(Removal),
    DeleteLink(LinkId),
}

/// Everything propagation created or removed in derived subtrees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropagationSummary {
    pub added_entities: Vec<EntityId>,
    pub added_links: Vec<LinkId>,
    pub removed_entities: Vec<EntityId>,
    pub removed_links: Vec<LinkId>,
    /// Derived roots whose maps were dropped.
    pub dropped_maps: Vec<EntityId>,
}

impl PropagationSummary {
    pub fn is_empty(&self) -> bool {
        *self == PropagationSummary::default()
    }
}

fn entity(model: &Model, id: EntityId) -> Result<&crate::model_store::Entity, ModelError> {
    model.entity(id).ok_or(ModelError::UnknownEntity(id))
}

/// Rejects adding under `parent` when it lies inside a clone.
pub fn add_entity_in_clone_guard(model: &Model, parent: Option<EntityId>, _class: &str) -> Guard {
    let Some(parent) = parent else {
        return Guard::Permit;
    };
    model
        .registry
        .maps
        .values()
        .filter(|m| m.kind == DerivationKind::Clone)
        .find(|m| model.is_ancestor_or_self(m.clone_root, parent))
        .map_or(Guard::Permit, |m| Guard::Reject {
            clone_root: m.clone_root,
        })
}

fn ancestor_related(model: &Model, a: EntityId, b: EntityId) -> bool {
    model.is_ancestor_or_self(a, b) || model.is_ancestor_or_self(b, a)
}

/// Whether placing a new derivation of `prototype` under `parent` would close
/// a cycle in the derivation graph. Map `A` feeds map `B` when `A`'s derived
/// subtree overlaps `B`'s prototype subtree.
fn creates_cycle(model: &Model, prototype: EntityId, parent: Option<EntityId>) -> bool {
    if parent.is_some_and(|q| model.is_ancestor_or_self(prototype, q)) {
        return true;
    }
    let maps: Vec<&CorrespondenceMap> = model.registry.maps.values().collect();
    // maps the new derivation would feed
    let mut stack: Vec<usize> = (0..maps.len())
        .filter(|&i| parent.is_some_and(|q| model.is_ancestor_or_self(maps[i].prototype_root, q)))
        .collect();
    let mut seen = BTreeSet::new();
    while let Some(i) = stack.pop() {
        if !seen.insert(i) {
            continue;
        }
        if ancestor_related(model, maps[i].clone_root, prototype) {
            return true;
        }
        for (j, m) in maps.iter().enumerate() {
            if ancestor_related(model, maps[i].clone_root, m.prototype_root) {
                stack.push(j);
            }
        }
    }
    false
}

fn copy_entity(model: &mut Model, source: EntityId, parent: Option<EntityId>) -> EntityId {
    let src = &model.entities[&source];
    let (name, class, attributes) = (src.name.clone(), src.class.clone(), src.attributes.clone());
    model.insert_entity(
        parent,
        name,
        class,
        attributes,
        Some(CloneInfo {
            origin: source,
            modified: BTreeSet::new(),
        }),
    )
}

fn copy_link(model: &mut Model, link: &Link, pairs: &BTreeMap<EntityId, EntityId>) -> Option<LinkId> {
    let ends = link
        .ends
        .iter()
        .map(|(r, e)| pairs.get(e).map(|c| (r.clone(), *c)))
        .collect::<Option<BTreeMap<_, _>>>()?;
    let container = pairs.get(&link.container?)?;
    Some(model.insert_link(link.association.clone(), ends, Some(*container)))
}

fn derive(
    model: &mut Model,
    mm: &Metamodel,
    prototype: EntityId,
    parent: Option<EntityId>,
    kind: DerivationKind,
) -> Result<EntityId, CloneError> {
    let class = entity(model, prototype)?.class.clone();
    if let Some(p) = parent {
        let parent_class = entity(model, p)?.class.clone();
        if let Guard::Reject { clone_root } = add_entity_in_clone_guard(model, Some(p), &class) {
            return Err(CloneError::InsideClone { parent: p, clone_root });
        }
        if !mm.permits_containment(&parent_class, &class) {
            return Err(ModelError::IllegalContainment {
                parent: parent_class,
                child: class,
            }
            .into());
        }
    }
    if creates_cycle(model, prototype, parent) {
        return Err(CloneError::DerivationCycle { prototype });
    }

    let snapshot = model.clone();
    let result = (|| {
        let mut pairs = BTreeMap::new();
        for x in model.subtree(prototype) {
            let target = if x == prototype {
                parent
            } else {
                let p = model.entities[&x].parent.expect("non-root member of subtree");
                Some(pairs[&p])
            };
            let y = copy_entity(model, x, target);
            pairs.insert(x, y);
        }
        let mut link_pairs = BTreeMap::new();
        for l in model.internal_links(prototype) {
            let link = model.links[&l].clone();
            let copy = copy_link(model, &link, &pairs).expect("internal link ends lie in the subtree");
            link_pairs.insert(l, copy);
        }
        let root = pairs[&prototype];
        model.registry.insert(CorrespondenceMap {
            prototype_root: prototype,
            clone_root: root,
            kind,
            pairs,
            link_pairs,
        });
        // the new subtree may itself be an addition to some prototype
        sync(model)?;
        audit(model)?;
        Ok(root)
    })();
    if result.is_err() {
        *model = snapshot;
    }
    result
}

/// Deep-copies `prototype`'s subtree and its internal links under `parent`
/// and registers a bijective correspondence.
pub fn clone_entity(
    model: &mut Model,
    mm: &Metamodel,
    prototype: EntityId,
    parent: Option<EntityId>,
) -> Result<EntityId, CloneError> {
    derive(model, mm, prototype, parent, DerivationKind::Clone)
}

/// Like [`clone_entity`], but the derived subtree may later gain local
/// additions.
pub fn create_subprototype(
    model: &mut Model,
    mm: &Metamodel,
    prototype: EntityId,
    parent: Option<EntityId>,
) -> Result<EntityId, CloneError> {
    derive(model, mm, prototype, parent, DerivationKind::Subprototype)
}

/// Pushes the current value of `attribute` on `entity` to every derived
/// correspondent that has not modified it, transitively through chains.
/// Returns the updated entities in propagation order.
pub fn propagate_attribute(model: &mut Model, id: EntityId, attribute: &str) -> Result<Vec<EntityId>, CloneError> {
    let e = entity(model, id)?;
    if !e.attributes.contains_key(attribute) {
        return Err(ModelError::UnknownAttribute {
            class: e.class.clone(),
            attribute: attribute.to_string(),
        }
        .into());
    }
    let mut updated = Vec::new();
    let mut work = VecDeque::from([id]);
    while let Some(x) = work.pop_front() {
        let Some(value) = model
            .entities
            .get(&x)
            .and_then(|e| e.attributes.get(attribute))
            .cloned()
        else {
            continue;
        };
        let targets: Vec<EntityId> = model
            .registry
            .maps
            .values()
            .filter_map(|m| m.pairs.get(&x).copied())
            .collect();
        for y in targets {
            let Some(ye) = model.entities.get_mut(&y) else { continue };
            if ye.clone_info.as_ref().is_some_and(|i| i.modified.contains(attribute)) {
                continue;
            }
            ye.attributes.insert(attribute.to_string(), value.clone());
            updated.push(y);
            work.push_back(y);
        }
    }
    Ok(updated)
}

/// Copies every prototype element that lacks a correspondent into the
/// derived subtrees, until no map changes.
fn sync(model: &mut Model) -> Result<PropagationSummary, CloneError> {
    let mut summary = PropagationSummary::default();
    loop {
        let mut changed = false;
        let roots: Vec<EntityId> = model.registry.maps.keys().copied().collect();
        for root in roots {
            let mut map = model.registry.maps.remove(&root).expect("key listed above");
            let outcome = sync_map(model, &mut map, &mut summary);
            model.registry.maps.insert(root, map);
            changed |= outcome?;
        }
        if !changed {
            return Ok(summary);
        }
    }
}

fn sync_map(
    model: &mut Model,
    map: &mut CorrespondenceMap,
    summary: &mut PropagationSummary,
) -> Result<bool, CloneError> {
    let mut changed = false;
    for x in model.subtree(map.prototype_root) {
        if map.pairs.contains_key(&x) {
            continue;
        }
        let parent = model.entities[&x].parent;
        let target = parent.and_then(|p| map.pairs.get(&p).copied()).ok_or_else(|| {
            CloneError::CorruptCorrespondence(format!("{x} has no corresponding parent in {}", map.clone_root))
        })?;
        let y = copy_entity(model, x, Some(target));
        map.pairs.insert(x, y);
        summary.added_entities.push(y);
        changed = true;
    }
    for l in model.internal_links(map.prototype_root) {
        if map.link_pairs.contains_key(&l) {
            continue;
        }
        let link = model.links[&l].clone();
        let copy = copy_link(model, &link, &map.pairs)
            .ok_or_else(|| CloneError::CorruptCorrespondence(format!("{l} has unmapped ends in {}", map.clone_root)))?;
        map.link_pairs.insert(l, copy);
        summary.added_links.push(copy);
        changed = true;
    }
    Ok(changed)
}

/// Removes the correspondents of everything in `removal`, transitively.
fn propagate_removal(model: &mut Model, removal: Removal) -> PropagationSummary {
    let mut summary = PropagationSummary::default();
    let mut pending = removal;
    loop {
        let gone_e: BTreeSet<EntityId> = pending.entities.iter().copied().collect();
        let gone_l: BTreeSet<LinkId> = pending.links.iter().copied().collect();
        let mut doomed_e = Vec::new();
        let mut doomed_l = Vec::new();
        for map in model.registry.maps.values_mut() {
            for k in &gone_e {
                if let Some(v) = map.pairs.remove(k) {
                    doomed_e.push(v);
                }
            }
            map.pairs.retain(|_, v| !gone_e.contains(v));
            for k in &gone_l {
                if let Some(v) = map.link_pairs.remove(k) {
                    doomed_l.push(v);
                }
            }
            map.link_pairs.retain(|_, v| !gone_l.contains(v));
        }
        let dropped: Vec<EntityId> = model
            .registry
            .maps
            .values()
            .filter(|m| !model.entities.contains_key(&m.prototype_root) || !model.entities.contains_key(&m.clone_root))
            .map(|m| m.clone_root)
            .collect();
        for root in dropped {
            let map = model.registry.maps.remove(&root).expect("listed above");
            for v in map.pairs.values() {
                if let Some(e) = model.entities.get_mut(v) {
                    e.clone_info = None;
                }
            }
            summary.dropped_maps.push(root);
        }

        pending = Removal::default();
        for v in doomed_e {
            if model.entities.contains_key(&v) {
                let r = model.delete_entity(v).expect("existence checked");
                pending.entities.extend(r.entities);
                pending.links.extend(r.links);
            }
        }
        for l in doomed_l {
            if model.delete_link(l).is_ok() {
                pending.links.push(l);
            }
        }
        if pending.entities.is_empty() && pending.links.is_empty() {
            return summary;
        }
        summary.removed_entities.extend(&pending.entities);
        summary.removed_links.extend(&pending.links);
    }
}

/// Brings every derived subtree in line with a change already applied to a
/// prototype, then audits the registry.
pub fn propagate_structure(model: &mut Model, change: StructuralChange) -> Result<PropagationSummary, CloneError> {
    let summary = match change {
        StructuralChange::AddEntity(id) => {
            entity(model, id)?;
            sync(model)?
        }
        StructuralChange::AddLink(id) => {
            model.link(id).ok_or(ModelError::UnknownLink(id))?;
            sync(model)?
        }
        StructuralChange::DeleteEntity(removal) => propagate_removal(model, removal),
        StructuralChange::DeleteLink(id) => propagate_removal(
            model,
            Removal {
                entities: Vec::new(),
                links: vec![id],
            },
        ),
    };
    audit(model)?;
    Ok(summary)
}

/// Runs `op` and rolls the model back if it fails.
fn transactional<T>(model: &mut Model, op: impl FnOnce(&mut Model) -> Result<T, CloneError>) -> Result<T, CloneError> {
    let snapshot = model.clone();
    let result = op(model);
    if result.is_err() {
        *model = snapshot;
    }
    result
}

/// Instantiates `class` under `parent` and propagates the addition.
pub fn add_entity(
    model: &mut Model,
    mm: &Metamodel,
    class: &str,
    parent: Option<EntityId>,
    name: &str,
) -> Result<(EntityId, PropagationSummary), CloneError> {
    if let Guard::Reject { clone_root } = add_entity_in_clone_guard(model, parent, class) {
        return Err(CloneError::InsideClone {
            parent: parent.expect("roots are never inside a clone"),
            clone_root,
        });
    }
    transactional(model, |model| {
        let id = model.instantiate_named(mm, class, parent, name)?;
        let summary = propagate_structure(model, StructuralChange::AddEntity(id))?;
        Ok((id, summary))
    })
}

/// Creates a link and propagates it. Links may not be placed inside a clone.
pub fn connect<'a>(
    model: &mut Model,
    mm: &Metamodel,
    association: &str,
    ends: impl IntoIterator<Item = (&'a str, EntityId)>,
    container: Option<EntityId>,
) -> Result<(LinkId, PropagationSummary), CloneError> {
    if let Guard::Reject { clone_root } = add_entity_in_clone_guard(model, container, association) {
        return Err(CloneError::InsideClone {
            parent: container.expect("roots are never inside a clone"),
            clone_root,
        });
    }
    transactional(model, |model| {
        let id = model.connect(mm, association, ends, container)?;
        let summary = propagate_structure(model, StructuralChange::AddLink(id))?;
        Ok((id, summary))
    })
}

/// Everything that deleting `id` would remove once propagated.
fn cascade(model: &Model, id: EntityId) -> BTreeSet<EntityId> {
    let mut set: BTreeSet<EntityId> = model.subtree(id).into_iter().collect();
    loop {
        let mut grown = Vec::new();
        for map in model.registry.maps.values() {
            // a prototype root never drags its derived root along
            for (k, v) in map.pairs.iter().filter(|(k, _)| **k != map.prototype_root) {
                if set.contains(k) && !set.contains(v) {
                    grown.extend(model.subtree(*v));
                }
            }
        }
        if grown.is_empty() {
            return set;
        }
        set.extend(grown);
    }
}

/// Deletes an entity's subtree and its correspondents everywhere.
///
/// Derived elements can only be removed through their prototype, except for
/// whole derived roots. A prototype with surviving derivations is not
/// deleted.
pub fn delete_entity(model: &mut Model, id: EntityId) -> Result<(Removal, PropagationSummary), CloneError> {
    entity(model, id)?;
    if let Some(map) = model.registry.derived_in(id) {
        if map.clone_root != id {
            return Err(CloneError::DerivedElement {
                element: id.to_string(),
            });
        }
    }
    let doomed = cascade(model, id);
    let dependents: Vec<EntityId> = model
        .registry
        .maps
        .values()
        .filter(|m| doomed.contains(&m.prototype_root) && !doomed.contains(&m.clone_root))
        .map(|m| m.clone_root)
        .collect();
    if !dependents.is_empty() {
        return Err(CloneError::DependentsExist { entity: id, dependents });
    }
    transactional(model, |model| {
        let removal = model.delete_entity(id)?;
        let summary = propagate_structure(model, StructuralChange::DeleteEntity(removal.clone()))?;
        Ok((removal, summary))
    })
}

/// Deletes a link and its correspondents everywhere.
pub fn delete_link(model: &mut Model, id: LinkId) -> Result<PropagationSummary, CloneError> {
    model.link(id).ok_or(ModelError::UnknownLink(id))?;
    if model
        .registry
        .maps
        .values()
        .any(|m| m.link_pairs.values().any(|v| *v == id))
    {
        return Err(CloneError::DerivedElement {
            element: id.to_string(),
        });
    }
    transactional(model, |model| {
        model.delete_link(id)?;
        propagate_structure(model, StructuralChange::DeleteLink(id))
    })
}

/// Sets an attribute (marking it modified on a derived entity) and pushes
/// the value to unmodified correspondents.
pub fn set_attribute(
    model: &mut Model,
    mm: &Metamodel,
    id: EntityId,
    attribute: &str,
    value: Value,
) -> Result<Vec<EntityId>, CloneError> {
    model.set_attribute(mm, id, attribute, value)?;
    propagate_attribute(model, id, attribute)
}

fn corrupt<T>(msg: String) -> Result<T, CloneError> {
    Err(CloneError::CorruptCorrespondence(msg))
}

/// Full structural audit of every correspondence map.
pub fn audit(model: &Model) -> Result<(), CloneError> {
    let mut derived_owner: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    for (root, map) in &model.registry.maps {
        let tag = format!("map {} -> {}", map.prototype_root, map.clone_root);
        if *root != map.clone_root {
            return corrupt(format!("{tag} filed under {root}"));
        }
        for r in [map.prototype_root, map.clone_root] {
            if !model.entities.contains_key(&r) {
                return corrupt(format!("{tag}: root {r} missing"));
            }
        }
        let proto: BTreeSet<EntityId> = model.subtree(map.prototype_root).into_iter().collect();
        let derived: BTreeSet<EntityId> = model.subtree(map.clone_root).into_iter().collect();
        if !map.pairs.keys().copied().eq(proto.iter().copied()) {
            return corrupt(format!("{tag}: keys differ from the prototype subtree"));
        }
        if map.pairs.get(&map.prototype_root) != Some(&map.clone_root) {
            return corrupt(format!("{tag}: roots do not correspond"));
        }
        let values: BTreeSet<EntityId> = map.pairs.values().copied().collect();
        if values.len() != map.pairs.len() {
            return corrupt(format!("{tag}: not injective"));
        }
        if !values.is_subset(&derived) {
            return corrupt(format!("{tag}: correspondents outside the derived subtree"));
        }
        if map.kind == DerivationKind::Clone && values != derived {
            return corrupt(format!("{tag}: clone has elements without a prototype"));
        }
        for (k, v) in &map.pairs {
            let (ke, ve) = (&model.entities[k], &model.entities[v]);
            if ke.class != ve.class {
                return corrupt(format!("{tag}: {k} is {} but {v} is {}", ke.class, ve.class));
            }
            if *k != map.prototype_root {
                let kp = ke.parent.expect("non-root");
                if ve.parent != map.pairs.get(&kp).copied() {
                    return corrupt(format!("{tag}: parent of {v} does not correspond"));
                }
            }
            if ve.clone_info.as_ref().map(|i| i.origin) != Some(*k) {
                return corrupt(format!("{tag}: {v} does not record origin {k}"));
            }
            if let Some(other) = derived_owner.insert(*v, *root) {
                return corrupt(format!("{v} derived in both {other} and {root}"));
            }
        }

        let proto_links: BTreeSet<LinkId> = model.internal_links(map.prototype_root).into_iter().collect();
        if !map.link_pairs.keys().copied().eq(proto_links.iter().copied()) {
            return corrupt(format!("{tag}: link keys differ from the prototype's internal links"));
        }
        let derived_links: BTreeSet<LinkId> = model.internal_links(map.clone_root).into_iter().collect();
        let link_values: BTreeSet<LinkId> = map.link_pairs.values().copied().collect();
        if link_values.len() != map.link_pairs.len() || !link_values.is_subset(&derived_links) {
            return corrupt(format!(
                "{tag}: link correspondence not injective into the derived subtree"
            ));
        }
        if map.kind == DerivationKind::Clone && link_values != derived_links {
            return corrupt(format!("{tag}: clone has links without a prototype"));
        }
        for (k, v) in &map.link_pairs {
            let (kl, vl) = (&model.links[k], &model.links[v]);
            let shape_ok = kl.association == vl.association
                && kl.container.and_then(|c| map.pairs.get(&c).copied()) == vl.container
                && kl.ends.len() == vl.ends.len()
                && kl.ends.iter().all(|(r, e)| vl.ends.get(r) == map.pairs.get(e));
            if !shape_ok {
                return corrupt(format!("{tag}: {k} and {v} differ in shape"));
            }
        }
    }
    for e in model.entities.values() {
        if e.clone_info.is_some() != derived_owner.contains_key(&e.id) {
            return corrupt(format!("{} copy-on-write state disagrees with the registry", e.id));
        }
    }
    let maps: Vec<&CorrespondenceMap> = model.registry.maps.values().collect();
    let feeds = |a: usize, b: usize| ancestor_related(model, maps[a].clone_root, maps[b].prototype_root);
    // Kahn's algorithm over the derivation graph
    let n = maps.len();
    let mut indegree = vec![0usize; n];
    for a in 0..n {
        for (b, d) in indegree.iter_mut().enumerate() {
            if feeds(a, b) {
                *d += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|i| indegree[*i] == 0).collect();
    let mut done = 0;
    while let Some(a) = ready.pop() {
        done += 1;
        for (b, d) in indegree.iter_mut().enumerate() {
            if feeds(a, b) {
                *d -= 1;
                if *d == 0 {
                    ready.push(b);
                }
            }
        }
    }
    if done != n {
        return corrupt("derivation graph has a cycle".into());
    }
    Ok(())
}

/// Indented listing of prototypes and what derives from them.
pub fn derivation_tree(model: &Model) -> String {
    let mut children: BTreeMap<EntityId, Vec<&CorrespondenceMap>> = BTreeMap::new();
    for m in model.registry.maps.values() {
        children.entry(m.prototype_root).or_default().push(m);
    }
    let derived: BTreeSet<EntityId> = model.registry.maps.keys().copied().collect();
    let mut out = String::new();
    fn walk(
        model: &Model,
        children: &BTreeMap<EntityId, Vec<&CorrespondenceMap>>,
        node: EntityId,
        depth: usize,
        out: &mut String,
    ) {
        for m in children.get(&node).into_iter().flatten() {
            let _ = writeln!(
                out,
                "{}{} {} {}",
                "  ".repeat(depth),
                m.kind.as_str(),
                model.path_of(m.clone_root),
                m.clone_root
            );
            walk(model, children, m.clone_root, depth + 1, out);
        }
    }
    for proto in children.keys() {
        if derived.contains(proto) {
            continue;
        }
        let _ = writeln!(out, "prototype {} {proto}", model.path_of(*proto));
        walk(model, &children, *proto, 1, &mut out);
    }
    out
}
