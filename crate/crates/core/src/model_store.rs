//! Instance graphs: entities, links, attribute values and the containment
//! forest, plus conformance checking against a metamodel.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::clones::CloneRegistry;
use crate::constraints;
use crate::diagnostics::{DiagCode, Diagnostic, Diagnostics, Location};
use crate::meta_core::{Facet, FlattenedClass, MetaError, Metamodel, Value};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u64);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u64);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown class '{0}'")]
    UnknownClass(String),
    #[error("class '{0}' is abstract and cannot be instantiated")]
    AbstractInstantiation(String),
    #[error("{parent} may not contain an instance of {child}")]
    IllegalContainment { parent: String, child: String },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown association '{0}'")]
    UnknownAssociation(String),
    #[error("association '{association}' has no role '{role}'")]
    UnknownRole { association: String, role: String },
    #[error("role '{role}' of '{association}' is not bound")]
    MissingRole { association: String, role: String },
    #[error("{entity} ({class}) cannot play role '{role}' which requires {endpoint}")]
    RoleTypeMismatch {
        entity: EntityId,
        class: String,
        role: String,
        endpoint: String,
    },
    #[error("class '{class}' has no attribute '{attribute}'")]
    UnknownAttribute { class: String, attribute: String },
    #[error("attribute '{attribute}' expects {expected}, got {found}")]
    TypeMismatch {
        attribute: String,
        expected: String,
        found: String,
    },
    #[error("model conforms to {found} but the metamodel is {expected}")]
    MetamodelMismatch { expected: String, found: String },
    #[error("'{0}' is not a valid entity name")]
    InvalidName(String),
    #[error("no entity at path '{0}'")]
    UnresolvedPath(String),
    #[error("path '{0}' is ambiguous")]
    AmbiguousPath(String),
}

impl From<MetaError> for ModelError {
    fn from(e: MetaError) -> Self {
        match e {
            MetaError::UnknownClass(c) => ModelError::UnknownClass(c),
            MetaError::UnknownAssociation(a) => ModelError::UnknownAssociation(a),
            MetaError::Duplicate(d) => ModelError::UnknownClass(d),
        }
    }
}

/// Copy-on-write state of an entity that corresponds to a prototype entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneInfo {
    pub origin: EntityId,
    pub modified: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    pub class: String,
    pub attributes: BTreeMap<String, Value>,
    pub extensions: BTreeMap<String, String>,
    pub parent: Option<EntityId>,
    pub children: Vec<EntityId>,
    pub clone_info: Option<CloneInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub association: String,
    pub ends: BTreeMap<String, EntityId>,
    /// `None` places the link at model scope.
    pub container: Option<EntityId>,
}

impl Link {
    pub fn touches(&self, e: EntityId) -> bool {
        self.ends.values().any(|x| *x == e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetamodelRef {
    pub name: String,
    pub version: u64,
}

impl fmt::Display for MetamodelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} version {}", self.name, self.version)
    }
}

/// Everything removed by one deletion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Removal {
    pub entities: Vec<EntityId>,
    pub links: Vec<LinkId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub skip_constraints: bool,
    /// Check against a metamodel other than the one the model names.
    pub ignore_metamodel_ref: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub id: String,
    pub metamodel: MetamodelRef,
    pub(crate) entities: BTreeMap<EntityId, Entity>,
    pub(crate) links: BTreeMap<LinkId, Link>,
    pub(crate) roots: Vec<EntityId>,
    pub(crate) next_entity: u64,
    pub(crate) next_link: u64,
    pub(crate) registry: CloneRegistry,
}

impl Model {
    pub fn new(id: impl Into<String>, mm: &Metamodel) -> Self {
        Model::with_ref(
            id,
            MetamodelRef {
                name: mm.name.clone(),
                version: mm.version,
            },
        )
    }

    pub fn with_ref(id: impl Into<String>, metamodel: MetamodelRef) -> Self {
        Model {
            id: id.into(),
            metamodel,
            entities: BTreeMap::new(),
            links: BTreeMap::new(),
            roots: Vec::new(),
            next_entity: 1,
            next_link: 1,
            registry: CloneRegistry::default(),
        }
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entity> {
        self.entities.get(&id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn roots(&self) -> &[EntityId] {
        &self.roots
    }

    pub fn registry(&self) -> &CloneRegistry {
        &self.registry
    }

    /// The id the next instantiated entity will receive.
    pub fn next_entity_id(&self) -> EntityId {
        EntityId(self.next_entity)
    }

    pub fn next_link_id(&self) -> LinkId {
        LinkId(self.next_link)
    }

    fn get(&self, id: EntityId) -> Result<&Entity, ModelError> {
        self.entities.get(&id).ok_or(ModelError::UnknownEntity(id))
    }

    /// Creates an entity with default attribute values.
    pub fn instantiate(
        &mut self,
        mm: &Metamodel,
        class: &str,
        parent: Option<EntityId>,
    ) -> Result<EntityId, ModelError> {
        let name = format!("{class}{}", self.next_entity);
        self.instantiate_named(mm, class, parent, &name)
    }

    pub fn instantiate_named(
        &mut self,
        mm: &Metamodel,
        class: &str,
        parent: Option<EntityId>,
        name: &str,
    ) -> Result<EntityId, ModelError> {
        let cls = mm
            .class(class)
            .ok_or_else(|| ModelError::UnknownClass(class.to_string()))?;
        if cls.is_abstract {
            return Err(ModelError::AbstractInstantiation(class.to_string()));
        }
        if !text::is_identifier(name) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        if let Some(p) = parent {
            let parent_class = &self.get(p)?.class;
            if !mm.permits_containment(parent_class, class) {
                return Err(ModelError::IllegalContainment {
                    parent: parent_class.clone(),
                    child: class.to_string(),
                });
            }
        }
        let attributes = mm
            .effective_features(class)?
            .attributes
            .into_iter()
            .map(|a| (a.name, a.default))
            .collect();
        Ok(self.insert_entity(parent, name.to_string(), class.to_string(), attributes, None))
    }

    /// Inserts an entity without consulting any metamodel.
    pub(crate) fn insert_entity(
        &mut self,
        parent: Option<EntityId>,
        name: String,
        class: String,
        attributes: BTreeMap<String, Value>,
        clone_info: Option<CloneInfo>,
    ) -> EntityId {
        let id = EntityId(self.next_entity);
        self.next_entity += 1;
        self.entities.insert(
            id,
            Entity {
                id,
                name,
                class,
                attributes,
                extensions: BTreeMap::new(),
                parent,
                children: Vec::new(),
                clone_info,
            },
        );
        match parent {
            Some(p) => self.entities.get_mut(&p).expect("parent checked").children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    /// Creates a link of `association` binding every declared role.
    pub fn connect<'a>(
        &mut self,
        mm: &Metamodel,
        association: &str,
        ends: impl IntoIterator<Item = (&'a str, EntityId)>,
        container: Option<EntityId>,
    ) -> Result<LinkId, ModelError> {
        let assoc = mm
            .association(association)
            .ok_or_else(|| ModelError::UnknownAssociation(association.to_string()))?;
        let ends: BTreeMap<String, EntityId> = ends.into_iter().map(|(r, e)| (r.to_string(), e)).collect();
        for role in ends.keys() {
            if assoc.role(role).is_none() {
                return Err(ModelError::UnknownRole {
                    association: association.to_string(),
                    role: role.clone(),
                });
            }
        }
        for role in &assoc.roles {
            let Some(&e) = ends.get(&role.name) else {
                return Err(ModelError::MissingRole {
                    association: association.to_string(),
                    role: role.name.clone(),
                });
            };
            let class = &self.get(e)?.class;
            if !mm.conforms(class, &role.endpoint, Facet::Roles) {
                return Err(ModelError::RoleTypeMismatch {
                    entity: e,
                    class: class.clone(),
                    role: role.name.clone(),
                    endpoint: role.endpoint.clone(),
                });
            }
        }
        if let Some(c) = container {
            self.get(c)?;
        }
        Ok(self.insert_link(association.to_string(), ends, container))
    }

    pub(crate) fn insert_link(
        &mut self,
        association: String,
        ends: BTreeMap<String, EntityId>,
        container: Option<EntityId>,
    ) -> LinkId {
        let id = LinkId(self.next_link);
        self.next_link += 1;
        self.links.insert(
            id,
            Link {
                id,
                association,
                ends,
                container,
            },
        );
        id
    }

    /// Stores an attribute value. On a clone the attribute becomes locally
    /// modified and stops tracking its prototype.
    pub fn set_attribute(
        &mut self,
        mm: &Metamodel,
        id: EntityId,
        attribute: &str,
        value: Value,
    ) -> Result<(), ModelError> {
        let class = self.get(id)?.class.clone();
        let flat = mm.effective_features(&class)?;
        let def = flat.attribute(attribute).ok_or_else(|| ModelError::UnknownAttribute {
            class: class.clone(),
            attribute: attribute.to_string(),
        })?;
        if !value.conforms_to(&def.value_type) {
            return Err(ModelError::TypeMismatch {
                attribute: attribute.to_string(),
                expected: def.value_type.to_string(),
                found: value.to_string(),
            });
        }
        let entity = self.entities.get_mut(&id).expect("checked above");
        entity.attributes.insert(attribute.to_string(), value);
        if let Some(info) = entity.clone_info.as_mut() {
            info.modified.insert(attribute.to_string());
        }
        Ok(())
    }

    /// Attaches a name/value annotation to exactly one entity. Last write wins.
    pub fn annotate(&mut self, id: EntityId, name: &str, value: &str) -> Result<(), ModelError> {
        let entity = self.entities.get_mut(&id).ok_or(ModelError::UnknownEntity(id))?;
        entity.extensions.insert(name.to_string(), value.to_string());
        Ok(())
    }

    pub fn rename(&mut self, id: EntityId, name: &str) -> Result<(), ModelError> {
        if !text::is_identifier(name) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        let entity = self.entities.get_mut(&id).ok_or(ModelError::UnknownEntity(id))?;
        entity.name = name.to_string();
        Ok(())
    }

    /// The entity's class with all inherited features.
    pub fn reflect(&self, mm: &Metamodel, id: EntityId) -> Result<FlattenedClass, ModelError> {
        let class = &self.get(id)?.class;
        Ok(mm.effective_features(class)?)
    }

    /// The entity and all its descendants in pre-order.
    pub fn subtree(&self, root: EntityId) -> Vec<EntityId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let Some(e) = self.entities.get(&id) else { continue };
            out.push(id);
            stack.extend(e.children.iter().rev().copied());
        }
        out
    }

    /// Whether `ancestor` is `id` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, ancestor: EntityId, id: EntityId) -> bool {
        let mut cur = Some(id);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.entities.get(&c).and_then(|e| e.parent);
        }
        false
    }

    /// Links whose container and every end lie inside `root`'s subtree.
    pub fn internal_links(&self, root: EntityId) -> Vec<LinkId> {
        let members: BTreeSet<EntityId> = self.subtree(root).into_iter().collect();
        self.links
            .values()
            .filter(|l| {
                l.container.is_some_and(|c| members.contains(&c)) && l.ends.values().all(|e| members.contains(e))
            })
            .map(|l| l.id)
            .collect()
    }

    /// Deletes an entity's subtree and every link that lives in it or has an
    /// end in it.
    pub fn delete_entity(&mut self, id: EntityId) -> Result<Removal, ModelError> {
        let parent = self.get(id)?.parent;
        let doomed: BTreeSet<EntityId> = self.subtree(id).into_iter().collect();
        match parent {
            Some(p) => {
                if let Some(pe) = self.entities.get_mut(&p) {
                    pe.children.retain(|c| *c != id);
                }
            }
            None => self.roots.retain(|c| *c != id),
        }
        let links: Vec<LinkId> = self
            .links
            .values()
            .filter(|l| l.container.is_some_and(|c| doomed.contains(&c)) || l.ends.values().any(|e| doomed.contains(e)))
            .map(|l| l.id)
            .collect();
        for l in &links {
            self.links.remove(l);
        }
        for e in &doomed {
            self.entities.remove(e);
        }
        Ok(Removal {
            entities: doomed.into_iter().collect(),
            links,
        })
    }

    pub fn delete_link(&mut self, id: LinkId) -> Result<Link, ModelError> {
        self.links.remove(&id).ok_or(ModelError::UnknownLink(id))
    }

    /// `/`-separated names from a root.
    pub fn path_of(&self, id: EntityId) -> String {
        let mut names = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            match self.entities.get(&c) {
                Some(e) => {
                    names.push(e.name.as_str());
                    cur = e.parent;
                }
                None => return id.to_string(),
            }
        }
        names.reverse();
        format!("/{}", names.join("/"))
    }

    pub fn link_path(&self, id: LinkId) -> String {
        match self.links.get(&id).and_then(|l| l.container) {
            Some(c) => format!("{}/{}", self.path_of(c), id),
            None => format!("/{id}"),
        }
    }

    pub fn location_path(&self, loc: &Location) -> String {
        match loc {
            Location::Entity(e) => self.path_of(*e),
            Location::Link(l) => self.link_path(*l),
            other => other.to_string(),
        }
    }

    /// Resolves `/a/b/c` or `#12`.
    pub fn resolve(&self, path: &str) -> Result<EntityId, ModelError> {
        if let Some(num) = path.strip_prefix('#') {
            let id = num
                .parse()
                .map(EntityId)
                .map_err(|_| ModelError::UnresolvedPath(path.to_string()))?;
            return self.get(id).map(|e| e.id);
        }
        let mut candidates: &[EntityId] = &self.roots;
        let mut found = None;
        let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        if segments.is_empty() {
            return Err(ModelError::UnresolvedPath(path.to_string()));
        }
        for seg in segments {
            let mut matches = candidates.iter().filter(|c| self.entities[*c].name == seg);
            let hit = *matches
                .next()
                .ok_or_else(|| ModelError::UnresolvedPath(path.to_string()))?;
            if matches.next().is_some() {
                return Err(ModelError::AmbiguousPath(path.to_string()));
            }
            found = Some(hit);
            candidates = &self.entities[&hit].children;
        }
        Ok(found.expect("at least one segment"))
    }

    /// Verifies the containment forest and reference integrity.
    pub fn check_forest(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<(EntityId, Option<EntityId>)> = self.roots.iter().rev().map(|r| (*r, None)).collect();
        while let Some((id, parent)) = stack.pop() {
            let e = self
                .entities
                .get(&id)
                .ok_or_else(|| format!("{id} listed but missing"))?;
            if e.parent != parent {
                return Err(format!("{id} has parent {:?}, expected {:?}", e.parent, parent));
            }
            if !seen.insert(id) {
                return Err(format!("{id} reached twice"));
            }
            stack.extend(e.children.iter().rev().map(|c| (*c, Some(id))));
        }
        if seen.len() != self.entities.len() {
            return Err(format!(
                "{} entities unreachable from roots",
                self.entities.len() - seen.len()
            ));
        }
        if let Some(max) = self.entities.keys().next_back() {
            if max.0 >= self.next_entity {
                return Err(format!("entity counter {} not above {max}", self.next_entity));
            }
        }
        if let Some(max) = self.links.keys().next_back() {
            if max.0 >= self.next_link {
                return Err(format!("link counter {} not above {max}", self.next_link));
            }
        }
        for l in self.links.values() {
            if let Some(c) = l.container {
                if !self.entities.contains_key(&c) {
                    return Err(format!("{} lives in missing {c}", l.id));
                }
            }
            for e in l.ends.values() {
                if !self.entities.contains_key(e) {
                    return Err(format!("{} ends at missing {e}", l.id));
                }
            }
        }
        Ok(())
    }

    fn check_ref(&self, mm: &Metamodel) -> Result<(), ModelError> {
        if self.metamodel.name != mm.name || self.metamodel.version != mm.version {
            return Err(ModelError::MetamodelMismatch {
                expected: format!("{} version {}", mm.name, mm.version),
                found: self.metamodel.to_string(),
            });
        }
        Ok(())
    }
}

/// Structural and constraint conformance. Empty diagnostics means the model
/// is well formed.
pub fn check_conformance(model: &Model, mm: &Metamodel) -> Result<Diagnostics, ModelError> {
    check_conformance_with(model, mm, CheckOptions::default())
}

pub fn check_conformance_with(model: &Model, mm: &Metamodel, opts: CheckOptions) -> Result<Diagnostics, ModelError> {
    if !opts.ignore_metamodel_ref {
        model.check_ref(mm)?;
    }
    let mut diags = Vec::new();

    // flattened features of every class in use, if the class is known
    let mut flat: BTreeMap<&str, Option<FlattenedClass>> = BTreeMap::new();
    for e in model.entities.values() {
        flat.entry(e.class.as_str())
            .or_insert_with(|| mm.effective_features(&e.class).ok());
    }
    let known = |e: &Entity| flat[e.class.as_str()].as_ref();

    for e in model.entities.values() {
        match mm.class(&e.class) {
            None => diags.push(Diagnostic::error(
                DiagCode::UnknownClass,
                Location::Entity(e.id),
                format!("{} is an instance of unknown class {}", e.name, e.class),
            )),
            Some(c) if c.is_abstract => diags.push(Diagnostic::error(
                DiagCode::AbstractInstance,
                Location::Entity(e.id),
                format!("{} is an instance of abstract class {}", e.name, e.class),
            )),
            Some(_) => {}
        }
    }

    for e in model.entities.values() {
        let Some(f) = known(e) else { continue };
        for (name, value) in &e.attributes {
            match f.attribute(name) {
                None => diags.push(Diagnostic::error(
                    DiagCode::UnknownAttribute,
                    Location::Entity(e.id),
                    format!("{} has no attribute '{name}'", e.class),
                )),
                Some(def) if !value.conforms_to(&def.value_type) => diags.push(Diagnostic::error(
                    DiagCode::AttributeType,
                    Location::Entity(e.id),
                    format!("attribute '{name}' = {value} does not match {}", def.value_type),
                )),
                Some(_) => {}
            }
        }
    }

    for e in model.entities.values() {
        let Some(p) = e.parent.and_then(|p| model.entities.get(&p)) else {
            continue;
        };
        if known(e).is_none() || known(p).is_none() {
            continue;
        }
        if !mm.permits_containment(&p.class, &e.class) {
            diags.push(Diagnostic::error(
                DiagCode::IllegalContainment,
                Location::Entity(e.id),
                format!(
                    "{} ({}) may not be contained in {} ({})",
                    e.name, e.class, p.name, p.class
                ),
            ));
        }
    }

    for e in model.entities.values() {
        let Some(f) = known(e) else { continue };
        for rule in &f.containments {
            let count = e
                .children
                .iter()
                .filter_map(|c| model.entities.get(c))
                .filter(|c| mm.conforms(&c.class, &rule.child, Facet::Containment))
                .count();
            if !rule.multiplicity.admits(count) {
                diags.push(Diagnostic::error(
                    DiagCode::ContainmentMultiplicity,
                    Location::Entity(e.id),
                    format!(
                        "{} contains {count} {} but requires {}",
                        e.name, rule.child, rule.multiplicity
                    ),
                ));
            }
        }
    }

    for l in model.links.values() {
        let Some(assoc) = mm.association(&l.association) else {
            diags.push(Diagnostic::error(
                DiagCode::UnknownAssociation,
                Location::Link(l.id),
                format!("link of unknown association {}", l.association),
            ));
            continue;
        };
        let mut dangling = Vec::new();
        let mut problems = Vec::new();
        if let Some(c) = l.container {
            if !model.entities.contains_key(&c) {
                dangling.push(format!("container {c} does not exist"));
            }
        }
        for role in &assoc.roles {
            match l.ends.get(&role.name) {
                None => problems.push(format!("role '{}' unbound", role.name)),
                Some(id) => match model.entities.get(id) {
                    None => dangling.push(format!("role '{}' ends at missing {id}", role.name)),
                    Some(end) if !mm.conforms(&end.class, &role.endpoint, Facet::Roles) => problems.push(format!(
                        "role '{}' bound to {} ({}) which is not a {}",
                        role.name, end.name, end.class, role.endpoint
                    )),
                    Some(_) => {}
                },
            }
        }
        for role in l.ends.keys() {
            if assoc.role(role).is_none() {
                problems.push(format!("undeclared role '{role}'"));
            }
        }
        if !dangling.is_empty() {
            dangling.extend(problems);
            diags.push(Diagnostic::error(
                DiagCode::DanglingReference,
                Location::Link(l.id),
                dangling.join("; "),
            ));
        } else if !problems.is_empty() {
            diags.push(Diagnostic::error(
                DiagCode::RoleMismatch,
                Location::Link(l.id),
                format!("{} link: {}", l.association, problems.join("; ")),
            ));
        }
    }

    for assoc in mm.associations() {
        for role in &assoc.roles {
            if role.multiplicity == crate::meta_core::Multiplicity::ANY {
                continue;
            }
            for e in model.entities.values() {
                if known(e).is_none() || !mm.conforms(&e.class, &role.endpoint, Facet::Roles) {
                    continue;
                }
                let count = model
                    .links
                    .values()
                    .filter(|l| l.association == assoc.name && l.ends.get(&role.name) == Some(&e.id))
                    .count();
                if !role.multiplicity.admits(count) {
                    diags.push(Diagnostic::error(
                        DiagCode::RoleMultiplicity,
                        Location::Entity(e.id),
                        format!(
                            "{} plays '{}' of {} {count} time(s) but requires {}",
                            e.name, role.name, assoc.name, role.multiplicity
                        ),
                    ));
                }
            }
        }
    }

    if !opts.skip_constraints {
        for result in constraints::eval_all(model, mm).results {
            for v in result.violations {
                let location = match v.witness {
                    Some(constraints::Witness::Link(l)) => Location::Link(l),
                    Some(constraints::Witness::Entity(e)) => Location::Entity(e),
                    None => Location::Entity(v.context),
                };
                diags.push(Diagnostic::error(
                    DiagCode::ConstraintViolation,
                    location,
                    format!(
                        "constraint {} violated at {}: {}",
                        result.name,
                        model.path_of(v.context),
                        v.message
                    ),
                ));
            }
        }
    }

    Ok(diags)
}
