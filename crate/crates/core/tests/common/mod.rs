//! Shared fixtures, seeded generators and independent oracles for the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use metakernel::clones::{self, CorrespondenceMap, DerivationKind};
use metakernel::diagnostics::{DiagCode, Diagnostic, Location};
use metakernel::merge::{EquivalenceEntry, EquivalenceMode, EquivalenceSpec};
use metakernel::meta_core::{
    AssociationDef, AttributeDef, ConstraintDef, InheritanceKind, MetaClass, Metamodel, Multiplicity, RoleDef,
    SuperRef, Value, ValueType,
};
use metakernel::model_store::{EntityId, LinkId, Model};
use metakernel::syntax_io;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    // resolves from any crate in the workspace
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_metamodel(name: &str) -> Metamodel {
    syntax_io::parse_metamodel(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_model(name: &str, mm: &Metamodel) -> Model {
    syntax_io::parse_model(&fixture(name), mm).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The constraint from the port-interconnection language, as published.
pub const SIBLING_OUTPUTS: &str = "OutPort.attachingConnections( BufferedConnection )->forAll( c |
  c.connectionPoints( \"src\" )->theOnly( ).target( ).parent( ).parent( ) =
  c.connectionPoints( \"dst\" )->theOnly( ).target( ).parent( ) )";

// ---------------------------------------------------------------------------
// metamodel generator

#[derive(Debug, Clone)]
pub struct GenOptions {
    /// Prefix for every class, association and attribute name.
    pub prefix: String,
    pub max_classes: usize,
    pub partial_inheritance: bool,
    pub constraints: bool,
    /// Glyphs, aspects and enum literals with quotes, spaces and keywords.
    pub awkward_text: bool,
}

impl GenOptions {
    pub fn new(prefix: &str) -> Self {
        GenOptions {
            prefix: prefix.to_string(),
            max_classes: 8,
            partial_inheritance: true,
            constraints: true,
            awkward_text: false,
        }
    }
}

const AWKWARD: [&str; 8] = [
    "two words",
    "true",
    "enum",
    "",
    "quote\"d",
    "line\nbreak",
    "ünï",
    "tab\t",
];

fn text_value(rng: &mut ChaCha8Rng, awkward: bool) -> String {
    if awkward && rng.gen_bool(0.5) {
        AWKWARD.choose(rng).unwrap().to_string()
    } else {
        format!("v{}", rng.gen_range(0..100))
    }
}

fn multiplicity(rng: &mut ChaCha8Rng) -> Multiplicity {
    if rng.gen_bool(0.4) {
        return Multiplicity::ANY;
    }
    let min = rng.gen_range(0..=2);
    let max = if rng.gen_bool(0.3) {
        None
    } else {
        Some(min + rng.gen_range(0..=2))
    };
    Multiplicity::new(min, max)
}

pub fn random_value(rng: &mut ChaCha8Rng, ty: &ValueType, awkward: bool) -> Value {
    match ty {
        ValueType::String => Value::String(text_value(rng, awkward)),
        ValueType::Integer => Value::Integer(rng.gen_range(-5..=5)),
        ValueType::Real => Value::Real(f64::from(rng.gen_range(-40..=40)) / 8.0),
        ValueType::Boolean => Value::Boolean(rng.gen()),
        ValueType::Enum(lits) => Value::Enum(lits.choose(rng).unwrap().clone()),
    }
}

fn random_type(rng: &mut ChaCha8Rng, awkward: bool) -> ValueType {
    match rng.gen_range(0..5) {
        0 => ValueType::String,
        1 => ValueType::Integer,
        2 => ValueType::Real,
        3 => ValueType::Boolean,
        _ => {
            let mut lits: Vec<String> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let lit = if awkward && rng.gen_bool(0.4) {
                    AWKWARD.choose(rng).unwrap().to_string()
                } else {
                    format!("L{}", rng.gen_range(0..6))
                };
                if !lits.contains(&lit) {
                    lits.push(lit);
                }
            }
            ValueType::Enum(lits)
        }
    }
}

/// A well-formed metamodel whose names all start with `opts.prefix`.
pub fn gen_metamodel(rng: &mut ChaCha8Rng, opts: &GenOptions) -> Metamodel {
    let p = &opts.prefix;
    let mut mm = Metamodel::new(format!("{p}MM"), rng.gen_range(1..=5));
    let n = rng.gen_range(1..=opts.max_classes);
    let names: Vec<String> = (0..n).map(|i| format!("{p}C{i}")).collect();
    for (i, name) in names.iter().enumerate() {
        let mut cls = MetaClass::new(name.clone());
        cls.is_abstract = rng.gen_bool(0.15);
        // supers only point backwards, so specialization is acyclic
        if i > 0 {
            let mut supers: Vec<usize> = (0..i).collect();
            supers.shuffle(rng);
            for s in supers.into_iter().take(rng.gen_range(0..=2)) {
                let kind = if opts.partial_inheritance {
                    *[
                        InheritanceKind::Full,
                        InheritanceKind::Interface,
                        InheritanceKind::Implementation,
                    ]
                    .choose(rng)
                    .unwrap()
                } else {
                    InheritanceKind::Full
                };
                cls.superclasses.push(SuperRef {
                    name: names[s].clone(),
                    kind,
                });
            }
        }
        for j in 0..rng.gen_range(0..=3) {
            let ty = random_type(rng, opts.awkward_text);
            let default = random_value(rng, &ty, opts.awkward_text);
            cls.attributes
                .push(AttributeDef::new(format!("{}a{i}_{j}", p.to_lowercase()), ty, default));
        }
        for _ in 0..rng.gen_range(0..=2) {
            let child = names.choose(rng).unwrap().clone();
            if cls.containments.iter().all(|r| r.child != child) {
                cls = cls.contains(child, multiplicity(rng));
            }
        }
        if rng.gen_bool(0.3) {
            cls.glyph = Some(text_value(rng, opts.awkward_text));
        }
        for _ in 0..rng.gen_range(0..=1) {
            cls.aspects.push(text_value(rng, opts.awkward_text));
        }
        mm.add_class(cls).unwrap();
    }
    for k in 0..rng.gen_range(0..=3) {
        let roles = (0..rng.gen_range(2..=3))
            .map(|r| {
                // role minimums are rarely met by chance, so keep most optional
                let mut m = multiplicity(rng);
                if rng.gen_bool(0.7) {
                    m.min = 0;
                }
                RoleDef::new(format!("r{r}"), names.choose(rng).unwrap().clone(), m)
            })
            .collect();
        mm.add_association(AssociationDef::new(format!("{p}A{k}"), roles))
            .unwrap();
    }
    if opts.constraints {
        for k in 0..rng.gen_range(0..=2) {
            if let Some(text) = constraint_template(rng, &mm) {
                mm.add_constraint(ConstraintDef::parse(format!("{p}K{k}"), &text).unwrap())
                    .unwrap();
            }
        }
    }
    let diags = mm.validate();
    assert!(diags.is_empty(), "generator produced an invalid metamodel: {diags:?}");
    mm
}

/// Constraint shapes with an easily stated meaning; see [`ConstraintShape`].
fn constraint_template(rng: &mut ChaCha8Rng, mm: &Metamodel) -> Option<String> {
    let classes: Vec<&MetaClass> = mm.classes().collect();
    let cls = classes.choose(rng)?;
    let int_attr = cls.attributes.iter().find(|a| a.value_type == ValueType::Integer);
    let assoc = mm.associations().next();
    match (rng.gen_bool(0.5), int_attr, assoc) {
        (true, Some(a), _) | (false, Some(a), None) => {
            Some(format!("{}.{} <= {}", cls.name, a.name, rng.gen_range(-3..=3)))
        }
        (_, _, Some(assoc)) => Some(format!(
            "{}.attachingConnections({})->size() <= {}",
            cls.name,
            assoc.name,
            rng.gen_range(0..=2)
        )),
        _ => None,
    }
}

/// The meaning of a generated constraint, recovered from its text.
#[derive(Debug, Clone)]
pub enum ConstraintShape {
    AttributeAtMost {
        context: String,
        attribute: String,
        bound: i64,
    },
    ConnectionsAtMost {
        context: String,
        association: String,
        bound: i64,
    },
}

pub fn constraint_shape(c: &ConstraintDef) -> ConstraintShape {
    let text = c.text();
    let (context, body) = text.split_once('.').unwrap();
    let (lhs, bound) = body.rsplit_once(" <= ").unwrap();
    let bound: i64 = bound.parse().unwrap();
    if let Some(assoc) = lhs.strip_prefix("attachingConnections(") {
        ConstraintShape::ConnectionsAtMost {
            context: context.to_string(),
            association: assoc.trim_end_matches(")->size()").to_string(),
            bound,
        }
    } else {
        ConstraintShape::AttributeAtMost {
            context: context.to_string(),
            attribute: lhs.to_string(),
            bound,
        }
    }
}

// ---------------------------------------------------------------------------
// raw models: plain data written straight to model text, so that the
// oracle never touches the library's own model representation

#[derive(Debug, Clone)]
pub struct RawEntity {
    pub id: u64,
    pub name: String,
    pub class: String,
    pub parent: Option<u64>,
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone)]
pub struct RawLink {
    pub id: u64,
    pub association: String,
    pub ends: BTreeMap<String, u64>,
    pub container: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct RawModel {
    /// Parents always precede their children.
    pub entities: Vec<RawEntity>,
    pub links: Vec<RawLink>,
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn literal(v: &Value) -> String {
    match v {
        Value::String(s) => quote(s),
        Value::Integer(i) => i.to_string(),
        Value::Real(x) => format!("{x:?}"),
        Value::Boolean(b) => b.to_string(),
        Value::Enum(s) => format!("enum {}", quote(s)),
    }
}

impl RawModel {
    pub fn to_text(&self, mm_name: &str, version: u64) -> String {
        let next_e = self.entities.iter().map(|e| e.id + 1).max().unwrap_or(0);
        let next_l = self.links.iter().map(|l| l.id + 1).max().unwrap_or(0);
        let mut out = format!("model Raw conforms {mm_name} version {version} next #{next_e} @{next_l}\n");
        fn write(raw: &RawModel, out: &mut String, parent: Option<u64>) {
            for e in raw.entities.iter().filter(|e| e.parent == parent) {
                out.push_str(&format!("entity {} #{} : {} {{\n", e.name, e.id, e.class));
                for (k, v) in &e.attributes {
                    out.push_str(&format!("{} = {};\n", quote(k), literal(v)));
                }
                write(raw, out, Some(e.id));
                out.push_str("}\n");
            }
            for l in raw.links.iter().filter(|l| l.container == parent) {
                let ends: Vec<String> = l.ends.iter().map(|(r, e)| format!("{r} = #{e}")).collect();
                out.push_str(&format!("link @{} {} ({});\n", l.id, l.association, ends.join(", ")));
            }
        }
        write(self, &mut out, None);
        out
    }

    pub fn entity(&self, id: u64) -> &RawEntity {
        self.entities.iter().find(|e| e.id == id).unwrap()
    }

    fn ancestors_or_self(&self, mut id: u64) -> Vec<u64> {
        let mut out = vec![id];
        while let Some(p) = self.entity(id).parent {
            out.push(p);
            id = p;
        }
        out
    }
}

fn random_attributes(rng: &mut ChaCha8Rng, mm: &Metamodel, class: &str, noise: f64) -> BTreeMap<String, Value> {
    let mut attributes = BTreeMap::new();
    for anc in oracle_ancestors(mm, class, Facet::Attributes) {
        for a in &mm.class(&anc).unwrap().attributes {
            if rng.gen_bool(0.6) {
                let v = if rng.gen_bool(noise * 0.3) {
                    let ty = random_type(rng, false);
                    random_value(rng, &ty, false)
                } else {
                    random_value(rng, &a.value_type, false)
                };
                attributes.insert(a.name.clone(), v);
            }
        }
    }
    if rng.gen_bool(noise * 0.2) {
        attributes.insert("stray".into(), Value::Integer(1));
    }
    attributes
}

fn fill_containment_minimums(rng: &mut ChaCha8Rng, mm: &Metamodel, raw: &mut RawModel, budget: usize) {
    let mut i = 0;
    while i < raw.entities.len() && raw.entities.len() < budget {
        let e = raw.entities[i].clone();
        i += 1;
        for anc in oracle_ancestors(mm, &e.class, Facet::Containment) {
            for rule in &mm.class(&anc).unwrap().containments {
                let have = raw
                    .entities
                    .iter()
                    .filter(|c| c.parent == Some(e.id) && is_a(mm, &c.class, &rule.child, Facet::Containment))
                    .count();
                let fits: Vec<String> = mm
                    .classes()
                    .filter(|c| !c.is_abstract && is_a(mm, &c.name, &rule.child, Facet::Containment))
                    .map(|c| c.name.clone())
                    .collect();
                for _ in have..rule.multiplicity.min as usize {
                    let Some(class) = fits.choose(rng).cloned() else { break };
                    let id = raw.entities.len() as u64;
                    let attributes = random_attributes(rng, mm, &class, 0.0);
                    raw.entities.push(RawEntity {
                        id,
                        name: format!("e{id}"),
                        class,
                        parent: Some(e.id),
                        attributes,
                    });
                }
            }
        }
    }
}

/// Whether `parent` can take one more child of `class` without breaking a
/// containment rule.
fn has_room(mm: &Metamodel, raw: &RawModel, parent: &RawEntity, class: &str) -> bool {
    if mm.class(&parent.class).is_none() || !rules_allow(mm, &parent.class, class) {
        return false;
    }
    oracle_ancestors(mm, &parent.class, Facet::Containment)
        .iter()
        .all(|anc| {
            mm.class(anc).unwrap().containments.iter().all(|r| {
                if !is_a(mm, class, &r.child, Facet::Containment) {
                    return true;
                }
                let have = raw
                    .entities
                    .iter()
                    .filter(|c| c.parent == Some(parent.id) && is_a(mm, &c.class, &r.child, Facet::Containment))
                    .count();
                r.multiplicity.max.is_none_or(|m| have < m as usize)
            })
        })
}

/// A model of at most `max_entities` entities. With `noise` = 0 every
/// placement, value and link follows the metamodel as far as the generator
/// can tell; higher noise injects unknown classes, abstract instances,
/// foreign attributes, wrong value kinds, illegal placements and malformed
/// links.
pub fn gen_raw_model(rng: &mut ChaCha8Rng, mm: &Metamodel, max_entities: usize, noise: f64) -> RawModel {
    let mut raw = RawModel::default();
    let classes: Vec<&MetaClass> = mm.classes().collect();
    let concrete: Vec<&MetaClass> = classes.iter().copied().filter(|c| !c.is_abstract).collect();
    let clean = !rng.gen_bool(noise);
    // a clean model leaves room for the children its minimums demand
    let n = if clean {
        rng.gen_range(0..=max_entities / 2)
    } else {
        rng.gen_range(0..=max_entities)
    };
    for id in 0..n as u64 {
        let class = if rng.gen_bool(noise * 0.2) {
            "Ghost".to_string()
        } else if concrete.is_empty() || rng.gen_bool(noise * 0.2) {
            classes.choose(rng).unwrap().name.clone()
        } else {
            concrete.choose(rng).unwrap().name.clone()
        };
        let parent = if raw.entities.is_empty() || rng.gen_bool(0.3) {
            None
        } else if clean {
            // only under a parent with a rule that admits the class and has room
            let open: Vec<u64> = raw
                .entities
                .iter()
                .filter(|p| has_room(mm, &raw, p, &class))
                .map(|p| p.id)
                .collect();
            open.choose(rng).copied()
        } else {
            Some(raw.entities.choose(rng).unwrap().id)
        };
        let attributes = random_attributes(rng, mm, &class, noise);
        raw.entities.push(RawEntity {
            id,
            name: format!("e{id}"),
            class,
            parent,
            attributes,
        });
    }
    if clean {
        fill_containment_minimums(rng, mm, &mut raw, max_entities);
    }
    let assocs: Vec<&AssociationDef> = mm.associations().collect();
    if !raw.entities.is_empty() {
        for id in 0..rng.gen_range(0..=max_entities / 2) as u64 {
            let (association, mut ends) = match assocs.choose(rng) {
                Some(a) if !rng.gen_bool(noise * 0.1) => {
                    let mut ends = BTreeMap::new();
                    for role in &a.roles {
                        let fitting: Vec<u64> = raw
                            .entities
                            .iter()
                            .filter(|e| is_a(mm, &e.class, &role.endpoint, Facet::Roles))
                            .map(|e| e.id)
                            .collect();
                        let end = match fitting.choose(rng) {
                            Some(id) if !rng.gen_bool(noise) => *id,
                            None if noise == 0.0 => break,
                            _ => raw.entities.choose(rng).unwrap().id,
                        };
                        ends.insert(role.name.clone(), end);
                    }
                    if ends.len() < a.roles.len() && noise == 0.0 {
                        continue;
                    }
                    (a.name.clone(), ends)
                }
                None if noise == 0.0 => continue,
                _ => ("Stray".to_string(), BTreeMap::from([("x".to_string(), 0)])),
            };
            if rng.gen_bool(noise * 0.1) {
                ends.insert("extra".into(), raw.entities.choose(rng).unwrap().id);
            }
            if rng.gen_bool(noise * 0.1) {
                let k = ends.keys().next().unwrap().clone();
                ends.remove(&k);
            }
            let container = if rng.gen_bool(0.5) {
                None
            } else {
                Some(raw.entities.choose(rng).unwrap().id)
            };
            raw.links.push(RawLink {
                id,
                association,
                ends,
                container,
            });
        }
    }
    raw
}

// ---------------------------------------------------------------------------
// conformance oracle: every rule restated over the raw model

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Facet {
    Attributes,
    Roles,
    Containment,
}

fn follows(facet: Facet, kind: InheritanceKind) -> bool {
    match facet {
        Facet::Attributes => true,
        Facet::Roles => matches!(kind, InheritanceKind::Full | InheritanceKind::Interface),
        Facet::Containment => matches!(kind, InheritanceKind::Full | InheritanceKind::Implementation),
    }
}

/// Reflexive closure by breadth-first search; empty for unknown classes.
pub fn oracle_ancestors(mm: &Metamodel, class: &str, facet: Facet) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![class.to_string()];
    while let Some(c) = frontier.pop() {
        let Some(cls) = mm.class(&c) else { continue };
        if seen.insert(c) {
            for s in &cls.superclasses {
                if follows(facet, s.kind) {
                    frontier.push(s.name.clone());
                }
            }
        }
    }
    seen
}

fn is_a(mm: &Metamodel, sub: &str, sup: &str, facet: Facet) -> bool {
    oracle_ancestors(mm, sub, facet).contains(sup)
}

fn admits(m: Multiplicity, n: usize) -> bool {
    n as u64 >= u64::from(m.min) && m.max.is_none_or(|x| n as u64 <= u64::from(x))
}

fn matches_type(v: &Value, ty: &ValueType) -> bool {
    match (v, ty) {
        (Value::String(_), ValueType::String)
        | (Value::Integer(_), ValueType::Integer)
        | (Value::Boolean(_), ValueType::Boolean) => true,
        (Value::Real(x), ValueType::Real) => x.is_finite(),
        (Value::Enum(l), ValueType::Enum(lits)) => lits.contains(l),
        _ => false,
    }
}

/// One finding of a conformance rule.
pub type Finding = (String, u64);

/// Every rule violation of `raw` against `mm`, as (rule, element id) pairs
/// in sorted order.
pub fn oracle_check(raw: &RawModel, mm: &Metamodel) -> Vec<Finding> {
    let mut out: Vec<Finding> = Vec::new();
    let known = |class: &str| mm.class(class).is_some();
    let attrs_of = |class: &str| -> BTreeMap<String, AttributeDef> {
        let mut m = BTreeMap::new();
        for anc in oracle_ancestors(mm, class, Facet::Attributes) {
            for a in &mm.class(&anc).unwrap().attributes {
                m.insert(a.name.clone(), a.clone());
            }
        }
        m
    };
    for e in &raw.entities {
        match mm.class(&e.class) {
            None => out.push(("class".into(), e.id)),
            Some(c) if c.is_abstract => out.push(("class".into(), e.id)),
            _ => {}
        }
        if !known(&e.class) {
            continue;
        }
        let defs = attrs_of(&e.class);
        for (name, v) in &e.attributes {
            match defs.get(name) {
                Some(d) if matches_type(v, &d.value_type) => {}
                _ => out.push(("attribute".into(), e.id)),
            }
        }
        // distinct rules of every containment ancestor
        let mut rules = BTreeSet::new();
        for anc in oracle_ancestors(mm, &e.class, Facet::Containment) {
            for r in &mm.class(&anc).unwrap().containments {
                rules.insert((r.child.clone(), r.multiplicity.min, r.multiplicity.max));
            }
        }
        for (child, min, max) in &rules {
            let count = raw
                .entities
                .iter()
                .filter(|c| c.parent == Some(e.id) && is_a(mm, &c.class, child, Facet::Containment))
                .count();
            if !admits(Multiplicity::new(*min, *max), count) {
                out.push(("containment-count".into(), e.id));
            }
        }
        if let Some(p) = e.parent {
            let p = raw.entity(p);
            if known(&p.class) && !rules_allow(mm, &p.class, &e.class) {
                out.push(("containment".into(), e.id));
            }
        }
    }
    for l in &raw.links {
        let Some(assoc) = mm.association(&l.association) else {
            out.push(("link".into(), l.id));
            continue;
        };
        let declared: BTreeSet<&str> = assoc.roles.iter().map(|r| r.name.as_str()).collect();
        let bad_role = assoc.roles.iter().any(|r| match l.ends.get(&r.name) {
            None => true,
            Some(e) => !is_a(mm, &raw.entity(*e).class, &r.endpoint, Facet::Roles),
        }) || l.ends.keys().any(|k| !declared.contains(k.as_str()));
        if bad_role {
            out.push(("link".into(), l.id));
        }
    }
    for assoc in mm.associations() {
        for role in &assoc.roles {
            for e in raw
                .entities
                .iter()
                .filter(|e| is_a(mm, &e.class, &role.endpoint, Facet::Roles))
            {
                let count = raw
                    .links
                    .iter()
                    .filter(|l| l.association == assoc.name && l.ends.get(&role.name) == Some(&e.id))
                    .count();
                if !admits(role.multiplicity, count) {
                    out.push(("role-count".into(), e.id));
                }
            }
        }
    }
    for c in mm.constraints() {
        let shape = constraint_shape(c);
        let context = match &shape {
            ConstraintShape::AttributeAtMost { context, .. } | ConstraintShape::ConnectionsAtMost { context, .. } => {
                context
            }
        };
        for e in raw
            .entities
            .iter()
            .filter(|e| is_a(mm, &e.class, context, Facet::Attributes))
        {
            let ok = match &shape {
                ConstraintShape::AttributeAtMost { attribute, bound, .. } => {
                    let v = e
                        .attributes
                        .get(attribute)
                        .cloned()
                        .or_else(|| attrs_of(&e.class).get(attribute).map(|d| d.default.clone()));
                    match v {
                        Some(Value::Integer(i)) => i <= *bound,
                        Some(Value::Real(x)) => x <= *bound as f64,
                        // comparing anything else with a number fails closed
                        _ => false,
                    }
                }
                ConstraintShape::ConnectionsAtMost { association, bound, .. } => {
                    let n = raw
                        .links
                        .iter()
                        .filter(|l| &l.association == association && l.ends.values().any(|x| *x == e.id))
                        .count();
                    n as i64 <= *bound
                }
            };
            if !ok {
                out.push((format!("constraint {}", c.name), e.id));
            }
        }
    }
    out.sort();
    out
}

fn rules_allow(mm: &Metamodel, parent: &str, child: &str) -> bool {
    oracle_ancestors(mm, parent, Facet::Containment).iter().any(|anc| {
        mm.class(anc)
            .unwrap()
            .containments
            .iter()
            .any(|r| is_a(mm, child, &r.child, Facet::Containment))
    })
}

/// The library's diagnostics in the oracle's vocabulary.
pub fn library_findings(model: &Model, diags: &[Diagnostic]) -> Vec<Finding> {
    let mut out: Vec<Finding> = diags
        .iter()
        .map(|d| {
            let rule = match d.code {
                DiagCode::UnknownClass | DiagCode::AbstractInstance => "class".to_string(),
                DiagCode::UnknownAttribute | DiagCode::AttributeType => "attribute".into(),
                DiagCode::IllegalContainment => "containment".into(),
                DiagCode::ContainmentMultiplicity => "containment-count".into(),
                DiagCode::UnknownAssociation | DiagCode::RoleMismatch | DiagCode::DanglingReference => "link".into(),
                DiagCode::RoleMultiplicity => "role-count".into(),
                DiagCode::ConstraintViolation => {
                    let name = d
                        .message
                        .strip_prefix("constraint ")
                        .unwrap()
                        .split(' ')
                        .next()
                        .unwrap();
                    format!("constraint {name}")
                }
                other => panic!("unexpected diagnostic {other}"),
            };
            let id = match d.location {
                Location::Entity(EntityId(n)) | Location::Link(LinkId(n)) => n,
                ref other => panic!("unexpected location {other}"),
            };
            (rule, id)
        })
        .collect();
    let _ = model;
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// correspondence oracle

fn subtree(model: &Model, root: EntityId) -> BTreeSet<EntityId> {
    let mut out = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(e) = stack.pop() {
        if out.insert(e) {
            stack.extend(model.entity(e).unwrap().children.iter().copied());
        }
    }
    out
}

/// Checks one map against the model from first principles: the entity map
/// covers the prototype subtree, is injective (bijective onto the derived
/// subtree for clones), preserves classes and parents, maps every internal
/// link to a link of the same shape, and unmodified attributes agree.
pub fn check_map(model: &Model, map: &CorrespondenceMap) -> Result<(), String> {
    let proto = subtree(model, map.prototype_root);
    let derived = subtree(model, map.clone_root);
    let keys: BTreeSet<EntityId> = map.pairs.keys().copied().collect();
    if keys != proto {
        return Err(format!(
            "map of {} does not cover its prototype subtree",
            map.clone_root
        ));
    }
    let values: BTreeSet<EntityId> = map.pairs.values().copied().collect();
    if values.len() != map.pairs.len() {
        return Err(format!("map of {} is not injective", map.clone_root));
    }
    if !values.is_subset(&derived) {
        return Err(format!("map of {} leaves the derived subtree", map.clone_root));
    }
    if map.kind == DerivationKind::Clone && values != derived {
        return Err(format!("clone {} holds elements its prototype lacks", map.clone_root));
    }
    if map.pairs.get(&map.prototype_root) != Some(&map.clone_root) {
        return Err("roots do not correspond".into());
    }
    for (a, b) in &map.pairs {
        let (ea, eb) = (model.entity(*a).unwrap(), model.entity(*b).unwrap());
        if ea.class != eb.class {
            return Err(format!("{a} and {b} differ in class"));
        }
        if *a != map.prototype_root && ea.parent.map(|p| map.pairs[&p]) != eb.parent {
            return Err(format!("{a} and {b} have non-corresponding parents"));
        }
        let modified = eb.clone_info.as_ref().map(|i| i.modified.clone()).unwrap_or_default();
        for (k, v) in &ea.attributes {
            if !modified.contains(k) && eb.attributes.get(k) != Some(v) {
                return Err(format!("unmodified attribute {k} of {b} differs from {a}"));
            }
        }
    }
    let internal: BTreeSet<LinkId> = model
        .links()
        .filter(|l| l.container.is_some_and(|c| proto.contains(&c)) && l.ends.values().all(|e| proto.contains(e)))
        .map(|l| l.id)
        .collect();
    let mapped: BTreeSet<LinkId> = map.link_pairs.keys().copied().collect();
    if internal != mapped {
        return Err(format!(
            "link map of {} does not match the internal links",
            map.clone_root
        ));
    }
    let images: BTreeSet<LinkId> = map.link_pairs.values().copied().collect();
    if images.len() != map.link_pairs.len() {
        return Err("link map is not injective".into());
    }
    for (x, y) in &map.link_pairs {
        let (lx, ly) = (model.link(*x).unwrap(), model.link(*y).unwrap());
        let ends: BTreeMap<String, EntityId> = lx.ends.iter().map(|(r, e)| (r.clone(), map.pairs[e])).collect();
        if lx.association != ly.association || ends != ly.ends || lx.container.map(|c| map.pairs[&c]) != ly.container {
            return Err(format!("links {x} and {y} differ in shape"));
        }
    }
    Ok(())
}

pub fn check_all_maps(model: &Model) -> Result<(), String> {
    clones::audit(model).map_err(|e| e.to_string())?;
    for m in model.registry().maps() {
        check_map(model, m)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// random derivation workloads on the port-interconnection language

#[derive(Debug, Default, Clone, Copy)]
pub struct OpStats {
    pub applied: usize,
    pub rejected: usize,
}

/// Applies one random operation. A rejected operation must leave the model
/// untouched; returns whether it was applied.
pub fn random_operation(
    rng: &mut ChaCha8Rng,
    mm: &Metamodel,
    model: &mut Model,
    serial: usize,
) -> Result<bool, String> {
    let before = model.clone();
    let entities: Vec<EntityId> = model.entities().map(|e| e.id).collect();
    let components: Vec<EntityId> = model
        .entities()
        .filter(|e| e.class == "Component")
        .map(|e| e.id)
        .collect();
    let ports: Vec<EntityId> = model
        .entities()
        .filter(|e| e.class != "Component")
        .map(|e| e.id)
        .collect();
    let pick = |rng: &mut ChaCha8Rng, v: &[EntityId]| v.choose(rng).copied();
    let parent_or_root = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.2) {
            None
        } else {
            pick(rng, &components)
        }
    };
    let op = rng.gen_range(0..10);
    let result: Result<(), clones::CloneError> = match op {
        0 | 1 => match pick(rng, &components) {
            Some(p) => {
                let parent = parent_or_root(rng);
                if op == 0 {
                    clones::clone_entity(model, mm, p, parent).map(drop)
                } else {
                    clones::create_subprototype(model, mm, p, parent).map(drop)
                }
            }
            None => Ok(()),
        },
        2 | 3 => {
            let class = *["Component", "InPort", "OutPort"].choose(rng).unwrap();
            let parent = parent_or_root(rng);
            clones::add_entity(model, mm, class, parent, &format!("n{serial}")).map(drop)
        }
        4 => match pick(rng, &entities) {
            Some(e) => clones::delete_entity(model, e).map(drop),
            None => Ok(()),
        },
        5 | 6 => match (pick(rng, &ports), pick(rng, &ports)) {
            (Some(a), Some(b)) => {
                let container = if rng.gen_bool(0.2) {
                    None
                } else {
                    pick(rng, &components)
                };
                clones::connect(model, mm, "BufferedConnection", [("src", a), ("dst", b)], container).map(drop)
            }
            _ => Ok(()),
        },
        7 => match model.links().map(|l| l.id).collect::<Vec<_>>().choose(rng) {
            Some(l) => clones::delete_link(model, *l).map(drop),
            None => Ok(()),
        },
        _ => match pick(rng, &entities) {
            Some(e) => {
                let (attr, value) = if model.entity(e).unwrap().class == "Component" {
                    ("gain", Value::Real(f64::from(rng.gen_range(0..20)) / 4.0))
                } else {
                    ("label", Value::String(format!("s{}", rng.gen_range(0..5))))
                };
                clones::set_attribute(model, mm, e, attr, value).map(drop)
            }
            None => Ok(()),
        },
    };
    match result {
        Ok(()) => {
            check_all_maps(model)?;
            model.check_forest()?;
            Ok(true)
        }
        Err(e) => {
            if *model != before {
                return Err(format!("rejected operation changed the model: {e}"));
            }
            Ok(false)
        }
    }
}

/// A model built by `ops` random operations from a single component.
pub fn gen_cloned_model(rng: &mut ChaCha8Rng, mm: &Metamodel, ops: usize) -> Model {
    let mut model = Model::new("Gen", mm);
    model.instantiate_named(mm, "Component", None, "Root").unwrap();
    for i in 0..ops {
        random_operation(rng, mm, &mut model, i).unwrap();
    }
    model
}

// ---------------------------------------------------------------------------
// merge specs

/// A random identity spec pairing classes of two disjoint generated
/// metamodels in declaration order. Generated supers point backwards, so an
/// order-preserving pairing never fuses a specialization cycle.
pub fn random_identity_spec(r: &mut ChaCha8Rng, left: &Metamodel, right: &Metamodel) -> EquivalenceSpec {
    let ls: Vec<&str> = left.classes().map(|c| c.name.as_str()).collect();
    let rs: Vec<&str> = right.classes().map(|c| c.name.as_str()).collect();
    let k = r.gen_range(0..=ls.len().min(rs.len()));
    let mut li = rand::seq::index::sample(r, ls.len(), k).into_vec();
    let mut ri = rand::seq::index::sample(r, rs.len(), k).into_vec();
    li.sort_unstable();
    ri.sort_unstable();
    EquivalenceSpec {
        entries: li
            .iter()
            .zip(&ri)
            .enumerate()
            .map(|(i, (a, b))| EquivalenceEntry::new(EquivalenceMode::Identity, ls[*a], rs[*b], &format!("M{i}")))
            .collect(),
    }
}
