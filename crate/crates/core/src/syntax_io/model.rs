//! The `.mdl` format.
//!
//! ```text
//! model Demo conforms SignalFlow version 1 next #7 @3
//! entity Top #1 : Component {
//!   gain = 1.0;
//!   ext "glyph" = "box";
//!   entity In #2 : InPort {
//!     label = "";
//!   }
//!   link @1 BufferedConnection (dst = #5, src = #2);
//! }
//! correspondence clone #4 -> #6 {
//!   #4 -> #6;
//! }
//! ```
//!
//! Links are written inside their container; model-scope links at top
//! level. Derived entities carry `origin #n modified [..];`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::lexer::{LResult, Lexer, Pos, Tok};
use super::values::{parse_value, write_value};
use super::FormatError;
use crate::clones::{self, CorrespondenceMap, DerivationKind};
use crate::meta_core::Metamodel;
use crate::model_store::{CloneInfo, Entity, EntityId, Link, LinkId, MetamodelRef, Model};
use crate::text;

const MAX_DEPTH: usize = 200;

struct Parser<'a> {
    lx: Lexer<'a>,
    model: Model,
    /// Every id reference with where it was written.
    entity_refs: Vec<(EntityId, Pos)>,
}

/// Parses a model and checks that it names `mm`.
pub fn parse_model(src: &str, mm: &Metamodel) -> Result<Model, FormatError> {
    let model = parse_model_unchecked(src)?;
    if model.metamodel.name != mm.name || model.metamodel.version != mm.version {
        return Err(FormatError::MetamodelMismatch {
            expected: format!("{} version {}", mm.name, mm.version),
            found: model.metamodel.to_string(),
        });
    }
    Ok(model)
}

/// Parses a model without comparing its metamodel reference to anything.
pub fn parse_model_unchecked(src: &str) -> Result<Model, FormatError> {
    let mut lx = Lexer::new(src);
    lx.keyword("model")?;
    let id = lx.name("a model name")?;
    lx.keyword("conforms")?;
    let (mm_name, _) = lx.ident("a metamodel name")?;
    lx.keyword("version")?;
    let version = lx.uint("a version number")?;
    lx.keyword("next")?;
    let (next_entity, _) = lx.entity_ref()?;
    let (next_link, _) = lx.link_ref()?;
    let mut model = Model::with_ref(id, MetamodelRef { name: mm_name, version });
    model.next_entity = next_entity;
    model.next_link = next_link;
    let mut p = Parser {
        lx,
        model,
        entity_refs: Vec::new(),
    };
    loop {
        let (tok, pos) = p.lx.next()?;
        match tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "entity" => p.entity(None, 0)?,
            Tok::Ident(kw) if kw == "link" => p.link(None)?,
            Tok::Ident(kw) if kw == "correspondence" => p.correspondence()?,
            other => {
                return p.lx.error_at(
                    pos,
                    format!(
                        "expected 'entity', 'link' or 'correspondence', found {}",
                        other.describe()
                    ),
                )
            }
        }
    }
    p.finish()
}

impl Parser<'_> {
    fn entity_ref(&mut self) -> LResult<EntityId> {
        let (n, pos) = self.lx.entity_ref()?;
        self.entity_refs.push((EntityId(n), pos));
        Ok(EntityId(n))
    }

    fn entity(&mut self, parent: Option<EntityId>, depth: usize) -> LResult<()> {
        let (name, pos) = self.lx.ident("an entity name")?;
        if depth >= MAX_DEPTH {
            return self.lx.error_at(pos, "entities nested too deeply");
        }
        let (n, id_pos) = self.lx.entity_ref()?;
        let id = EntityId(n);
        if self.model.entities.contains_key(&id) {
            return self.lx.error_at(id_pos, format!("duplicate entity id {id}"));
        }
        self.lx.expect_sym(":")?;
        let (class, _) = self.lx.ident("a class name")?;
        self.lx.expect_sym("{")?;
        self.model.entities.insert(
            id,
            Entity {
                id,
                name,
                class,
                attributes: BTreeMap::new(),
                extensions: BTreeMap::new(),
                parent,
                children: Vec::new(),
                clone_info: None,
            },
        );
        match parent {
            Some(p) => self
                .model
                .entities
                .get_mut(&p)
                .expect("parent parsed first")
                .children
                .push(id),
            None => self.model.roots.push(id),
        }
        loop {
            let (tok, at) = self.lx.next()?;
            match tok {
                Tok::Sym("}") => return Ok(()),
                Tok::Ident(kw) if kw == "entity" => self.entity(Some(id), depth + 1)?,
                Tok::Ident(kw) if kw == "link" => self.link(Some(id))?,
                Tok::Ident(kw) if kw == "ext" => {
                    let key = self.lx.string("an extension key")?;
                    self.lx.expect_sym("=")?;
                    let value = self.lx.string("an extension value")?;
                    self.lx.expect_sym(";")?;
                    let e = self.model.entities.get_mut(&id).expect("inserted above");
                    if e.extensions.insert(key.clone(), value).is_some() {
                        return self
                            .lx
                            .error_at(at, format!("extension {} given twice", text::quote(&key)));
                    }
                }
                Tok::Ident(kw) if kw == "origin" && *self.lx.peek()? != Tok::Sym("=") => {
                    let origin = self.entity_ref()?;
                    self.lx.keyword("modified")?;
                    self.lx.expect_sym("[")?;
                    let mut modified = BTreeSet::new();
                    if !self.lx.eat_sym("]")? {
                        loop {
                            modified.insert(self.lx.name("an attribute name")?);
                            if self.lx.eat_sym("]")? {
                                break;
                            }
                            self.lx.expect_sym(",")?;
                        }
                    }
                    self.lx.expect_sym(";")?;
                    let e = self.model.entities.get_mut(&id).expect("inserted above");
                    if e.clone_info.is_some() {
                        return self.lx.error_at(at, "origin given twice");
                    }
                    e.clone_info = Some(CloneInfo { origin, modified });
                }
                Tok::Ident(attr) | Tok::Str(attr) => {
                    self.lx.expect_sym("=")?;
                    let value = parse_value(&mut self.lx)?;
                    self.lx.expect_sym(";")?;
                    let e = self.model.entities.get_mut(&id).expect("inserted above");
                    if e.attributes.insert(attr.clone(), value).is_some() {
                        return self.lx.error_at(at, format!("attribute '{attr}' given twice"));
                    }
                }
                other => {
                    return self.lx.error_at(
                        at,
                        format!("expected an entity member or '}}', found {}", other.describe()),
                    )
                }
            }
        }
    }

    fn link(&mut self, container: Option<EntityId>) -> LResult<()> {
        let (n, id_pos) = self.lx.link_ref()?;
        let id = LinkId(n);
        if self.model.links.contains_key(&id) {
            return self.lx.error_at(id_pos, format!("duplicate link id {id}"));
        }
        let (association, _) = self.lx.ident("an association name")?;
        self.lx.expect_sym("(")?;
        let mut ends = BTreeMap::new();
        if !self.lx.eat_sym(")")? {
            loop {
                let (role, at) = self.lx.ident("a role name")?;
                self.lx.expect_sym("=")?;
                let end = self.entity_ref()?;
                if ends.insert(role.clone(), end).is_some() {
                    return self.lx.error_at(at, format!("role '{role}' bound twice"));
                }
                if self.lx.eat_sym(")")? {
                    break;
                }
                self.lx.expect_sym(",")?;
            }
        }
        self.lx.expect_sym(";")?;
        self.model.links.insert(
            id,
            Link {
                id,
                association,
                ends,
                container,
            },
        );
        Ok(())
    }

    fn correspondence(&mut self) -> LResult<()> {
        let (kind, at) = self.lx.ident("'clone' or 'subprototype'")?;
        let kind = match kind.as_str() {
            "clone" => DerivationKind::Clone,
            "subprototype" => DerivationKind::Subprototype,
            other => return self.lx.error_at(at, format!("unknown derivation kind '{other}'")),
        };
        let prototype_root = self.entity_ref()?;
        self.lx.expect_sym("->")?;
        let root_pos = self.lx.peek_pos()?;
        let clone_root = self.entity_ref()?;
        if self.model.registry.map(clone_root).is_some() {
            return self
                .lx
                .error_at(root_pos, format!("second correspondence for {clone_root}"));
        }
        self.lx.expect_sym("{")?;
        let mut map = CorrespondenceMap {
            prototype_root,
            clone_root,
            kind,
            pairs: BTreeMap::new(),
            link_pairs: BTreeMap::new(),
        };
        while !self.lx.eat_sym("}")? {
            let pos = self.lx.peek_pos()?;
            if matches!(self.lx.peek()?, Tok::LinkRef(_)) {
                let (a, _) = self.lx.link_ref()?;
                self.lx.expect_sym("->")?;
                let (b, _) = self.lx.link_ref()?;
                if map.link_pairs.insert(LinkId(a), LinkId(b)).is_some() {
                    return self.lx.error_at(pos, format!("@{a} mapped twice"));
                }
            } else {
                let a = self.entity_ref()?;
                self.lx.expect_sym("->")?;
                let b = self.entity_ref()?;
                if map.pairs.insert(a, b).is_some() {
                    return self.lx.error_at(pos, format!("{a} mapped twice"));
                }
            }
            self.lx.expect_sym(";")?;
        }
        self.model.registry.insert(map);
        Ok(())
    }

    fn finish(self) -> Result<Model, FormatError> {
        let model = self.model;
        for (id, pos) in &self.entity_refs {
            if !model.entities.contains_key(id) {
                return Err(FormatError::DanglingReference(format!(
                    "{id} referenced at line {}, column {} is not declared",
                    pos.line, pos.column
                )));
            }
        }
        for m in model.registry.maps() {
            for (a, b) in &m.link_pairs {
                for l in [a, b] {
                    if !model.links.contains_key(l) {
                        return Err(FormatError::DanglingReference(format!(
                            "{l} in correspondence of {} is not declared",
                            m.clone_root
                        )));
                    }
                }
            }
        }
        let max_entity = model.entities.keys().next_back().map_or(0, |e| e.0 + 1);
        let max_link = model.links.keys().next_back().map_or(0, |l| l.0 + 1);
        if model.next_entity < max_entity || model.next_link < max_link {
            return Err(FormatError::Corrupt(format!(
                "next ids #{} @{} do not exceed the ids in use",
                model.next_entity, model.next_link
            )));
        }
        model.check_forest().map_err(FormatError::Corrupt)?;
        clones::audit(&model).map_err(|e| FormatError::Corrupt(e.to_string()))?;
        Ok(model)
    }
}

fn write_name(out: &mut String, name: &str) {
    if text::is_identifier(name) {
        out.push_str(name);
    } else {
        out.push_str(&text::quote(name));
    }
}

fn write_entity(
    out: &mut String,
    model: &Model,
    links: &BTreeMap<Option<EntityId>, Vec<&Link>>,
    id: EntityId,
    depth: usize,
) {
    let e = model.entity(id).expect("forest is consistent");
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}entity {} {} : {} {{", e.name, e.id, e.class);
    for (name, value) in &e.attributes {
        out.push_str(&pad);
        out.push_str("  ");
        // attribute names that collide with member keywords are quoted
        if matches!(name.as_str(), "entity" | "link" | "ext" | "origin") {
            out.push_str(&text::quote(name));
        } else {
            write_name(out, name);
        }
        out.push_str(" = ");
        write_value(out, value);
        out.push_str(";\n");
    }
    for (k, v) in &e.extensions {
        let _ = writeln!(out, "{pad}  ext {} = {};", text::quote(k), text::quote(v));
    }
    if let Some(info) = &e.clone_info {
        let _ = write!(out, "{pad}  origin {} modified [", info.origin);
        for (i, m) in info.modified.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_name(out, m);
        }
        out.push_str("];\n");
    }
    for c in &e.children {
        write_entity(out, model, links, *c, depth + 1);
    }
    for l in links.get(&Some(id)).into_iter().flatten() {
        write_link(out, l, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn write_link(out: &mut String, l: &Link, depth: usize) {
    let _ = write!(out, "{}link {} {} (", "  ".repeat(depth), l.id, l.association);
    for (i, (role, end)) in l.ends.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{role} = {end}");
    }
    out.push_str(");\n");
}

/// Canonical text: entities nested in child order, links by id within
/// their container, correspondences by derived root.
pub fn serialize_model(model: &Model) -> String {
    let mut out = String::from("model ");
    write_name(&mut out, &model.id);
    let _ = writeln!(
        out,
        " conforms {} version {} next {} {}",
        model.metamodel.name,
        model.metamodel.version,
        model.next_entity_id(),
        model.next_link_id()
    );
    let mut links: BTreeMap<Option<EntityId>, Vec<&Link>> = BTreeMap::new();
    for l in model.links() {
        links.entry(l.container).or_default().push(l);
    }
    for root in model.roots() {
        write_entity(&mut out, model, &links, *root, 0);
    }
    for l in links.get(&None).into_iter().flatten() {
        write_link(&mut out, l, 0);
    }
    for m in model.registry().maps() {
        let _ = writeln!(
            out,
            "correspondence {} {} -> {} {{",
            m.kind.as_str(),
            m.prototype_root,
            m.clone_root
        );
        for (a, b) in &m.pairs {
            let _ = writeln!(out, "  {a} -> {b};");
        }
        for (a, b) in &m.link_pairs {
            let _ = writeln!(out, "  {a} -> {b};");
        }
        out.push_str("}\n");
    }
    out
}
