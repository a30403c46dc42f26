//! C ABI over the metakernel library.
//!
//! Every function returns an [`MkStatus`]; on failure the message is kept
//! per thread and read with [`mk_last_error`]. Handles are opaque and owned
//! by the caller, who releases them with the matching `_free` function.
//! Strings handed out by the library are released with [`mk_string_free`].
//! Entity ids cross the boundary as plain integers; [`MK_NO_ENTITY`] stands
//! for "none" wherever an id is optional.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use metakernel::clones::{self, CloneError};
use metakernel::evolution;
use metakernel::merge::{self, MergeError};
use metakernel::meta_core::Metamodel;
use metakernel::model_store::{check_conformance_with, CheckOptions, EntityId, LinkId, Model, ModelError};
use metakernel::syntax_io::{self, FormatError};

/// Stands for an absent entity id (no parent, no container).
pub const MK_NO_ENTITY: u64 = u64::MAX;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Text could not be parsed, or describes an inconsistent model.
    ParseError = 3,
    /// A metamodel parsed but is not well formed.
    InvalidMetamodel = 4,
    /// A model names a different metamodel than the one supplied.
    MetamodelMismatch = 5,
    /// An entity, link, path, class or attribute does not exist.
    NotFound = 6,
    /// The operation would break the metamodel or a derivation.
    Rejected = 7,
    MergeError = 8,
    /// The library panicked; the handles involved should be released.
    Internal = 9,
}

/// A metamodel.
pub struct MkMetamodel(Metamodel);

/// A model together with its derivation registry.
pub struct MkModel(Model);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MkStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: MkStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let status = match e {
            FormatError::Validation(_) => MkStatus::InvalidMetamodel,
            FormatError::MetamodelMismatch { .. } => MkStatus::MetamodelMismatch,
            _ => MkStatus::ParseError,
        };
        Failure(status, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::UnknownEntity(_)
            | ModelError::UnknownLink(_)
            | ModelError::UnknownClass(_)
            | ModelError::UnknownAssociation(_)
            | ModelError::UnknownAttribute { .. }
            | ModelError::UnresolvedPath(_) => MkStatus::NotFound,
            ModelError::MetamodelMismatch { .. } => MkStatus::MetamodelMismatch,
            _ => MkStatus::Rejected,
        };
        Failure(status, e.to_string())
    }
}

impl From<CloneError> for Failure {
    fn from(e: CloneError) -> Self {
        match e {
            CloneError::Model(m) => m.into(),
            other => Failure(MkStatus::Rejected, other.to_string()),
        }
    }
}

impl From<MergeError> for Failure {
    fn from(e: MergeError) -> Self {
        Failure(MkStatus::MergeError, e.to_string())
    }
}

fn set_last_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', "\\0")).expect("nul bytes replaced"));
    });
}

/// Runs `f`, recording its failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> MkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            MkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("internal error: {msg}")));
            MkStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(MkStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(MkStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .map_or_else(|| fail(MkStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .map_or_else(|| fail(MkStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return fail(MkStatus::NullArgument, format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

/// Writes an owned copy of `s` to `out`; a null `out` is allowed and skips it.
unsafe fn put_string(out: *mut *mut c_char, s: &str) -> FfiResult<()> {
    if !out.is_null() {
        let c = CString::new(s.replace('\0', "\\0")).expect("nul bytes replaced");
        out.write(c.into_raw());
    }
    Ok(())
}

fn optional(id: u64) -> Option<EntityId> {
    (id != MK_NO_ENTITY).then_some(EntityId(id))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a
/// successful one. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mk_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a metamodel in the `.mm` format.
#[no_mangle]
pub unsafe extern "C" fn mk_metamodel_parse(src: *const c_char, out: *mut *mut MkMetamodel) -> MkStatus {
    guard(|| {
        let mm = syntax_io::parse_metamodel(text(src, "src")?)?;
        put(out, Box::into_raw(Box::new(MkMetamodel(mm))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mk_metamodel_free(mm: *mut MkMetamodel) {
    if !mm.is_null() {
        drop(Box::from_raw(mm));
    }
}

/// Canonical `.mm` text of a metamodel.
#[no_mangle]
pub unsafe extern "C" fn mk_metamodel_serialize(mm: *const MkMetamodel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let mm = get(mm, "mm")?;
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        put_string(out, &syntax_io::serialize_metamodel(&mm.0))
    })
}

/// Parses a `.mdl` model that must name `mm`.
#[no_mangle]
pub unsafe extern "C" fn mk_model_parse(
    src: *const c_char,
    mm: *const MkMetamodel,
    out: *mut *mut MkModel,
) -> MkStatus {
    guard(|| {
        let mm = get(mm, "mm")?;
        let model = syntax_io::parse_model(text(src, "src")?, &mm.0)?;
        put(out, Box::into_raw(Box::new(MkModel(model))), "out")
    })
}

/// An empty model named `name` conforming to `mm`.
#[no_mangle]
pub unsafe extern "C" fn mk_model_new(name: *const c_char, mm: *const MkMetamodel, out: *mut *mut MkModel) -> MkStatus {
    guard(|| {
        let mm = get(mm, "mm")?;
        let model = Model::new(text(name, "name")?, &mm.0);
        put(out, Box::into_raw(Box::new(MkModel(model))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mk_model_free(model: *mut MkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Canonical `.mdl` text of a model.
#[no_mangle]
pub unsafe extern "C" fn mk_model_serialize(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let model = get(model, "model")?;
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        put_string(out, &syntax_io::serialize_model(&model.0))
    })
}

/// Checks conformance. Writes the number of error diagnostics, and when
/// `report` is not null, one `severity[code] path: message` line per
/// diagnostic.
#[no_mangle]
pub unsafe extern "C" fn mk_model_check(
    model: *const MkModel,
    mm: *const MkMetamodel,
    skip_constraints: bool,
    error_count: *mut usize,
    report: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get(model, "model")?, get(mm, "mm")?);
        let opts = CheckOptions {
            skip_constraints,
            ignore_metamodel_ref: false,
        };
        let diags = check_conformance_with(&model.0, &mm.0, opts)?;
        let mut text = String::new();
        for d in &diags {
            let _ = writeln!(
                text,
                "{}[{}] {}: {}",
                d.severity,
                d.code,
                model.0.location_path(&d.location),
                d.message
            );
        }
        put(
            error_count,
            diags.iter().filter(|d| d.is_error()).count(),
            "error_count",
        )?;
        put_string(report, &text)
    })
}

/// Resolves `/A/B` or `#id` to an entity id.
#[no_mangle]
pub unsafe extern "C" fn mk_model_resolve(model: *const MkModel, path: *const c_char, out_id: *mut u64) -> MkStatus {
    guard(|| {
        let model = get(model, "model")?;
        let id = model.0.resolve(text(path, "path")?)?;
        put(out_id, id.0, "out_id")
    })
}

/// Path of an entity, e.g. `/Top/In`.
#[no_mangle]
pub unsafe extern "C" fn mk_model_path(model: *const MkModel, id: u64, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let model = get(model, "model")?;
        model
            .0
            .entity(EntityId(id))
            .ok_or(ModelError::UnknownEntity(EntityId(id)))?;
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        put_string(out, &model.0.path_of(EntityId(id)))
    })
}

/// Adds an instance of `class` under `parent` (or as a root for
/// [`MK_NO_ENTITY`]) and propagates it to derivations of the parent.
#[no_mangle]
pub unsafe extern "C" fn mk_model_add_entity(
    model: *mut MkModel,
    mm: *const MkMetamodel,
    class_name: *const c_char,
    parent: u64,
    name: *const c_char,
    out_id: *mut u64,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get_mut(model, "model")?, get(mm, "mm")?);
        let (class, name) = (text(class_name, "class_name")?, text(name, "name")?);
        let (id, _) = clones::add_entity(&mut model.0, &mm.0, class, optional(parent), name)?;
        put(out_id, id.0, "out_id")
    })
}

/// Creates a link binding `roles[i]` to `ends[i]` for `i < count`.
#[no_mangle]
pub unsafe extern "C" fn mk_model_connect(
    model: *mut MkModel,
    mm: *const MkMetamodel,
    association: *const c_char,
    roles: *const *const c_char,
    ends: *const u64,
    count: usize,
    container: u64,
    out_link: *mut u64,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get_mut(model, "model")?, get(mm, "mm")?);
        let association = text(association, "association")?;
        if count > 0 && (roles.is_null() || ends.is_null()) {
            return fail(MkStatus::NullArgument, "roles or ends is null");
        }
        let mut bound = Vec::with_capacity(count);
        for i in 0..count {
            bound.push((text(*roles.add(i), "role")?, EntityId(*ends.add(i))));
        }
        let (id, _) = clones::connect(&mut model.0, &mm.0, association, bound, optional(container))?;
        put(out_link, id.0, "out_link")
    })
}

/// Deletes an entity's subtree together with its correspondents.
#[no_mangle]
pub unsafe extern "C" fn mk_model_delete_entity(model: *mut MkModel, id: u64) -> MkStatus {
    guard(|| {
        clones::delete_entity(&mut get_mut(model, "model")?.0, EntityId(id))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mk_model_delete_link(model: *mut MkModel, id: u64) -> MkStatus {
    guard(|| {
        clones::delete_link(&mut get_mut(model, "model")?.0, LinkId(id))?;
        Ok(())
    })
}

/// Sets an attribute from a literal as written in model files (`2.5`,
/// `"text"`, `true`, `Idle`) and propagates it to unmodified clones.
#[no_mangle]
pub unsafe extern "C" fn mk_model_set_attribute(
    model: *mut MkModel,
    mm: *const MkMetamodel,
    id: u64,
    attribute: *const c_char,
    literal: *const c_char,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get_mut(model, "model")?, get(mm, "mm")?);
        let value = syntax_io::parse_value_literal(text(literal, "literal")?)?;
        clones::set_attribute(&mut model.0, &mm.0, EntityId(id), text(attribute, "attribute")?, value)?;
        Ok(())
    })
}

/// The attribute's value as a literal, falling back to the class default
/// when the entity does not set it.
#[no_mangle]
pub unsafe extern "C" fn mk_model_get_attribute(
    model: *const MkModel,
    mm: *const MkMetamodel,
    id: u64,
    attribute: *const c_char,
    out: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get(model, "model")?, get(mm, "mm")?);
        let attribute = text(attribute, "attribute")?;
        let flat = model.0.reflect(&mm.0, EntityId(id))?;
        let entity = model
            .0
            .entity(EntityId(id))
            .ok_or(ModelError::UnknownEntity(EntityId(id)))?;
        let value = match entity.attributes.get(attribute) {
            Some(v) => v.clone(),
            None => flat
                .attribute(attribute)
                .ok_or_else(|| ModelError::UnknownAttribute {
                    class: entity.class.clone(),
                    attribute: attribute.to_string(),
                })?
                .default
                .clone(),
        };
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        put_string(out, &syntax_io::format_value_literal(&value))
    })
}

/// Derives a clone (or, with `subprototype`, a subprototype) of `prototype`
/// under `parent`.
#[no_mangle]
pub unsafe extern "C" fn mk_model_clone(
    model: *mut MkModel,
    mm: *const MkMetamodel,
    prototype: u64,
    parent: u64,
    subprototype: bool,
    out_id: *mut u64,
) -> MkStatus {
    guard(|| {
        let (model, mm) = (get_mut(model, "model")?, get(mm, "mm")?);
        let id = if subprototype {
            clones::create_subprototype(&mut model.0, &mm.0, EntityId(prototype), optional(parent))?
        } else {
            clones::clone_entity(&mut model.0, &mm.0, EntityId(prototype), optional(parent))?
        };
        put(out_id, id.0, "out_id")
    })
}

/// Prototypes and what derives from them, one per line.
#[no_mangle]
pub unsafe extern "C" fn mk_model_derivations(model: *const MkModel, out: *mut *mut c_char) -> MkStatus {
    guard(|| {
        let model = get(model, "model")?;
        clones::audit(&model.0)?;
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        put_string(out, &clones::derivation_tree(&model.0))
    })
}

/// Merges two metamodels along an equivalence spec in the `.eqv` format.
/// `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn mk_merge(
    left: *const MkMetamodel,
    right: *const MkMetamodel,
    spec: *const c_char,
    out: *mut *mut MkMetamodel,
    report: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let (left, right) = (get(left, "left")?, get(right, "right")?);
        let spec = syntax_io::parse_equivalence(text(spec, "spec")?)?;
        if out.is_null() {
            return fail(MkStatus::NullArgument, "out is null");
        }
        let (merged, rep) = merge::merge(&left.0, &right.0, &spec)?;
        put_string(report, &rep.to_string())?;
        put(out, Box::into_raw(Box::new(MkMetamodel(merged))), "out")
    })
}

/// Classifies what stops conforming when `model` moves from `v1` to `v2`.
/// Writes the number of impacts and, when `report` is not null, one
/// `IMPACT <kind> <path>` line per impact.
#[no_mangle]
pub unsafe extern "C" fn mk_evolution_report(
    model: *const MkModel,
    v1: *const MkMetamodel,
    v2: *const MkMetamodel,
    impact_count: *mut usize,
    report: *mut *mut c_char,
) -> MkStatus {
    guard(|| {
        let (model, v1, v2) = (get(model, "model")?, get(v1, "v1")?, get(v2, "v2")?);
        let rep = evolution::evolution_report(&model.0, &v1.0, &v2.0)?;
        let mut text = String::new();
        for i in &rep.impacts {
            let _ = writeln!(text, "IMPACT {} {}", i.kind, i.path);
        }
        put(impact_count, rep.impacts.len(), "impact_count")?;
        put_string(report, &text)
    })
}
