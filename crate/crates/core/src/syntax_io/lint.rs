//! Concrete-syntax lint: per-entity glyph overrides.

use crate::diagnostics::{DiagCode, Diagnostic, Diagnostics, Location};
use crate::meta_core::Metamodel;
use crate::model_store::Model;

/// Extension key under which an entity overrides its class glyph.
pub const GLYPH_KEY: &str = "glyph";

/// One warning per entity whose `glyph` extension differs from the glyph
/// its class declares (or the class name, when none is declared).
pub fn lint_syntax_overrides(model: &Model, mm: &Metamodel) -> Diagnostics {
    model
        .entities()
        .filter_map(|e| {
            let glyph = e.extensions.get(GLYPH_KEY)?;
            let default = mm.class(&e.class).map_or(e.class.as_str(), |c| c.effective_glyph());
            (glyph != default).then(|| {
                Diagnostic::warning(
                    DiagCode::GlyphOverride,
                    Location::Entity(e.id),
                    format!(
                        "{} overrides the glyph of {} ('{default}') with '{glyph}'",
                        model.path_of(e.id),
                        e.class
                    ),
                )
            })
        })
        .collect()
}
