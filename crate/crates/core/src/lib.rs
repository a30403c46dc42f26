//! A metamodelling kernel: metamodels with specialization, containment,
//! associations and constraints; conforming models; prototype/clone
//! derivation with copy-on-write; metamodel merging; evolution reports;
//! and the textual formats and command line that drive them.

pub mod cli;
pub mod clones;
pub mod constraints;
pub mod diagnostics;
pub mod evolution;
pub mod merge;
pub mod meta_core;
pub mod model_store;
pub mod syntax_io;
mod text;
