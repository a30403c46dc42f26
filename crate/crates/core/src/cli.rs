//! Command-line front end. Machine-readable output goes to stdout, human
//! diagnostics to stderr. Exit status: 0 clean, 1 problems found, 2 usage,
//! parse or internal error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};

use crate::clones;
use crate::constraints;
use crate::diagnostics::{Diagnostic, Severity};
use crate::evolution;
use crate::merge;
use crate::meta_core::{validate_metamodel, Metamodel};
use crate::model_store::{check_conformance_with, CheckOptions, EntityId, Model};
use crate::syntax_io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROBLEMS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "metakernel",
    version,
    about = "Define metamodels, check models, derive clones, merge and evolve languages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file (.mdl)
    model: PathBuf,
    /// Metamodel file (.mm)
    metamodel: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a metamodel for well-formedness
    Validate { metamodel: PathBuf },
    /// Check a model against its metamodel
    Check {
        #[command(flatten)]
        files: ModelArgs,
        #[arg(long)]
        skip_constraints: bool,
    },
    /// Evaluate every metamodel constraint on a model
    Constraints {
        #[command(flatten)]
        files: ModelArgs,
    },
    /// Derive a clone of a prototype entity and write the resulting model
    Clone {
        #[command(flatten)]
        files: ModelArgs,
        /// Prototype entity, as `/A/B` or `#id`
        prototype: String,
        /// Parent of the new clone; omitted for a root
        #[arg(long)]
        parent: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
        /// Derive a subprototype instead of a clone
        #[arg(long)]
        subprototype: bool,
    },
    /// List prototypes and what derives from them
    Derivations {
        #[command(flatten)]
        files: ModelArgs,
    },
    /// Merge two metamodels along an equivalence spec
    Merge {
        left: PathBuf,
        right: PathBuf,
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the merge report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
        /// Name of the merged metamodel
        #[arg(long)]
        name: Option<String>,
    },
    /// Compare metamodel versions
    Evolve {
        #[command(subcommand)]
        command: EvolveCommand,
    },
    /// Report entities whose glyph is overridden in the model
    Lint {
        #[command(flatten)]
        files: ModelArgs,
    },
}

#[derive(Debug, Subcommand)]
enum EvolveCommand {
    /// List the changes between two metamodel versions
    Diff { old: PathBuf, new: PathBuf },
    /// Classify what stops conforming when a model moves to the new version
    Report { old: PathBuf, new: PathBuf, model: PathBuf },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Io<'_> {
    fn diagnostic(&mut self, d: &Diagnostic, model: Option<&Model>) -> Result<()> {
        let severity = match (self.color, d.severity) {
            (true, Severity::Error) => "\x1b[31merror\x1b[0m".to_string(),
            (true, Severity::Warning) => "\x1b[33mwarning\x1b[0m".to_string(),
            (false, s) => s.to_string(),
        };
        let at = model.map_or_else(|| d.location.to_string(), |m| m.location_path(&d.location));
        writeln!(self.err, "{severity}[{}] {at}: {}", d.code, d.message)?;
        Ok(())
    }

    /// Prints diagnostics one per line and returns the matching status.
    fn report(&mut self, diags: &[Diagnostic], model: Option<&Model>) -> Result<i32> {
        for d in diags {
            self.diagnostic(d, model)?;
        }
        Ok(if diags.iter().any(Diagnostic::is_error) {
            EXIT_PROBLEMS
        } else {
            EXIT_OK
        })
    }
}

fn read(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(syntax_io::decode(&bytes)
        .with_context(|| path.display().to_string())?
        .to_string())
}

fn load_metamodel(path: &Path) -> Result<Metamodel> {
    syntax_io::parse_metamodel(&read(path)?).with_context(|| path.display().to_string())
}

fn load(files: &ModelArgs) -> Result<(Model, Metamodel)> {
    let mm = load_metamodel(&files.metamodel)?;
    let model = syntax_io::parse_model(&read(&files.model)?, &mm).with_context(|| files.model.display().to_string())?;
    Ok((model, mm))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn resolve(model: &Model, path: &str) -> Result<EntityId> {
    model
        .resolve(path)
        .with_context(|| format!("cannot resolve entity '{path}'"))
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<i32> {
    match cli.command {
        Command::Validate { metamodel } => {
            let mm = syntax_io::parse_metamodel_unchecked(&read(&metamodel)?)
                .with_context(|| metamodel.display().to_string())?;
            io.report(&validate_metamodel(&mm), None)
        }
        Command::Check {
            files,
            skip_constraints,
        } => {
            let (model, mm) = load(&files)?;
            let opts = CheckOptions {
                skip_constraints,
                ignore_metamodel_ref: false,
            };
            let diags = check_conformance_with(&model, &mm, opts)?;
            io.report(&diags, Some(&model))
        }
        Command::Constraints { files } => {
            let (model, mm) = load(&files)?;
            let eval = constraints::eval_all(&model, &mm);
            let mut status = EXIT_OK;
            for r in &eval.results {
                let verdict = if r.violations.is_empty() {
                    "ok".to_string()
                } else {
                    format!("{} violation(s)", r.violations.len())
                };
                writeln!(io.err, "{:<32} {verdict}", r.name)?;
                for v in &r.violations {
                    status = EXIT_PROBLEMS;
                    writeln!(io.out, "CONSTRAINT {} VIOLATED at {}", r.name, model.path_of(v.context))?;
                    writeln!(io.err, "  {}", v.message)?;
                }
            }
            Ok(status)
        }
        Command::Clone {
            files,
            prototype,
            parent,
            output,
            subprototype,
        } => {
            let (mut model, mm) = load(&files)?;
            let proto = resolve(&model, &prototype)?;
            let parent = parent.map(|p| resolve(&model, &p)).transpose()?;
            let derived = if subprototype {
                clones::create_subprototype(&mut model, &mm, proto, parent)?
            } else {
                clones::clone_entity(&mut model, &mm, proto, parent)?
            };
            write_file(&output, &syntax_io::serialize_model(&model))?;
            writeln!(io.out, "{} {}", derived, model.path_of(derived))?;
            Ok(EXIT_OK)
        }
        Command::Derivations { files } => {
            let (model, _) = load(&files)?;
            write!(io.out, "{}", clones::derivation_tree(&model))?;
            Ok(EXIT_OK)
        }
        Command::Merge {
            left,
            right,
            spec,
            output,
            report,
            name,
        } => {
            let l = load_metamodel(&left)?;
            let r = load_metamodel(&right)?;
            let spec = syntax_io::parse_equivalence(&read(&spec)?).with_context(|| spec.display().to_string())?;
            let (merged, rep) = match name {
                Some(n) => merge::merge_named(&l, &r, &spec, &n)?,
                None => merge::merge(&l, &r, &spec)?,
            };
            write_file(&output, &syntax_io::serialize_metamodel(&merged))?;
            match report {
                Some(p) => write_file(&p, &rep.to_string())?,
                None => write!(io.out, "{rep}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Evolve {
            command: EvolveCommand::Diff { old, new },
        } => {
            let diff = evolution::diff_metamodels(&load_metamodel(&old)?, &load_metamodel(&new)?);
            for c in &diff.changes {
                writeln!(io.out, "{c}")?;
            }
            Ok(if diff.is_empty() { EXIT_OK } else { EXIT_PROBLEMS })
        }
        Command::Evolve {
            command: EvolveCommand::Report { old, new, model },
        } => {
            let v1 = load_metamodel(&old)?;
            let v2 = load_metamodel(&new)?;
            let m = syntax_io::parse_model(&read(&model)?, &v1).with_context(|| model.display().to_string())?;
            let report = evolution::evolution_report(&m, &v1, &v2)?;
            for c in &report.diff.changes {
                writeln!(io.err, "change: {c}")?;
            }
            for i in &report.impacts {
                let cause = i.cause.as_ref().map_or_else(|| "-".to_string(), |c| c.to_string());
                writeln!(
                    io.err,
                    "{:<24} {:<32} {}  (cause: {cause})",
                    i.kind.as_str(),
                    i.path,
                    i.diagnostic.message
                )?;
                writeln!(io.out, "IMPACT {} {}", i.kind, i.path)?;
            }
            Ok(if report.is_empty() { EXIT_OK } else { EXIT_PROBLEMS })
        }
        Command::Lint { files } => {
            let (model, mm) = load(&files)?;
            io.report(&syntax_io::lint_syntax_overrides(&model, &mm), Some(&model))
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let color = std::env::var("METAKERNEL_COLOR").is_ok_and(|v| v == "1");
    let mut io = Io { out, err, color };
    match execute(cli, &mut io) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let status = run(
            std::iter::once("metakernel").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&[]).0, EXIT_ERROR);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_ERROR);
        let (status, _, err) = run_args(&["validate", "/nonexistent/x.mm"]);
        assert_eq!(status, EXIT_ERROR);
        assert_eq!(err.lines().count(), 1);
        assert!(err.starts_with("error: cannot read"));
    }

    #[test]
    fn help_is_not_an_error() {
        let (status, _, err) = run_args(&["--help"]);
        assert_eq!(status, EXIT_OK);
        assert!(err.contains("validate"));
    }
}
