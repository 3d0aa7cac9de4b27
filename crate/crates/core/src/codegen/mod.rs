//! Generation of an application skeleton and documentation from a model.
//!
//! The skeleton is a cargo project that depends on this crate:
//!
//! ```text
//! <project>/Cargo.toml
//! <project>/src/main.rs          model construction, behavior registry, runner
//! <project>/src/types.rs         one placeholder per data type
//! <project>/src/modules/<m>.rs   one unit per module
//! <project>/src/tests/<m>.rs     test stubs (optional)
//! <project>/docs/*.md            pages (optional)
//! ```
//!
//! Hand-written code lives between `// USER CODE BEGIN <id>` and
//! `// USER CODE END <id>` lines and survives regeneration. Every file starts
//! with a header holding a hash of everything outside the regions, so edits
//! there are detected instead of silently overwritten.

mod docs;
mod regions;
mod templates;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::metamodel::{is_identifier, SystemModel};
use crate::validate::{validate, Diagnostic};

pub use regions::{Comment, Split};

/// Generated files keyed by `/`-separated relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileSet {
    files: BTreeMap<String, String>,
}

impl FileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, content: impl Into<String>) {
        self.files.insert(path.into(), content.into());
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Reads those of `paths` that exist below `root`.
    pub fn read_existing<'a>(
        root: &Path,
        paths: impl IntoIterator<Item = &'a str>,
    ) -> std::io::Result<FileSet> {
        let mut out = FileSet::new();
        for p in paths {
            let full = root.join(p);
            match std::fs::read_to_string(&full) {
                Ok(text) => out.insert(p, text),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Writes every file below `root`, creating directories.
    pub fn write_to(&self, root: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (p, content) in &self.files {
            let full = root.join(p);
            if let Some(dir) = full.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&full, content)?;
            written.push(full);
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenOptions {
    /// Package name; defaults to the sanitized system name.
    pub project_name: Option<String>,
    pub emit_docs: bool,
    pub emit_tests: bool,
    /// Discard the content of existing user regions on regeneration.
    pub overwrite_user_regions: bool,
    /// Path of this crate as written into the generated manifest.
    pub runtime_path: String,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            project_name: None,
            emit_docs: false,
            emit_tests: false,
            overwrite_user_regions: false,
            runtime_path: env!("CARGO_MANIFEST_DIR").to_owned(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("model is invalid ({} diagnostics)", .0.len())]
    InvalidModel(Vec<Diagnostic>),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("`{first}` and `{second}` both map to the identifier `{ident}`")]
    NameCollision {
        first: String,
        second: String,
        ident: String,
    },
    #[error("{path}: {summary}")]
    IoConflict { path: String, summary: String },
    #[error("{path}: malformed user regions: {message}")]
    MalformedRegions { path: String, message: String },
}

const RUST_KEYWORDS: &[&str] = &[
    "abstract", "as", "async", "await", "become", "box", "break", "const", "continue", "crate",
    "do", "dyn", "else", "enum", "extern", "false", "final", "fn", "for", "gen", "if", "impl",
    "in", "let", "loop", "macro", "main", "match", "mod", "move", "mut", "override", "priv", "pub",
    "ref", "return", "self", "static", "struct", "super", "test", "tests", "trait", "true", "try",
    "type", "typeof", "unsafe", "unsized", "use", "virtual", "where", "while", "yield",
];

/// Lowercase `_`-separated form of a model identifier. Case changes start
/// a new word, runs of `_` collapse, and Rust keywords and names reserved by
/// the skeleton get a trailing `_`.
pub fn sanitize_ident(name: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c.is_ascii_uppercase() {
            if prev_lower && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
            prev_lower = false;
        } else if c.is_ascii_alphanumeric() {
            out.push(c);
            prev_lower = true;
        } else if !out.ends_with('_') {
            out.push('_');
            prev_lower = false;
        }
    }
    let trimmed = out.trim_matches('_');
    let mut out = if trimmed.is_empty() {
        "x".to_owned()
    } else {
        trimmed.to_owned()
    };
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    if RUST_KEYWORDS.contains(&out.as_str()) {
        out.push('_');
    }
    out
}

/// `UpperCamel` form of [`sanitize_ident`], for type names.
pub fn type_ident(name: &str) -> String {
    let snake = sanitize_ident(name);
    let camel: String = snake
        .split('_')
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            let first = cs.next().expect("non-empty word").to_ascii_uppercase();
            std::iter::once(first).chain(cs).collect::<String>()
        })
        .collect();
    match camel.as_str() {
        "" => "X".to_owned(),
        "Self" | "Value" | "Behavior" | "StepContext" => format!("{camel}_"),
        c if c.starts_with(|c: char| c.is_ascii_digit()) => format!("T{c}"),
        _ => camel,
    }
}

/// Identifier of every module and data type, checked for collisions.
#[derive(Debug, Clone)]
pub(crate) struct Names {
    pub project: String,
    pub modules: BTreeMap<String, String>,
    pub types: BTreeMap<String, String>,
}

fn unique(
    items: impl Iterator<Item = String>,
    f: impl Fn(&str) -> String,
) -> Result<BTreeMap<String, String>, CodegenError> {
    let mut by_ident: BTreeMap<String, String> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for name in items {
        let ident = f(&name);
        if let Some(first) = by_ident.get(&ident) {
            return Err(CodegenError::NameCollision {
                first: first.clone(),
                second: name,
                ident,
            });
        }
        by_ident.insert(ident.clone(), name.clone());
        out.insert(name, ident);
    }
    Ok(out)
}

fn names(model: &SystemModel, opts: &GenOptions) -> Result<Names, CodegenError> {
    let project = match &opts.project_name {
        Some(p) if is_identifier(p) => p.clone(),
        Some(p) => {
            return Err(CodegenError::InvalidOption(format!(
                "project name `{p}` is not an identifier"
            )))
        }
        None => sanitize_ident(&model.name),
    };
    let modules = unique(model.modules.iter().map(|m| m.name.clone()), sanitize_ident)?;
    let types = unique(model.data_types.iter().map(|t| t.name.clone()), type_ident)?;
    // struct names of modules and helper names of lines must stay distinct
    unique(model.modules.iter().map(|m| m.name.clone()), type_ident)?;
    for m in &model.modules {
        let line_ident = |n: &str| sanitize_ident(n).trim_end_matches('_').to_owned();
        unique(m.inputs.iter().map(|l| format!("{}.{}", m.name, l.name)), |q| {
            line_ident(q.split_once('.').map_or(q, |(_, l)| l))
        })?;
        unique(m.outputs.iter().map(|l| format!("{}.{}", m.name, l.name)), |q| {
            line_ident(q.split_once('.').map_or(q, |(_, l)| l))
        })?;
    }
    Ok(Names {
        project,
        modules,
        types,
    })
}

fn checked(model: &SystemModel) -> Result<(), CodegenError> {
    let diagnostics = validate(model);
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(CodegenError::InvalidModel(diagnostics))
    }
}

/// Builds the skeleton from scratch.
pub fn generate(model: &SystemModel, opts: &GenOptions) -> Result<FileSet, CodegenError> {
    checked(model)?;
    let names = names(model, opts)?;
    let mut files = templates::project(model, &names, opts);
    if opts.emit_docs {
        for (p, c) in docs::pages(model, &names).iter() {
            files.insert(p, c);
        }
    }
    Ok(files)
}

/// Markdown pages only: an index plus one page per module.
pub fn generate_docs(model: &SystemModel) -> Result<FileSet, CodegenError> {
    checked(model)?;
    let names = names(model, &GenOptions::default())?;
    Ok(docs::pages(model, &names))
}

/// Builds the skeleton and merges it with `existing`, the current content of
/// the same paths. User regions of existing files are kept unless
/// `overwrite_user_regions`; a file whose text outside the regions no
/// longer matches its recorded hash is a conflict.
pub fn regenerate(
    model: &SystemModel,
    opts: &GenOptions,
    existing: &FileSet,
) -> Result<FileSet, CodegenError> {
    let fresh = generate(model, opts)?;
    let mut out = FileSet::new();
    for (path, new_content) in fresh.iter() {
        let Some(old) = existing.get(path) else {
            out.insert(path, new_content);
            continue;
        };
        let comment = Comment::for_path(path);
        let malformed = |message| CodegenError::MalformedRegions {
            path: path.to_owned(),
            message,
        };
        let old_split = regions::split(old, comment).map_err(malformed)?;
        let new_split = regions::split(new_content, comment).map_err(malformed)?;
        match &old_split.recorded_hash {
            Some(h) if *h == regions::hash(&old_split.scaffold) => {}
            Some(_) => {
                return Err(CodegenError::IoConflict {
                    path: path.to_owned(),
                    summary: regions::diff_summary(&old_split.scaffold, &new_split.scaffold),
                })
            }
            None => {
                return Err(CodegenError::IoConflict {
                    path: path.to_owned(),
                    summary: "file exists but was not generated (no header)".to_owned(),
                })
            }
        }
        if opts.overwrite_user_regions {
            out.insert(path, new_content);
        } else {
            out.insert(path, regions::fill(new_content, comment, &old_split.regions));
        }
    }
    Ok(out)
}

/// Region bodies of a generated file, keyed by region id.
pub fn user_regions(path: &str, content: &str) -> Result<BTreeMap<String, String>, CodegenError> {
    regions::split(content, Comment::for_path(path))
        .map(|s| s.regions)
        .map_err(|message| CodegenError::MalformedRegions {
            path: path.to_owned(),
            message,
        })
}

/// Replaces region bodies of a generated file, keeping its header valid.
pub fn fill_regions(path: &str, content: &str, bodies: &BTreeMap<String, String>) -> String {
    regions::fill(content, Comment::for_path(path), bodies)
}

/// Counts lines that are neither blank nor comments.
pub fn code_lines(path: &str, content: &str) -> usize {
    let leader = Comment::for_path(path).open;
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(leader))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitizer() {
        assert_eq!(sanitize_ident("feelforce"), "feelforce");
        assert_eq!(sanitize_ident("feelForce"), "feel_force");
        assert_eq!(sanitize_ident("HTTPServer"), "httpserver");
        assert_eq!(sanitize_ident("a__b_"), "a_b");
        assert_eq!(sanitize_ident("_x"), "x");
        assert_eq!(sanitize_ident("match"), "match_");
        assert_eq!(sanitize_ident("main"), "main_");
        assert_eq!(sanitize_ident("Self"), "self_");
        assert_eq!(type_ident("heading"), "Heading");
        assert_eq!(type_ident("range_map"), "RangeMap");
        assert_eq!(type_ident("Value"), "Value_");
    }

    #[test]
    fn collisions_are_reported() {
        let model = crate::SystemBuilder::new("s")
            .module("fooBar", 0, |m| m)
            .module("foo_bar", 0, |m| m)
            .build();
        match generate(&model, &GenOptions::default()) {
            Err(CodegenError::NameCollision { ident, .. }) => assert_eq!(ident, "foo_bar"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_project_name() {
        let opts = GenOptions {
            project_name: Some("my-app".into()),
            ..GenOptions::default()
        };
        assert!(matches!(
            generate(&crate::example::example_model(), &opts),
            Err(CodegenError::InvalidOption(_))
        ));
    }

    #[test]
    fn code_line_count() {
        assert_eq!(code_lines("a.rs", "// c\n\nfn x() {}\n  // d\n}\n"), 2);
        assert_eq!(code_lines("Cargo.toml", "# c\n[a]\n"), 1);
    }
}
