//! Textual notation for system models (`.sub` files).
//!
//! ```text
//! system brooks "description" {
//!   type Heading;
//!   module runaway layer 0 {
//!     in force: Force;
//!     out heading: Heading;
//!   }
//!   wire feelforce.force -> runaway.force;
//!   suppress turn.heading by avoid.heading for 250 ms;
//! }
//! ```
//!
//! `#` starts a comment running to the end of the line. Comments are not
//! kept by [`format`].

mod lexer;
mod parser;

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::metamodel::{ElementPath, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in characters.
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(span: SourceSpan, message: String, expected: Vec<String>) -> Self {
        debug_assert!(!message.is_empty());
        Self {
            span,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Source locations of parsed model elements.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: HashMap<ElementPath, SourceSpan>,
}

impl SourceMap {
    pub(crate) fn insert(&mut self, path: ElementPath, span: SourceSpan) {
        self.spans.insert(path, span);
    }

    pub fn get(&self, path: &ElementPath) -> Option<SourceSpan> {
        self.spans.get(path).copied()
    }
}

/// Parses a `.sub` document. On failure every error found is returned,
/// ordered by position.
pub fn parse(text: &str) -> Result<SystemModel, Vec<ParseError>> {
    parser::parse_text(text).map(|(model, _)| model)
}

/// Like [`parse`], also returning the span of every declaration.
pub fn parse_with_spans(text: &str) -> Result<(SystemModel, SourceMap), Vec<ParseError>> {
    parser::parse_text(text)
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn description(d: &Option<String>) -> String {
    d.as_deref().map(|d| format!(" {}", quote(d))).unwrap_or_default()
}

/// Canonical text of a model: two-space indentation, one declaration per
/// line, groups (types, modules, wires, modifiers) separated by a blank line.
pub fn format(model: &SystemModel) -> String {
    let mut groups: Vec<String> = Vec::new();

    let mut types = String::new();
    for t in &model.data_types {
        let _ = writeln!(types, "  type {}{};", t.name, description(&t.description));
    }
    groups.push(types);

    let mut modules = String::new();
    for m in &model.modules {
        let _ = writeln!(
            modules,
            "  module {} layer {}{} {{",
            m.name,
            m.layer,
            description(&m.description)
        );
        for (dir, lines) in [("in", &m.inputs), ("out", &m.outputs)] {
            for l in lines {
                let _ = writeln!(
                    modules,
                    "    {dir} {}: {}{};",
                    l.name,
                    l.data_type,
                    description(&l.description)
                );
            }
        }
        modules.push_str("  }\n");
    }
    groups.push(modules);

    let mut wires = String::new();
    for w in &model.wires {
        let _ = writeln!(wires, "  wire {} -> {};", w.source, w.sink);
    }
    groups.push(wires);

    let mut modifiers = String::new();
    for m in &model.modifiers {
        let _ = writeln!(
            modifiers,
            "  {} {} by {} for {} ms;",
            m.kind.keyword(),
            m.target,
            m.controlled_by,
            m.time_ms
        );
    }
    groups.push(modifiers);

    let body: Vec<String> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    format!(
        "system {}{} {{\n{}}}\n",
        model.name,
        description(&model.description),
        body.join("\n")
    )
}
