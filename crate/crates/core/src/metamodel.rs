//! In-memory form of the modeling language.
//!
//! A [`SystemModel`] is a plain tree of declarations. Cross references (wire
//! endpoints, modifier targets, line data types) are stored by name so that a
//! model can be built from unchecked input and still be inspected; the
//! `validate` module reports the ones that do not resolve.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Words reserved by the textual notation. They cannot be used as names.
pub const KEYWORDS: &[&str] = &[
    "system", "type", "module", "layer", "in", "out", "wire", "suppress", "inhibit", "by", "for",
    "ms",
];

/// Returns true if `name` is usable as a model identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub data_types: Vec<DataTypeDecl>,
    #[serde(default)]
    pub modules: Vec<ModuleDecl>,
    #[serde(default)]
    pub wires: Vec<Wire>,
    #[serde(default)]
    pub modifiers: Vec<Modifier>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTypeDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Level of competence. Higher layers may intercept lower ones.
    pub layer: u32,
    #[serde(default)]
    pub inputs: Vec<LineDecl>,
    #[serde(default)]
    pub outputs: Vec<LineDecl>,
}

/// An input or output line of a module. Direction is given by which list of
/// the owning [`ModuleDecl`] holds it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub data_type: String,
}

/// `module.line` reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct QualifiedName {
    pub module: String,
    pub line: String,
}

impl QualifiedName {
    pub fn new(module: impl Into<String>, line: impl Into<String>) -> Self {
        Self {
            module: module.into(),
            line: line.into(),
        }
    }

    /// Parses `module.line`. Both halves must be non-empty.
    pub fn parse(text: &str) -> Option<Self> {
        let (module, line) = text.split_once('.')?;
        if module.is_empty() || line.is_empty() || line.contains('.') {
            return None;
        }
        Some(Self::new(module, line))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.module, self.line)
    }
}

impl From<QualifiedName> for String {
    fn from(q: QualifiedName) -> Self {
        q.to_string()
    }
}

impl TryFrom<String> for QualifiedName {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        QualifiedName::parse(&value).ok_or_else(|| format!("expected `module.line`, got `{value}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    /// An output line.
    pub source: QualifiedName,
    /// An input line.
    pub sink: QualifiedName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModifierKind {
    /// Replaces data arriving on an input line.
    Suppressor,
    /// Discards data leaving an output line.
    Inhibitor,
}

impl ModifierKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ModifierKind::Suppressor => "suppress",
            ModifierKind::Inhibitor => "inhibit",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            ModifierKind::Suppressor => 'S',
            ModifierKind::Inhibitor => 'I',
        }
    }
}

impl fmt::Display for ModifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModifierKind::Suppressor => "suppressor",
            ModifierKind::Inhibitor => "inhibitor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modifier {
    pub kind: ModifierKind,
    /// Input line for a suppressor, output line for an inhibitor.
    pub target: QualifiedName,
    pub controlled_by: QualifiedName,
    /// Interception window after each control message, in virtual milliseconds.
    pub time_ms: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Input,
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Input => "input",
            Direction::Output => "output",
        })
    }
}

/// A resolved line: indices into the owning model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineRef {
    pub module: usize,
    pub direction: Direction,
    pub index: usize,
}

/// Position of an element inside a model, used to locate diagnostics and
/// source spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementPath {
    System,
    DataType(usize),
    Module(usize),
    Line(LineRef),
    Wire(usize),
    Modifier(usize),
}

impl ElementPath {
    /// Declaration order: types, modules with their lines, wires, modifiers.
    fn sort_key(&self) -> (u8, usize, u8, usize) {
        match *self {
            ElementPath::System => (0, 0, 0, 0),
            ElementPath::DataType(i) => (1, i, 0, 0),
            ElementPath::Module(i) => (2, i, 0, 0),
            ElementPath::Line(r) => (
                2,
                r.module,
                match r.direction {
                    Direction::Input => 1,
                    Direction::Output => 2,
                },
                r.index,
            ),
            ElementPath::Wire(i) => (3, i, 0, 0),
            ElementPath::Modifier(i) => (4, i, 0, 0),
        }
    }

    /// Human-readable location such as `module runaway / input force`.
    pub fn describe(&self, model: &SystemModel) -> String {
        match *self {
            ElementPath::System => format!("system {}", model.name),
            ElementPath::DataType(i) => format!("type {}", model.data_types[i].name),
            ElementPath::Module(i) => format!("module {}", model.modules[i].name),
            ElementPath::Line(r) => format!(
                "module {} / {} {}",
                model.modules[r.module].name,
                r.direction,
                model.line(r).name
            ),
            ElementPath::Wire(i) => {
                let w = &model.wires[i];
                format!("wire {} -> {}", w.source, w.sink)
            }
            ElementPath::Modifier(i) => {
                let m = &model.modifiers[i];
                format!("{} on {}", m.kind, m.target)
            }
        }
    }
}

impl PartialOrd for ElementPath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ElementPath {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl SystemModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: None,
            data_types: Vec::new(),
            modules: Vec::new(),
            wires: Vec::new(),
            modifiers: Vec::new(),
        }
    }

    pub fn module_index(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDecl> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn data_type(&self, name: &str) -> Option<&DataTypeDecl> {
        self.data_types.iter().find(|t| t.name == name)
    }

    /// Looks up `module.line`. The first module with the given name wins,
    /// inputs are searched before outputs.
    pub fn resolve(&self, path: &QualifiedName) -> Option<LineRef> {
        let module = self.module_index(&path.module)?;
        let decl = &self.modules[module];
        if let Some(index) = decl.inputs.iter().position(|l| l.name == path.line) {
            return Some(LineRef {
                module,
                direction: Direction::Input,
                index,
            });
        }
        decl.outputs
            .iter()
            .position(|l| l.name == path.line)
            .map(|index| LineRef {
                module,
                direction: Direction::Output,
                index,
            })
    }

    /// [`resolve`](Self::resolve) for a `module.line` string.
    pub fn resolve_str(&self, path: &str) -> Option<LineRef> {
        self.resolve(&QualifiedName::parse(path)?)
    }

    pub fn resolve_input(&self, path: &QualifiedName) -> Option<LineRef> {
        self.resolve(path).filter(|r| r.direction == Direction::Input)
    }

    pub fn resolve_output(&self, path: &QualifiedName) -> Option<LineRef> {
        self.resolve(path).filter(|r| r.direction == Direction::Output)
    }

    pub fn line(&self, r: LineRef) -> &LineDecl {
        let m = &self.modules[r.module];
        match r.direction {
            Direction::Input => &m.inputs[r.index],
            Direction::Output => &m.outputs[r.index],
        }
    }

    pub fn qualified(&self, r: LineRef) -> QualifiedName {
        QualifiedName::new(self.modules[r.module].name.clone(), self.line(r).name.clone())
    }

    /// Distinct layer indices in ascending order.
    pub fn layers(&self) -> BTreeSet<u32> {
        self.modules.iter().map(|m| m.layer).collect()
    }

    /// Sum of input and output line counts over all modules.
    pub fn line_count(&self) -> usize {
        self.modules
            .iter()
            .map(|m| m.inputs.len() + m.outputs.len())
            .sum()
    }

    /// Copy of the model without the given modules, the wires touching them,
    /// and the modifiers whose target or control line belongs to them.
    pub fn without_modules(&self, names: &[&str]) -> SystemModel {
        let keep = |q: &QualifiedName| !names.contains(&q.module.as_str());
        SystemModel {
            name: self.name.clone(),
            description: self.description.clone(),
            data_types: self.data_types.clone(),
            modules: self
                .modules
                .iter()
                .filter(|m| !names.contains(&m.name.as_str()))
                .cloned()
                .collect(),
            wires: self
                .wires
                .iter()
                .filter(|w| keep(&w.source) && keep(&w.sink))
                .cloned()
                .collect(),
            modifiers: self
                .modifiers
                .iter()
                .filter(|m| keep(&m.target) && keep(&m.controlled_by))
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl ModuleDecl {
    pub fn new(name: impl Into<String>, layer: u32) -> Self {
        Self {
            name: name.into(),
            description: None,
            layer,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&self, name: &str) -> Option<&LineDecl> {
        self.inputs.iter().find(|l| l.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&LineDecl> {
        self.outputs.iter().find(|l| l.name == name)
    }
}

impl LineDecl {
    pub fn new(name: impl Into<String>, data_type: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: None,
            data_type: data_type.into(),
        }
    }
}

/// Fluent construction of a [`SystemModel`], used by tests and generated
/// applications.
///
/// Qualified names that are not of the form `module.line` panic; the builder
/// is meant for literal models written by hand or by the generator.
#[derive(Debug, Clone)]
pub struct SystemBuilder {
    model: SystemModel,
}

impl SystemBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            model: SystemModel::new(name),
        }
    }

    pub fn description(mut self, text: impl Into<String>) -> Self {
        self.model.description = Some(text.into());
        self
    }

    pub fn data_type(mut self, name: impl Into<String>, description: Option<&str>) -> Self {
        self.model.data_types.push(DataTypeDecl {
            name: name.into(),
            description: description.map(str::to_owned),
        });
        self
    }

    pub fn module(
        mut self,
        name: impl Into<String>,
        layer: u32,
        build: impl FnOnce(ModuleBuilder) -> ModuleBuilder,
    ) -> Self {
        let decl = build(ModuleBuilder {
            decl: ModuleDecl::new(name, layer),
        })
        .decl;
        self.model.modules.push(decl);
        self
    }

    pub fn wire(mut self, source: &str, sink: &str) -> Self {
        self.model.wires.push(Wire {
            source: qname(source),
            sink: qname(sink),
        });
        self
    }

    pub fn suppress(self, target: &str, controlled_by: &str, time_ms: i64) -> Self {
        self.modifier(ModifierKind::Suppressor, target, controlled_by, time_ms)
    }

    pub fn inhibit(self, target: &str, controlled_by: &str, time_ms: i64) -> Self {
        self.modifier(ModifierKind::Inhibitor, target, controlled_by, time_ms)
    }

    pub fn modifier(
        mut self,
        kind: ModifierKind,
        target: &str,
        controlled_by: &str,
        time_ms: i64,
    ) -> Self {
        self.model.modifiers.push(Modifier {
            kind,
            target: qname(target),
            controlled_by: qname(controlled_by),
            time_ms,
        });
        self
    }

    pub fn build(self) -> SystemModel {
        self.model
    }
}

#[derive(Debug, Clone)]
pub struct ModuleBuilder {
    decl: ModuleDecl,
}

impl ModuleBuilder {
    pub fn description(mut self, text: impl Into<String>) -> Self {
        self.decl.description = Some(text.into());
        self
    }

    pub fn input(self, name: &str, data_type: &str) -> Self {
        self.input_with(name, data_type, None)
    }

    pub fn output(self, name: &str, data_type: &str) -> Self {
        self.output_with(name, data_type, None)
    }

    pub fn input_with(mut self, name: &str, data_type: &str, description: Option<&str>) -> Self {
        self.decl.inputs.push(LineDecl {
            name: name.to_owned(),
            description: description.map(str::to_owned),
            data_type: data_type.to_owned(),
        });
        self
    }

    pub fn output_with(mut self, name: &str, data_type: &str, description: Option<&str>) -> Self {
        self.decl.outputs.push(LineDecl {
            name: name.to_owned(),
            description: description.map(str::to_owned),
            data_type: data_type.to_owned(),
        });
        self
    }
}

fn qname(text: &str) -> QualifiedName {
    QualifiedName::parse(text).unwrap_or_else(|| panic!("`{text}` is not a `module.line` name"))
}
