//! Well-formedness rules for system models.
//!
//! | code | rule |
//! |------|------|
//! | V1 | every reference (wire endpoint, modifier line, line data type) resolves |
//! | V2 | names are valid identifiers and unique (modules, types, lines of a module) |
//! | V3 | an input line is the sink of at most one wire |
//! | V4 | a suppressor's controlling module is on the same or a higher layer than the suppressed input's module |
//! | V5 | the same for an inhibitor and the inhibited output's module |
//! | V6 | wire endpoints share a data type; a suppressor's control line has its target's type |
//! | V7 | modifier time is positive |
//! | V8 | at most one modifier per target line |
//! | V9 | suppressors target inputs, inhibitors target outputs |

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::dsl::{SourceMap, SourceSpan};
use crate::metamodel::{
    is_identifier, Direction, ElementPath, LineRef, ModifierKind, QualifiedName, SystemModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Code {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
    V9,
}

impl Code {
    pub const ALL: [Code; 9] = [
        Code::V1,
        Code::V2,
        Code::V3,
        Code::V4,
        Code::V5,
        Code::V6,
        Code::V7,
        Code::V8,
        Code::V9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::V1 => "V1",
            Code::V2 => "V2",
            Code::V3 => "V3",
            Code::V4 => "V4",
            Code::V5 => "V5",
            Code::V6 => "V6",
            Code::V7 => "V7",
            Code::V8 => "V8",
            Code::V9 => "V9",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Code::V1 => "dangling reference",
            Code::V2 => "invalid or duplicate name",
            Code::V3 => "input wired more than once",
            Code::V4 => "suppressor controlled from a lower layer",
            Code::V5 => "inhibitor controlled from a lower layer",
            Code::V6 => "data type mismatch",
            Code::V7 => "non-positive interception time",
            Code::V8 => "stacked modifiers",
            Code::V9 => "modifier kind does not match its target",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub element: ElementPath,
    /// Readable form of `element`, e.g. `module runaway / input force`.
    pub location: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    /// `FILE:LINE:COL: error[Vn]: message`. Without a span the position is
    /// reported as `1:1`.
    pub fn render(&self, file: &str) -> String {
        let (line, col) = self.span.map(|s| (s.line, s.column)).unwrap_or((1, 1));
        format!(
            "{file}:{line}:{col}: {}[{}]: {}",
            self.severity, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}]: {} ({})",
            self.severity, self.code, self.message, self.location
        )
    }
}

struct Checker<'a> {
    model: &'a SystemModel,
    found: Vec<(ElementPath, Code, String)>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, element: ElementPath, code: Code, message: String) {
        self.found.push((element, code, message));
    }

    fn names(&mut self) {
        let model = self.model;
        if !is_identifier(&model.name) {
            self.report(
                ElementPath::System,
                Code::V2,
                format!("system name `{}` is not a valid identifier", model.name),
            );
        }

        let mut seen = HashSet::new();
        for (i, t) in model.data_types.iter().enumerate() {
            if !is_identifier(&t.name) {
                self.report(
                    ElementPath::DataType(i),
                    Code::V2,
                    format!("type name `{}` is not a valid identifier", t.name),
                );
            } else if !seen.insert(t.name.as_str()) {
                self.report(
                    ElementPath::DataType(i),
                    Code::V2,
                    format!("type `{}` is declared more than once", t.name),
                );
            }
        }

        let mut seen = HashSet::new();
        for (i, m) in model.modules.iter().enumerate() {
            if !is_identifier(&m.name) {
                self.report(
                    ElementPath::Module(i),
                    Code::V2,
                    format!("module name `{}` is not a valid identifier", m.name),
                );
            } else if !seen.insert(m.name.as_str()) {
                self.report(
                    ElementPath::Module(i),
                    Code::V2,
                    format!("module `{}` is declared more than once", m.name),
                );
            }

            let mut lines = HashSet::new();
            let all = m
                .inputs
                .iter()
                .enumerate()
                .map(|(j, l)| (Direction::Input, j, l))
                .chain(
                    m.outputs
                        .iter()
                        .enumerate()
                        .map(|(j, l)| (Direction::Output, j, l)),
                );
            for (direction, index, line) in all {
                let at = ElementPath::Line(LineRef {
                    module: i,
                    direction,
                    index,
                });
                if !is_identifier(&line.name) {
                    self.report(
                        at,
                        Code::V2,
                        format!(
                            "line name `{}` of module `{}` is not a valid identifier",
                            line.name, m.name
                        ),
                    );
                } else if !lines.insert(line.name.as_str()) {
                    self.report(
                        at,
                        Code::V2,
                        format!(
                            "line `{}` is declared more than once in module `{}`",
                            line.name, m.name
                        ),
                    );
                }
                if model.data_type(&line.data_type).is_none() {
                    self.report(
                        at,
                        Code::V1,
                        format!(
                            "line `{}.{}` refers to undeclared type `{}`",
                            m.name, line.name, line.data_type
                        ),
                    );
                }
            }
        }
    }

    fn endpoint(
        &mut self,
        at: ElementPath,
        what: &str,
        q: &QualifiedName,
        want: Direction,
    ) -> Option<LineRef> {
        match self.model.resolve(q) {
            Some(r) if r.direction == want => Some(r),
            Some(r) => {
                self.report(
                    at,
                    Code::V1,
                    format!("{what} `{q}` is an {} line, expected an {want} line", r.direction),
                );
                None
            }
            None => {
                self.report(at, Code::V1, format!("{what} `{q}` does not exist"));
                None
            }
        }
    }

    fn wires(&mut self) {
        let model = self.model;
        let mut sinks: HashMap<LineRef, usize> = HashMap::new();
        for (i, w) in model.wires.iter().enumerate() {
            let at = ElementPath::Wire(i);
            let source = self.endpoint(at, "wire source", &w.source, Direction::Output);
            let sink = self.endpoint(at, "wire sink", &w.sink, Direction::Input);
            if let Some(sink) = sink {
                if let Some(&first) = sinks.get(&sink) {
                    let other = &model.wires[first];
                    self.report(
                        at,
                        Code::V3,
                        format!(
                            "input `{}` is already wired from `{}`; wire from `{}` is a second source",
                            w.sink, other.source, w.source
                        ),
                    );
                } else {
                    sinks.insert(sink, i);
                }
            }
            if let (Some(source), Some(sink)) = (source, sink) {
                let (st, kt) = (&model.line(source).data_type, &model.line(sink).data_type);
                if st != kt {
                    self.report(
                        at,
                        Code::V6,
                        format!(
                            "wire `{}` -> `{}` connects type `{st}` to type `{kt}`",
                            w.source, w.sink
                        ),
                    );
                }
            }
        }
    }

    fn modifiers(&mut self) {
        let model = self.model;
        let mut targets: HashMap<LineRef, usize> = HashMap::new();
        for (i, m) in model.modifiers.iter().enumerate() {
            let at = ElementPath::Modifier(i);
            if m.time_ms <= 0 {
                self.report(
                    at,
                    Code::V7,
                    format!(
                        "{} on `{}` has time {} ms; it must be positive",
                        m.kind, m.target, m.time_ms
                    ),
                );
            }

            let control = self.endpoint(at, "control line", &m.controlled_by, Direction::Output);
            let target = match model.resolve(&m.target) {
                Some(r) => Some(r),
                None => {
                    self.report(
                        at,
                        Code::V1,
                        format!("{} target `{}` does not exist", m.kind, m.target),
                    );
                    None
                }
            };
            let Some(target) = target else { continue };

            if let Some(&first) = targets.get(&target) {
                let other = &model.modifiers[first];
                self.report(
                    at,
                    Code::V8,
                    format!(
                        "`{}` already has a {} controlled by `{}`; second {} controlled by `{}`",
                        m.target, other.kind, other.controlled_by, m.kind, m.controlled_by
                    ),
                );
            } else {
                targets.insert(target, i);
            }

            let expected = match m.kind {
                ModifierKind::Suppressor => Direction::Input,
                ModifierKind::Inhibitor => Direction::Output,
            };
            if target.direction != expected {
                self.report(
                    at,
                    Code::V9,
                    format!(
                        "{} targets `{}`, an {} line; a {} must target an {expected} line",
                        m.kind, m.target, target.direction, m.kind
                    ),
                );
                continue;
            }
            let Some(control) = control else { continue };

            let controller = &model.modules[control.module];
            let owner = &model.modules[target.module];
            if controller.layer < owner.layer {
                let code = match m.kind {
                    ModifierKind::Suppressor => Code::V4,
                    ModifierKind::Inhibitor => Code::V5,
                };
                self.report(
                    at,
                    code,
                    format!(
                        "{} on `{}` (layer {}) is controlled by `{}` from lower layer {}",
                        m.kind, m.target, owner.layer, m.controlled_by, controller.layer
                    ),
                );
            }

            if m.kind == ModifierKind::Suppressor {
                let (ct, tt) = (
                    &model.line(control).data_type,
                    &model.line(target).data_type,
                );
                if ct != tt {
                    self.report(
                        at,
                        Code::V6,
                        format!(
                            "suppressor on `{}` (type `{tt}`) is controlled by `{}` of type `{ct}`",
                            m.target, m.controlled_by
                        ),
                    );
                }
            }
        }
    }
}

/// Checks every rule and returns all findings ordered by model position,
/// then by code. An empty list means the model is valid.
pub fn validate(model: &SystemModel) -> Vec<Diagnostic> {
    validate_with_spans(model, None)
}

/// [`validate`] with source spans attached from a parse.
pub fn validate_with_spans(model: &SystemModel, spans: Option<&SourceMap>) -> Vec<Diagnostic> {
    let mut checker = Checker {
        model,
        found: Vec::new(),
    };
    checker.names();
    checker.wires();
    checker.modifiers();

    let mut found = checker.found;
    // stable: keeps discovery order for equal (element, code)
    found.sort_by_key(|f| (f.0, f.1));
    found
        .into_iter()
        .map(|(element, code, message)| Diagnostic {
            code,
            severity: Severity::Error,
            message,
            location: element.describe(model),
            span: spans.and_then(|s| s.get(&element)),
            element,
        })
        .collect()
}

pub fn is_valid(model: &SystemModel) -> bool {
    validate(model).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::example_model;
    use crate::metamodel::{Modifier, Wire};

    fn codes(model: &SystemModel) -> Vec<Code> {
        validate(model).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn example_is_valid() {
        assert_eq!(validate(&example_model()), vec![]);
    }

    #[test]
    fn lower_layer_suppressor_is_v4() {
        let mut m = example_model();
        // turn moves up to layer 1, its suppressor stays controlled from layer 0
        m.modules
            .iter_mut()
            .find(|x| x.name == "avoid")
            .unwrap()
            .layer = 0;
        m.modules
            .iter_mut()
            .find(|x| x.name == "turn")
            .unwrap()
            .layer = 1;
        assert_eq!(codes(&m), vec![Code::V4]);
        let d = &validate(&m)[0];
        assert!(d.message.contains("turn.heading") && d.message.contains("avoid.heading"));
    }

    #[test]
    fn second_wire_into_turn_is_v3() {
        let mut m = example_model();
        m.wires.push(Wire {
            source: QualifiedName::new("wander", "heading"),
            sink: QualifiedName::new("turn", "heading"),
        });
        assert_eq!(codes(&m), vec![Code::V3]);
    }

    #[test]
    fn zero_time_is_v7() {
        let mut m = example_model();
        m.modifiers[0].time_ms = 0;
        assert_eq!(codes(&m), vec![Code::V7]);
        m.modifiers[0].time_ms = -3;
        assert_eq!(codes(&m), vec![Code::V7]);
    }

    #[test]
    fn dangling_endpoint_suppresses_dependent_checks() {
        let mut m = example_model();
        m.modifiers[0].controlled_by = QualifiedName::new("avoid", "nope");
        assert_eq!(codes(&m), vec![Code::V1]);
    }

    #[test]
    fn wire_with_reversed_direction_is_v1() {
        let mut m = example_model();
        m.wires.push(Wire {
            source: QualifiedName::new("turn", "heading"),
            sink: QualifiedName::new("runaway", "heading"),
        });
        assert_eq!(codes(&m), vec![Code::V1, Code::V1]);
    }

    #[test]
    fn inhibitor_on_input_is_v9() {
        let mut m = example_model();
        m.modifiers.push(Modifier {
            kind: ModifierKind::Inhibitor,
            target: QualifiedName::new("forward", "go"),
            controlled_by: QualifiedName::new("avoid", "heading"),
            time_ms: 10,
        });
        assert_eq!(codes(&m), vec![Code::V9]);
    }

    #[test]
    fn stacked_modifiers_are_v8() {
        let mut m = example_model();
        let again = m.modifiers[0].clone();
        m.modifiers.push(again);
        assert_eq!(codes(&m), vec![Code::V8]);
    }

    #[test]
    fn relabeling_layers_keeps_outcome() {
        let mut m = example_model();
        m.modules
            .iter_mut()
            .find(|x| x.name == "avoid")
            .unwrap()
            .layer = 0;
        m.modules
            .iter_mut()
            .find(|x| x.name == "turn")
            .unwrap()
            .layer = 1;
        let before = codes(&m);
        for x in &mut m.modules {
            x.layer += 7;
        }
        assert_eq!(codes(&m), before);
    }

    #[test]
    fn diagnostics_render_with_location() {
        let text = crate::example::EXAMPLE_SOURCE.replace("for 250 ms", "for 0 ms");
        let (m, spans) = crate::dsl::parse_with_spans(&text).unwrap();
        let diags = validate_with_spans(&m, Some(&spans));
        assert_eq!(diags.len(), 1);
        assert_eq!(
            diags[0].render("example.sub"),
            "example.sub:50:3: error[V7]: suppressor on `turn.heading` has time 0 ms; it must be positive"
        );
        assert_eq!(diags[0].location, "suppressor on turn.heading");
    }
}
