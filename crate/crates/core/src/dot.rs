//! Graphviz export in the usual subsumption notation: modules are boxes
//! grouped by layer, suppressors and inhibitors are circles marked `S` and
//! `I` sitting on the line they intercept.

use std::fmt::Write;

use crate::metamodel::{ModifierKind, QualifiedName, SystemModel};

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn modifier_node(i: usize) -> String {
    format!("\"modifier {i}\"")
}

/// DOT text for `model`. Output depends only on the model.
pub fn to_dot(model: &SystemModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(&model.name));
    if model.modules.is_empty() && model.modifiers.is_empty() {
        s.push_str("}\n");
        return s;
    }
    s.push_str("  rankdir=LR;\n  node [shape=box];\n");

    for layer in model.layers() {
        let _ = writeln!(s, "  subgraph \"cluster_layer_{layer}\" {{");
        let _ = writeln!(s, "    label={};", quote(&format!("layer {layer}")));
        for m in model.modules.iter().filter(|m| m.layer == layer) {
            let _ = writeln!(s, "    {} [shape=box];", quote(&m.name));
        }
        s.push_str("  }\n");
    }

    for (i, x) in model.modifiers.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {} [shape=circle, label={}, xlabel={}];",
            modifier_node(i),
            quote(&x.kind.symbol().to_string()),
            quote(&format!("{} ms", x.time_ms))
        );
    }

    let edge_label = |q: &QualifiedName| quote(&q.line);
    let suppressor_of = |sink: &QualifiedName| {
        model
            .modifiers
            .iter()
            .position(|x| x.kind == ModifierKind::Suppressor && x.target == *sink)
    };
    let inhibitor_of = |source: &QualifiedName| {
        model
            .modifiers
            .iter()
            .position(|x| x.kind == ModifierKind::Inhibitor && x.target == *source)
    };

    for w in &model.wires {
        // route through the interceptors on the way
        let mut from = quote(&w.source.module);
        let mut label = edge_label(&w.source);
        if let Some(i) = inhibitor_of(&w.source) {
            let _ = writeln!(s, "  {from} -> {} [label={label}];", modifier_node(i));
            from = modifier_node(i);
            label = quote("");
        }
        if let Some(i) = suppressor_of(&w.sink) {
            let _ = writeln!(s, "  {from} -> {} [label={label}];", modifier_node(i));
            from = modifier_node(i);
        }
        let _ = writeln!(
            s,
            "  {from} -> {} [headlabel={}];",
            quote(&w.sink.module),
            edge_label(&w.sink)
        );
    }

    for (i, x) in model.modifiers.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {} -> {} [style=dashed, label={}];",
            quote(&x.controlled_by.module),
            modifier_node(i),
            edge_label(&x.controlled_by)
        );
        // interceptors on unwired lines still point at their owner
        let wired = match x.kind {
            ModifierKind::Suppressor => model.wires.iter().any(|w| w.sink == x.target),
            ModifierKind::Inhibitor => model.wires.iter().any(|w| w.source == x.target),
        };
        if !wired {
            let _ = match x.kind {
                ModifierKind::Suppressor => writeln!(
                    s,
                    "  {} -> {} [headlabel={}];",
                    modifier_node(i),
                    quote(&x.target.module),
                    edge_label(&x.target)
                ),
                ModifierKind::Inhibitor => writeln!(
                    s,
                    "  {} -> {} [label={}];",
                    quote(&x.target.module),
                    modifier_node(i),
                    edge_label(&x.target)
                ),
            };
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::example_model;

    #[test]
    fn example_notation() {
        let dot = to_dot(&example_model());
        assert_eq!(dot.matches("\" [shape=box];").count(), 8);
        assert_eq!(dot.matches("shape=circle, label=\"S\"").count(), 1);
        assert!(dot.contains("xlabel=\"250 ms\""));
        assert_eq!(dot.matches("subgraph").count(), 2);
        // runaway's heading passes through the suppressor into turn
        assert!(dot.contains("\"runaway\" -> \"modifier 0\" [label=\"heading\"];"));
        assert!(dot.contains("\"modifier 0\" -> \"turn\" [headlabel=\"heading\"];"));
        assert!(dot.contains("\"avoid\" -> \"modifier 0\" [style=dashed, label=\"heading\"];"));
        assert_eq!(dot, to_dot(&example_model()));
    }

    #[test]
    fn empty_digraph() {
        assert_eq!(to_dot(&SystemModel::new("e")), "digraph \"e\" {\n}\n");
    }

    #[test]
    fn inhibitor_on_unwired_output() {
        let model = crate::SystemBuilder::new("s")
            .data_type("T", None)
            .module("a", 0, |m| m.output("o", "T"))
            .module("b", 1, |m| m.output("c", "T"))
            .inhibit("a.o", "b.c", 5)
            .build();
        let dot = to_dot(&model);
        assert!(dot.contains("label=\"I\""));
        assert!(dot.contains("\"a\" -> \"modifier 0\" [label=\"o\"];"));
    }
}
