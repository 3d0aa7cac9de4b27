use super::regions::{seal, Comment};
use super::{FileSet, Names};
use crate::metamodel::{ModifierKind, ModuleDecl, SystemModel};

const NONE: &str = "(no description)";

fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace('\n', " ")
}

pub(super) fn pages(model: &SystemModel, names: &Names) -> FileSet {
    let mut files = FileSet::new();
    files.insert("docs/index.md", index(model, names));
    for m in &model.modules {
        files.insert(format!("docs/{}.md", names.modules[&m.name]), page(model, m));
    }
    files
}

fn index(model: &SystemModel, names: &Names) -> String {
    let mut s = format!("# System `{}`\n\n", model.name);
    s += &format!("{}\n\n", model.description.as_deref().unwrap_or(NONE));

    s += "## Layers\n\n";
    let layers = model.layers();
    if layers.is_empty() {
        s += "The system has no modules.\n\n";
    }
    for layer in &layers {
        s += &format!("### Layer {layer}\n\n");
        for m in model.modules.iter().filter(|m| m.layer == *layer) {
            s += &format!(
                "- [`{}`]({}.md): {}\n",
                m.name,
                names.modules[&m.name],
                cell(m.description.as_deref().unwrap_or(NONE))
            );
        }
        s += "\n";
    }

    s += "## Data types\n\n";
    if model.data_types.is_empty() {
        s += "None.\n\n";
    } else {
        s += "| Type | Rust name | Description |\n|---|---|---|\n";
        for t in &model.data_types {
            s += &format!(
                "| `{}` | `{}` | {} |\n",
                t.name,
                names.types[&t.name],
                cell(t.description.as_deref().unwrap_or(NONE))
            );
        }
        s += "\n";
    }

    s += "## Modifiers\n\n";
    if model.modifiers.is_empty() {
        s += "None.\n\n";
    } else {
        s += "| Kind | Target | Controlled by | Window |\n|---|---|---|---|\n";
        for m in &model.modifiers {
            s += &format!(
                "| {} ({}) | `{}` | `{}` | {} ms |\n",
                m.kind,
                m.kind.symbol(),
                m.target,
                m.controlled_by,
                m.time_ms
            );
        }
        s += "\n";
    }

    s += "## Identifier mangling\n\n";
    s += "Module and line names become lowercase `_`-separated Rust identifiers: a \
           lowercase-to-uppercase change starts a new word, other characters become `_`, \
           repeated `_` collapse and leading or trailing `_` are dropped. Rust keywords and \
           `main`, `test`, `tests` get a trailing `_`. Data types use the UpperCamel form of \
           the same words. Names that collide after mangling are rejected.\n";
    seal(&s, Comment::HTML)
}

fn page(model: &SystemModel, m: &ModuleDecl) -> String {
    let mut s = format!("# Module `{}`\n\n", m.name);
    s += &format!("- Layer: {}\n", m.layer);
    s += &format!("- Description: {}\n\n", cell(m.description.as_deref().unwrap_or(NONE)));

    s += "## Lines\n\n";
    if m.inputs.is_empty() && m.outputs.is_empty() {
        s += "None.\n\n";
    } else {
        s += "| Direction | Name | Type | Description |\n|---|---|---|---|\n";
        for (dir, lines) in [("in", &m.inputs), ("out", &m.outputs)] {
            for l in lines.iter() {
                s += &format!(
                    "| {dir} | `{}` | `{}` | {} |\n",
                    l.name,
                    l.data_type,
                    cell(l.description.as_deref().unwrap_or(NONE))
                );
            }
        }
        s += "\n";
    }

    s += "## Wiring\n\n";
    let mut rows = Vec::new();
    for w in &model.wires {
        if w.sink.module == m.name {
            rows.push(format!("| `{}` | `{}` | wire |", w.source, w.sink));
        }
        if w.source.module == m.name {
            rows.push(format!("| `{}` | `{}` | wire |", w.source, w.sink));
        }
    }
    for x in &model.modifiers {
        if x.target.module == m.name || x.controlled_by.module == m.name {
            let what = match x.kind {
                ModifierKind::Suppressor => "suppresses",
                ModifierKind::Inhibitor => "inhibits",
            };
            rows.push(format!(
                "| `{}` | `{}` | {what} for {} ms |",
                x.controlled_by, x.target, x.time_ms
            ));
        }
    }
    rows.dedup();
    if rows.is_empty() {
        s += "Not connected.\n";
    } else {
        s += "| From | To | Kind |\n|---|---|---|\n";
        for r in rows {
            s += &r;
            s += "\n";
        }
    }
    seal(&s, Comment::HTML)
}
