//! Rust templates, in four groups: module interface, typed line access,
//! main program and stubs (behavior and test bodies, data types).

use super::regions::{seal, Comment};
use super::{FileSet, GenOptions, Names};
use crate::metamodel::{LineDecl, ModifierKind, ModuleDecl, SystemModel};

/// Accumulates source lines.
struct Src(String);

impl Src {
    fn new() -> Self {
        Src(String::new())
    }

    fn line(&mut self, text: impl AsRef<str>) -> &mut Self {
        self.0.push_str(text.as_ref());
        self.0.push('\n');
        self
    }

    fn blank(&mut self) -> &mut Self {
        self.0.push('\n');
        self
    }

    /// `// USER CODE BEGIN id` / default body / `// USER CODE END id`.
    fn region(&mut self, indent: &str, comment: Comment, id: &str, body: &[&str]) -> &mut Self {
        self.line(format!("{indent}{}", comment.line(&format!("USER CODE BEGIN {id}"))));
        for l in body {
            self.line(format!("{indent}{l}"));
        }
        self.line(format!("{indent}{}", comment.line(&format!("USER CODE END {id}"))))
    }

    fn doc(&mut self, indent: &str, marker: &str, text: &str) -> &mut Self {
        for l in text.lines() {
            if l.is_empty() {
                self.line(format!("{indent}{marker}"));
            } else {
                self.line(format!("{indent}{marker} {l}"));
            }
        }
        self
    }
}

fn lit(s: &str) -> String {
    format!("{s:?}")
}

fn const_name(line: &str) -> String {
    super::sanitize_ident(line).trim_end_matches('_').to_ascii_uppercase()
}

fn fn_suffix(line: &str) -> String {
    super::sanitize_ident(line).trim_end_matches('_').to_owned()
}

pub(super) fn project(model: &SystemModel, names: &Names, opts: &GenOptions) -> FileSet {
    let mut files = FileSet::new();
    files.insert("Cargo.toml", manifest(names, opts));
    files.insert("src/main.rs", main_unit(model, names, opts));
    files.insert("src/types.rs", types_unit(model, names));
    for m in &model.modules {
        let ident = &names.modules[&m.name];
        files.insert(format!("src/modules/{ident}.rs"), module_unit(model, m, names));
        if opts.emit_tests {
            files.insert(format!("src/tests/{ident}.rs"), test_unit(m, names));
        }
    }
    files
}

fn manifest(names: &Names, opts: &GenOptions) -> String {
    let mut s = Src::new();
    s.line("[package]")
        .line(format!("name = {}", lit(&names.project)))
        .line("version = \"0.1.0\"")
        .line("edition = \"2021\"")
        .line("publish = false")
        .blank()
        .line("[dependencies]")
        .line(format!("subsume = {{ path = {} }}", lit(&opts.runtime_path)))
        .region("", Comment::HASH, "manifest.dependencies", &[])
        .blank()
        .line("# standalone project, not part of an enclosing workspace")
        .line("[workspace]");
    seal(&s.0, Comment::HASH)
}

fn main_unit(model: &SystemModel, names: &Names, opts: &GenOptions) -> String {
    let c = Comment::SLASH;
    let mut s = Src::new();
    s.line(format!("//! Controller `{}`.", model.name));
    if let Some(d) = &model.description {
        s.line("//!").doc("", "//!", d);
    }
    s.line("//!")
        .line("//! Usage: `[--ticks N] [--seed S] [--layers 0,1] [--trace] [--dump-model]`")
        .blank()
        .line("mod types;")
        .blank()
        .line("mod modules {");
    for m in &model.modules {
        s.line(format!("    pub mod {};", names.modules[&m.name]));
    }
    s.line("}").blank();
    if opts.emit_tests && !model.modules.is_empty() {
        s.line("#[cfg(test)]").line("mod tests {");
        for m in &model.modules {
            s.line(format!("    mod {};", names.modules[&m.name]));
        }
        s.line("}").blank();
    }
    s.line("use subsume::runtime::{trace_to_csv, Behaviors, Runtime, RuntimeConfig};")
        .line("#[allow(unused_imports)]")
        .line("use subsume::{SystemBuilder, SystemModel};")
        .region("", c, "main.imports", &[])
        .blank()
        .line("/// The model this skeleton was generated from.")
        .line("pub fn build_model() -> SystemModel {")
        .line(format!("    SystemBuilder::new({})", lit(&model.name)));
    if let Some(d) = &model.description {
        s.line(format!("        .description({})", lit(d)));
    }
    for t in &model.data_types {
        let d = t.description.as_deref().map_or("None".to_owned(), |d| format!("Some({})", lit(d)));
        s.line(format!("        .data_type({}, {d})", lit(&t.name)));
    }
    for m in &model.modules {
        s.line(format!("        .module({}, {}, |m| {{", lit(&m.name), m.layer))
            .line("            m");
        if let Some(d) = &m.description {
            s.line(format!("                .description({})", lit(d)));
        }
        let line = |s: &mut Src, kind: &str, l: &LineDecl| {
            let d = l.description.as_deref().map_or("None".to_owned(), |d| format!("Some({})", lit(d)));
            s.line(format!(
                "                .{kind}_with({}, {}, {d})",
                lit(&l.name),
                lit(&l.data_type)
            ));
        };
        for l in &m.inputs {
            line(&mut s, "input", l);
        }
        for l in &m.outputs {
            line(&mut s, "output", l);
        }
        s.line("        })");
    }
    for w in &model.wires {
        s.line(format!(
            "        .wire({}, {})",
            lit(&w.source.to_string()),
            lit(&w.sink.to_string())
        ));
    }
    for m in &model.modifiers {
        let f = match m.kind {
            ModifierKind::Suppressor => "suppress",
            ModifierKind::Inhibitor => "inhibit",
        };
        s.line(format!(
            "        .{f}({}, {}, {})",
            lit(&m.target.to_string()),
            lit(&m.controlled_by.to_string()),
            m.time_ms
        ));
    }
    s.line("        .build()").line("}").blank();

    s.line("/// One behavior per module.")
        .line("pub fn behaviors() -> Behaviors {");
    if model.modules.is_empty() {
        s.line("    Behaviors::new()");
    } else {
        s.line("    let mut b = Behaviors::new();");
        for m in &model.modules {
            let id = &names.modules[&m.name];
            s.line(format!(
                "    b.insert(modules::{id}::NAME.to_owned(), modules::{id}::behavior());"
            ));
        }
        s.line("    b");
    }
    s.line("}").blank();

    s.line("struct Args {")
        .line("    ticks: u64,")
        .line("    seed: u64,")
        .line("    layers: Option<Vec<u32>>,")
        .line("    trace: bool,")
        .line("    dump_model: bool,")
        .line("}")
        .blank()
        .line("fn parse_args() -> Result<Args, String> {")
        .line("    let mut args = Args {")
        .line("        ticks: 100,")
        .line("        seed: 0,")
        .line("        layers: None,")
        .line("        trace: false,")
        .line("        dump_model: false,")
        .line("    };")
        .line("    let mut it = std::env::args().skip(1);")
        .line("    while let Some(a) = it.next() {")
        .line("        let mut value = |name: &str| it.next().ok_or(format!(\"{name} needs a value\"));")
        .line("        match a.as_str() {")
        .line("            \"--ticks\" => args.ticks = value(\"--ticks\")?.parse().map_err(|e| format!(\"--ticks: {e}\"))?,")
        .line("            \"--seed\" => args.seed = value(\"--seed\")?.parse().map_err(|e| format!(\"--seed: {e}\"))?,")
        .line("            \"--layers\" => {")
        .line("                let list = value(\"--layers\")?;")
        .line("                let layers: Result<Vec<u32>, _> = list.split(',').map(str::parse).collect();")
        .line("                args.layers = Some(layers.map_err(|e| format!(\"--layers: {e}\"))?);")
        .line("            }")
        .line("            \"--trace\" => args.trace = true,")
        .line("            \"--dump-model\" => args.dump_model = true,")
        .line("            other => return Err(format!(\"unknown argument `{other}`\")),")
        .line("        }")
        .line("    }")
        .line("    Ok(args)")
        .line("}")
        .blank()
        .line("fn main() {")
        .line("    let args = parse_args().unwrap_or_else(|e| {")
        .line("        eprintln!(\"error: {e}\");")
        .line("        std::process::exit(2);")
        .line("    });")
        .line("    let model = build_model();")
        .line("    if args.dump_model {")
        .line("        println!(\"{}\", model.to_json());")
        .line("        return;")
        .line("    }")
        .line("    #[allow(unused_mut)]")
        .line("    let mut config = RuntimeConfig::default()")
        .line("        .with_seed(args.seed)")
        .line("        .with_max_ticks(args.ticks);")
        .line("    if let Some(layers) = args.layers {")
        .line("        config = config.with_layers(layers);")
        .line("    }")
        .region("    ", c, "main.setup", &[])
        .line("    let mut runtime = Runtime::instantiate(model, behaviors(), config).unwrap_or_else(|e| {")
        .line("        eprintln!(\"error: {e}\");")
        .line("        std::process::exit(1);")
        .line("    });")
        .line("    if let Err(e) = runtime.run() {")
        .line("        eprintln!(\"error: {e}\");")
        .line("        std::process::exit(1);")
        .line("    }")
        .line("    if args.trace {")
        .line("        print!(\"{}\", trace_to_csv(runtime.trace()));")
        .line("    } else {")
        .line("        println!(\"{} events in {} ms\", runtime.trace().len(), runtime.now());")
        .line("    }")
        .line("}");
    seal(&s.0, Comment::SLASH)
}

fn types_unit(model: &SystemModel, names: &Names) -> String {
    let c = Comment::SLASH;
    let mut s = Src::new();
    s.line("//! Payload types of the model's lines.")
        .line("//!")
        .line("//! Each placeholder is an alias of the runtime's `Value`. A replacement")
        .line("//! type must convert from and into `Value`, which is what the line")
        .line("//! helpers of the module units rely on.")
        .blank()
        .line("#![allow(dead_code, unused_imports)]")
        .blank()
        .line("use subsume::runtime::Value;")
        .region("", c, "types.imports", &[]);
    for t in &model.data_types {
        let ident = &names.types[&t.name];
        s.blank();
        match &t.description {
            Some(d) => s.doc("", "///", d),
            None => s.line(format!("/// Model type `{}`.", t.name)),
        };
        s.region("", c, &format!("types.{}", t.name), &[&format!("pub type {ident} = Value;")]);
    }
    seal(&s.0, Comment::SLASH)
}

fn module_unit(model: &SystemModel, m: &ModuleDecl, names: &Names) -> String {
    let c = Comment::SLASH;
    let ty = super::type_ident(&m.name);
    let mut s = Src::new();
    s.line(format!("//! Module `{}`, layer {}.", m.name, m.layer)).line("//!");
    s.doc("", "//!", m.description.as_deref().unwrap_or("(no description)"));
    s.blank()
        .line("#![allow(dead_code)]")
        .blank()
        .line("#[allow(unused_imports)]")
        .line("use subsume::runtime::{Behavior, StepContext, Value};")
        .blank()
        .line("#[allow(unused_imports)]")
        .line("use crate::types;")
        .region("", c, &format!("{}.imports", m.name), &[])
        .blank()
        .line(format!("pub const NAME: &str = {};", lit(&m.name)))
        .line(format!("pub const LAYER: u32 = {};", m.layer));
    match &m.description {
        Some(d) => s.line(format!("pub const DESCRIPTION: &str = {};", lit(d))),
        None => s.line("pub const DESCRIPTION: &str = \"\";"),
    };

    // interface: line names and declared types
    for (group, lines) in [("inputs", &m.inputs), ("outputs", &m.outputs)] {
        s.blank()
            .line(format!("/// Names and data types of the {group}."))
            .line(format!("pub mod {group} {{"));
        for l in lines.iter() {
            let k = const_name(&l.name);
            s.doc("    ", "///", &format!("`{}`: {}", l.name, l.description.as_deref().unwrap_or(&l.data_type)))
                .line(format!("    pub const {k}: &str = {};", lit(&l.name)));
        }
        s.blank().line("    pub mod data_types {");
        for l in lines.iter() {
            s.line(format!("        pub const {}: &str = {};", const_name(&l.name), lit(&l.data_type)));
        }
        s.line("    }");
        s.line("}");
    }

    // typed access to the input buffers and outputs
    for l in &m.inputs {
        let t = format!("types::{}", names.types[&l.data_type]);
        let k = const_name(&l.name);
        let f = fn_suffix(&l.name);
        s.blank()
            .line(format!("/// New value on `{}` since the last read, if any. Acknowledges it.", l.name))
            .line(format!("pub fn take_{f}(ctx: &mut StepContext<'_>) -> Option<{t}> {{"))
            .line(format!("    ctx.take_fresh(inputs::{k}).map({t}::from)"))
            .line("}")
            .blank()
            .line(format!("/// Latest value on `{}`, fresh or not. Acknowledges it.", l.name))
            .line(format!("pub fn latest_{f}(ctx: &mut StepContext<'_>) -> Option<{t}> {{"))
            .line(format!("    ctx.read(inputs::{k}).map(|r| {t}::from(r.payload.clone()))"))
            .line("}")
            .blank()
            .line(format!("/// True if `{}` holds an unread value.", l.name))
            .line(format!("pub fn has_fresh_{f}(ctx: &StepContext<'_>) -> bool {{"))
            .line(format!("    ctx.is_fresh(inputs::{k})"))
            .line("}");
    }
    for l in &m.outputs {
        let t = format!("types::{}", names.types[&l.data_type]);
        let k = const_name(&l.name);
        let f = fn_suffix(&l.name);
        let consumers: Vec<String> = model
            .wires
            .iter()
            .filter(|w| w.source.module == m.name && w.source.line == l.name)
            .map(|w| format!("`{}`", w.sink))
            .collect();
        s.blank()
            .line(format!("/// Sends on `{}`.", l.name));
        if !consumers.is_empty() {
            s.line(format!("/// Wired to {}.", consumers.join(", ")));
        }
        s.line(format!("pub fn emit_{f}(ctx: &mut StepContext<'_>, payload: {t}) {{"))
            .line("    let value: Value = payload.into();")
            .line(format!("    ctx.emit(outputs::{k}, value);"))
            .line("}");
    }

    // behavior stub
    s.blank()
        .line(format!("/// Behavior of `{}`. State fields must implement `Default`.", m.name))
        .line("#[derive(Default)]")
        .line(format!("pub struct {ty} {{"))
        .region("    ", c, &format!("{}.state", m.name), &[])
        .line("}")
        .blank()
        .line(format!("impl Behavior for {ty} {{"))
        .line("    #[allow(unused_variables)]")
        .line("    fn step(&mut self, ctx: &mut StepContext<'_>) {")
        .region("        ", c, &format!("{}.step", m.name), &[])
        .line("    }")
        .line("}")
        .blank()
        .line("pub fn behavior() -> Box<dyn Behavior> {")
        .line(format!("    Box::new({ty}::default())"))
        .line("}");
    seal(&s.0, Comment::SLASH)
}

fn test_unit(m: &ModuleDecl, names: &Names) -> String {
    let c = Comment::SLASH;
    let id = &names.modules[&m.name];
    let mut s = Src::new();
    s.line(format!("//! Test stub for module `{}`: the module runs alone, other modules idle.", m.name))
        .blank()
        .line("#[allow(unused_imports)]")
        .line("use subsume::runtime::{idle_behaviors, Runtime, RuntimeConfig, Value};")
        .blank()
        .line(format!("use crate::modules::{id};"))
        .region("", c, &format!("{}.test_imports", m.name), &[])
        .blank()
        .line("#[test]")
        .line(format!("fn {id}_steps_without_error() {{"))
        .line("    let model = crate::build_model();")
        .line("    let mut behaviors = idle_behaviors(&model);")
        .line(format!("    behaviors.insert({id}::NAME.to_owned(), {id}::behavior());"))
        .line("    let mut runtime = Runtime::instantiate(model, behaviors, RuntimeConfig::default())")
        .line("        .expect(\"generated model is valid\");");
    for l in &m.outputs {
        s.line(format!(
            "    let {}_probe = runtime.probe({}).expect(\"declared output\");",
            fn_suffix(&l.name),
            lit(&format!("{}.{}", m.name, l.name))
        ));
    }
    let mut body = Vec::new();
    for l in &m.inputs {
        body.push(format!(
            "// runtime.inject({}, {}, Value::Unit).unwrap();",
            lit(&format!("{}.{}", m.name, l.name)),
            lit(&l.data_type)
        ));
    }
    let body: Vec<&str> = body.iter().map(String::as_str).collect();
    s.region("    ", c, &format!("{}.test", m.name), &body)
        .line("    runtime.run_until(10).expect(\"behavior does not panic\");");
    for l in &m.outputs {
        s.line(format!("    let _ = runtime.probed({}_probe);", fn_suffix(&l.name)));
    }
    s.line("}");
    seal(&s.0, Comment::SLASH)
}
