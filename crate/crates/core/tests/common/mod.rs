//! Random model generation shared by the integration tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use subsume::metamodel::{
    DataTypeDecl, LineDecl, Modifier, ModifierKind, ModuleDecl, QualifiedName, SystemModel, Wire,
    KEYWORDS,
};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Faults {
    /// Probability of each fault opportunity being taken.
    pub rate: f64,
    /// Only faults the textual syntax can express: names stay identifiers
    /// and times stay non-negative.
    pub representable: bool,
}

impl Faults {
    pub const NONE: Faults = Faults {
        rate: 0.0,
        representable: true,
    };

    pub fn some(rate: f64) -> Faults {
        Faults {
            rate,
            representable: false,
        }
    }

    pub fn textual(rate: f64) -> Faults {
        Faults {
            rate,
            representable: true,
        }
    }
}

fn ident(rng: &mut ChaCha8Rng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
    loop {
        let len = rng.random_range(1..8);
        let mut s = String::new();
        s.push(*FIRST.choose(rng).unwrap() as char);
        for _ in 1..len {
            s.push(*REST.choose(rng).unwrap() as char);
        }
        if !KEYWORDS.contains(&s.as_str()) {
            return s;
        }
    }
}

fn fresh_ident(rng: &mut ChaCha8Rng, taken: &[String]) -> String {
    loop {
        let s = ident(rng);
        if !taken.contains(&s) {
            return s;
        }
    }
}

fn text(rng: &mut ChaCha8Rng) -> Option<String> {
    const CHARS: &[char] = &[
        'a', 'b', 'z', ' ', ' ', '"', '\\', '\n', '#', '{', '}', ';', '-', '>', 'é', '→', '.', '1',
    ];
    rng.random_bool(0.5).then(|| {
        let len = rng.random_range(0..20);
        (0..len).map(|_| *CHARS.choose(rng).unwrap()).collect()
    })
}

fn bad_name(rng: &mut ChaCha8Rng) -> String {
    ["1x", "in", "a-b", "", "ms", "x y", "module"]
        .choose(rng)
        .unwrap()
        .to_string()
}

/// A random model. With `Faults::NONE` the result is valid.
pub fn random_model(rng: &mut ChaCha8Rng, faults: Faults) -> SystemModel {
    let fault = |rng: &mut ChaCha8Rng| faults.rate > 0.0 && rng.random_bool(faults.rate);

    let mut model = SystemModel::new(ident(rng));
    model.description = text(rng);

    let type_count = rng.random_range(1..5);
    let mut type_names: Vec<String> = Vec::new();
    for _ in 0..type_count {
        let name = if fault(rng) && !type_names.is_empty() {
            type_names.choose(rng).unwrap().clone()
        } else if fault(rng) && !faults.representable {
            bad_name(rng)
        } else {
            fresh_ident(rng, &type_names)
        };
        type_names.push(name.clone());
        model.data_types.push(DataTypeDecl {
            name,
            description: text(rng),
        });
    }

    let module_count = rng.random_range(0..7);
    let mut module_names: Vec<String> = Vec::new();
    for _ in 0..module_count {
        let name = if fault(rng) && !module_names.is_empty() {
            module_names.choose(rng).unwrap().clone()
        } else if fault(rng) && !faults.representable {
            bad_name(rng)
        } else {
            fresh_ident(rng, &module_names)
        };
        module_names.push(name.clone());
        let mut m = ModuleDecl::new(name, rng.random_range(0..4));
        m.description = text(rng);
        let mut line_names: Vec<String> = Vec::new();
        for direction in 0..2 {
            for _ in 0..rng.random_range(0..4) {
                let lname = if fault(rng) && !line_names.is_empty() {
                    line_names.choose(rng).unwrap().clone()
                } else if fault(rng) && !faults.representable {
                    bad_name(rng)
                } else {
                    fresh_ident(rng, &line_names)
                };
                line_names.push(lname.clone());
                let data_type = if fault(rng) {
                    fresh_ident(rng, &type_names)
                } else {
                    type_names.choose(rng).unwrap().clone()
                };
                let line = LineDecl {
                    name: lname,
                    description: text(rng),
                    data_type,
                };
                if direction == 0 {
                    m.inputs.push(line);
                } else {
                    m.outputs.push(line);
                }
            }
        }
        model.modules.push(m);
    }

    // all (module index, line, type) per direction, by first-match names
    let lines = |model: &SystemModel, input: bool| -> Vec<(usize, QualifiedName, String, u32)> {
        let mut out = Vec::new();
        for (i, m) in model.modules.iter().enumerate() {
            for l in if input { &m.inputs } else { &m.outputs } {
                out.push((i, QualifiedName::new(m.name.clone(), l.name.clone()), l.data_type.clone(), m.layer));
            }
        }
        out
    };
    let inputs = lines(&model, true);
    let outputs = lines(&model, false);
    let dangling = |rng: &mut ChaCha8Rng| QualifiedName::new(ident(rng), ident(rng));

    // wires
    let mut wired: Vec<QualifiedName> = Vec::new();
    for _ in 0..rng.random_range(0..8) {
        if outputs.is_empty() || inputs.is_empty() {
            break;
        }
        let (_, src, st, _) = outputs.choose(rng).unwrap().clone();
        let candidates: Vec<_> = inputs
            .iter()
            .filter(|(_, q, t, _)| *t == st && !wired.contains(q))
            .collect();
        let sink = if fault(rng) {
            match rng.random_range(0..4) {
                0 => dangling(rng),
                1 => outputs.choose(rng).unwrap().1.clone(),
                2 if !wired.is_empty() => wired.choose(rng).unwrap().clone(),
                _ => inputs.choose(rng).unwrap().1.clone(),
            }
        } else if let Some(c) = candidates.choose(rng) {
            c.1.clone()
        } else {
            continue;
        };
        let source = if fault(rng) {
            if rng.random_bool(0.5) {
                dangling(rng)
            } else {
                inputs.choose(rng).unwrap().1.clone()
            }
        } else {
            src
        };
        wired.push(sink.clone());
        model.wires.push(Wire { source, sink });
    }

    // modifiers
    let mut targeted: Vec<QualifiedName> = Vec::new();
    for _ in 0..rng.random_range(0..4) {
        if outputs.is_empty() {
            break;
        }
        let suppress = rng.random_bool(0.5) && !inputs.is_empty();
        let kind = if suppress {
            ModifierKind::Suppressor
        } else {
            ModifierKind::Inhibitor
        };
        let pool = if suppress { &inputs } else { &outputs };
        let (_, target, tt, tl) = pool.choose(rng).unwrap().clone();
        let controls: Vec<_> = outputs
            .iter()
            .filter(|(_, q, t, l)| *l >= tl && (!suppress || *t == tt) && *q != target)
            .collect();
        let Some(control) = controls.choose(rng).map(|c| c.1.clone()) else {
            continue;
        };
        if targeted.contains(&target) && !fault(rng) {
            continue;
        }
        let target = if fault(rng) {
            match rng.random_range(0..3) {
                0 => dangling(rng),
                // the other direction
                1 => if suppress { outputs.choose(rng).unwrap().1.clone() } else if !inputs.is_empty() { inputs.choose(rng).unwrap().1.clone() } else { target },
                _ => target,
            }
        } else {
            target
        };
        let controlled_by = if fault(rng) {
            match rng.random_range(0..3) {
                0 => dangling(rng),
                1 if !inputs.is_empty() => inputs.choose(rng).unwrap().1.clone(),
                // any output, possibly of a lower layer or another type
                _ => outputs.choose(rng).unwrap().1.clone(),
            }
        } else {
            control
        };
        let time_ms = if fault(rng) {
            if faults.representable {
                0
            } else {
                rng.random_range(-100..=0)
            }
        } else {
            rng.random_range(1..=1000)
        };
        targeted.push(target.clone());
        model.modifiers.push(Modifier {
            kind,
            target,
            controlled_by,
            time_ms,
        });
    }
    model
}

/// Independent reimplementation of the validation rules by exhaustive
/// scanning. Returns the set of (rule, element) verdicts.
pub mod oracle {
    use std::collections::HashSet;

    use subsume::metamodel::{
        Direction, ElementPath, LineRef, ModifierKind, QualifiedName, SystemModel,
    };
    use subsume::validate::Code;

    const RESERVED: [&str; 12] = [
        "system", "type", "module", "layer", "in", "out", "wire", "suppress", "inhibit", "by",
        "for", "ms",
    ];

    fn ident_ok(s: &str) -> bool {
        let b = s.as_bytes();
        !b.is_empty()
            && (b[0] == b'_' || b[0].is_ascii_alphabetic())
            && b.iter().all(|c| *c == b'_' || c.is_ascii_alphanumeric())
            && !RESERVED.contains(&s)
    }

    /// (module index, direction, index) of the named line: first module of
    /// that name, inputs before outputs.
    fn find(model: &SystemModel, q: &QualifiedName) -> Option<LineRef> {
        for (mi, m) in model.modules.iter().enumerate() {
            if m.name != q.module {
                continue;
            }
            for (j, l) in m.inputs.iter().enumerate() {
                if l.name == q.line {
                    return Some(LineRef { module: mi, direction: Direction::Input, index: j });
                }
            }
            for (j, l) in m.outputs.iter().enumerate() {
                if l.name == q.line {
                    return Some(LineRef { module: mi, direction: Direction::Output, index: j });
                }
            }
            return None;
        }
        None
    }

    fn type_of(model: &SystemModel, r: LineRef) -> &str {
        let m = &model.modules[r.module];
        match r.direction {
            Direction::Input => &m.inputs[r.index].data_type,
            Direction::Output => &m.outputs[r.index].data_type,
        }
    }

    pub fn verdicts(model: &SystemModel) -> HashSet<(Code, ElementPath)> {
        let mut out = HashSet::new();
        if !ident_ok(&model.name) {
            out.insert((Code::V2, ElementPath::System));
        }
        for (i, t) in model.data_types.iter().enumerate() {
            let dup = model.data_types[..i].iter().any(|u| u.name == t.name);
            if !ident_ok(&t.name) || dup {
                out.insert((Code::V2, ElementPath::DataType(i)));
            }
        }
        for (i, m) in model.modules.iter().enumerate() {
            let dup = model.modules[..i].iter().any(|n| n.name == m.name);
            if !ident_ok(&m.name) || dup {
                out.insert((Code::V2, ElementPath::Module(i)));
            }
            let mut all: Vec<(LineRef, &str, &str)> = Vec::new();
            for (j, l) in m.inputs.iter().enumerate() {
                all.push((LineRef { module: i, direction: Direction::Input, index: j }, &l.name, &l.data_type));
            }
            for (j, l) in m.outputs.iter().enumerate() {
                all.push((LineRef { module: i, direction: Direction::Output, index: j }, &l.name, &l.data_type));
            }
            for k in 0..all.len() {
                let (r, name, ty) = all[k];
                if !ident_ok(name) || all[..k].iter().any(|o| o.1 == name) {
                    out.insert((Code::V2, ElementPath::Line(r)));
                }
                if !model.data_types.iter().any(|t| t.name == ty) {
                    out.insert((Code::V1, ElementPath::Line(r)));
                }
            }
        }

        for (i, w) in model.wires.iter().enumerate() {
            let at = ElementPath::Wire(i);
            let src = find(model, &w.source).filter(|r| r.direction == Direction::Output);
            let snk = find(model, &w.sink).filter(|r| r.direction == Direction::Input);
            if src.is_none() || snk.is_none() {
                out.insert((Code::V1, at));
            }
            if let Some(s) = snk {
                let earlier = model.wires[..i].iter().any(|v| {
                    find(model, &v.sink) == Some(s)
                });
                if earlier {
                    out.insert((Code::V3, at));
                }
                if let Some(o) = src {
                    if type_of(model, o) != type_of(model, s) {
                        out.insert((Code::V6, at));
                    }
                }
            }
        }

        for (i, x) in model.modifiers.iter().enumerate() {
            let at = ElementPath::Modifier(i);
            if x.time_ms <= 0 {
                out.insert((Code::V7, at));
            }
            let ctl = find(model, &x.controlled_by).filter(|r| r.direction == Direction::Output);
            if ctl.is_none() {
                out.insert((Code::V1, at));
            }
            let Some(tgt) = find(model, &x.target) else {
                out.insert((Code::V1, at));
                continue;
            };
            if model.modifiers[..i].iter().any(|y| find(model, &y.target) == Some(tgt)) {
                out.insert((Code::V8, at));
            }
            let want = if x.kind == ModifierKind::Suppressor {
                Direction::Input
            } else {
                Direction::Output
            };
            if tgt.direction != want {
                out.insert((Code::V9, at));
                continue;
            }
            let Some(c) = ctl else { continue };
            // the interception rule: controller.layer >= owner.layer
            if !(model.modules[c.module].layer >= model.modules[tgt.module].layer) {
                let code = if want == Direction::Input { Code::V4 } else { Code::V5 };
                out.insert((code, at));
            }
            if want == Direction::Input && type_of(model, c) != type_of(model, tgt) {
                out.insert((Code::V6, at));
            }
        }
        out
    }
}

/// Validation fixture pairs as `(stem, rule, pass text, fail text)`. The
/// rule is the file name prefix, e.g. `v7_inhibit` checks V7.
pub fn validation_fixtures() -> Vec<(String, String, String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/validation");
    let mut stems: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.strip_suffix("_pass.sub").map(str::to_owned)
        })
        .collect();
    stems.sort();
    stems
        .into_iter()
        .map(|stem| {
            let read = |suffix: &str| std::fs::read_to_string(dir.join(format!("{stem}_{suffix}.sub"))).unwrap();
            let rule = stem.split('_').next().unwrap().to_uppercase();
            let (pass, fail) = (read("pass"), read("fail"));
            (stem, rule, pass, fail)
        })
        .collect()
}
