mod common;

use std::collections::BTreeMap;

use common::{random_model, rng, Faults};
use proptest::prelude::*;
use subsume::codegen::*;
use subsume::example::example_model;
use subsume::metamodel::SystemModel;
use subsume::validate::validate;

fn paths(fs: &FileSet) -> Vec<&str> {
    fs.paths().collect()
}

#[test]
fn example_skeleton_layout() {
    let fs = generate(&example_model(), &GenOptions::default()).unwrap();
    let mut expected = vec!["Cargo.toml", "src/main.rs", "src/types.rs"];
    let modules = [
        "avoid", "collide", "feelforce", "forward", "runaway", "sonar", "turn", "wander",
    ];
    let units: Vec<String> = modules.iter().map(|m| format!("src/modules/{m}.rs")).collect();
    expected.extend(units.iter().map(String::as_str));
    expected.sort();
    assert_eq!(paths(&fs), expected);
}

#[test]
fn empty_system_has_scaffold_only() {
    let fs = generate(&SystemModel::new("empty"), &GenOptions::default()).unwrap();
    assert_eq!(paths(&fs), vec!["Cargo.toml", "src/main.rs", "src/types.rs"]);
    let types = fs.get("src/types.rs").unwrap();
    let regions = user_regions("src/types.rs", types).unwrap();
    assert_eq!(regions.keys().collect::<Vec<_>>(), vec!["types.imports"]);
}

#[test]
fn tests_and_docs_are_optional() {
    let opts = GenOptions {
        emit_docs: true,
        emit_tests: true,
        ..GenOptions::default()
    };
    let fs = generate(&example_model(), &opts).unwrap();
    assert_eq!(fs.paths().filter(|p| p.starts_with("src/tests/")).count(), 8);
    assert_eq!(fs.paths().filter(|p| p.starts_with("docs/")).count(), 9);
    assert!(fs.get("src/main.rs").unwrap().contains("mod tests {"));
}

#[test]
fn invalid_model_is_refused() {
    let mut model = example_model();
    model.modifiers[0].time_ms = 0;
    assert!(matches!(
        generate(&model, &GenOptions::default()),
        Err(CodegenError::InvalidModel(d)) if d.len() == 1
    ));
}

#[test]
fn markers_are_bit_exact() {
    let fs = generate(&example_model(), &GenOptions::default()).unwrap();
    let unit = fs.get("src/modules/turn.rs").unwrap();
    assert!(unit.contains("\n        // USER CODE BEGIN turn.step\n        // USER CODE END turn.step\n"));
    let manifest = fs.get("Cargo.toml").unwrap();
    assert!(manifest.contains("\n# USER CODE BEGIN manifest.dependencies\n# USER CODE END manifest.dependencies\n"));
    for (p, c) in fs.iter() {
        assert!(c.ends_with('\n'), "{p}");
        assert!(c.lines().next().unwrap().contains("@generated by subsume"), "{p}");
    }
}

#[test]
fn module_units_are_separate() {
    let model = example_model();
    let fs = generate(&model, &GenOptions::default()).unwrap();
    for m in &model.modules {
        let unit = fs.get(&format!("src/modules/{}.rs", m.name)).unwrap();
        assert!(!unit.contains("crate::modules"), "{} refers to a sibling", m.name);
        assert!(!unit.contains("super::"), "{}", m.name);
    }
}

#[test]
fn main_constructs_every_wire_and_modifier() {
    let model = example_model();
    let fs = generate(&model, &GenOptions::default()).unwrap();
    let main = fs.get("src/main.rs").unwrap();
    for w in &model.wires {
        assert!(main.contains(&format!(".wire(\"{}\", \"{}\")", w.source, w.sink)));
    }
    assert!(main.contains(".suppress(\"turn.heading\", \"avoid.heading\", 250)"));
    assert_eq!(main.matches(".module(").count(), 8);
    assert_eq!(main.matches("b.insert(").count(), 8);
}

#[test]
fn regenerate_keeps_filled_region() {
    let dir = tempfile::tempdir().unwrap();
    let opts = GenOptions::default();
    let model = example_model();
    generate(&model, &opts).unwrap().write_to(dir.path()).unwrap();

    let unit_path = dir.path().join("src/modules/wander.rs");
    let unit = std::fs::read_to_string(&unit_path).unwrap();
    let body = "        let h = ctx.rng().random_range(-3.1..3.1);\n        emit_heading(ctx, Value::Float(h));\n";
    let mut bodies = BTreeMap::new();
    bodies.insert("wander.step".to_owned(), body.to_owned());
    std::fs::write(&unit_path, fill_regions("src/modules/wander.rs", &unit, &bodies)).unwrap();

    // change the model so the scaffold differs
    let mut changed = model.clone();
    changed.modules[6].description = Some("Picks a heading every few seconds".into());
    let fresh = generate(&changed, &opts).unwrap();
    let existing = FileSet::read_existing(dir.path(), fresh.paths()).unwrap();
    let merged = regenerate(&changed, &opts, &existing).unwrap();
    merged.write_to(dir.path()).unwrap();

    let after = std::fs::read_to_string(&unit_path).unwrap();
    assert_eq!(user_regions("x.rs", &after).unwrap()["wander.step"], body);
    assert!(after.contains("Picks a heading every few seconds"));
    assert_ne!(after.lines().next(), unit.lines().next());

    // and regenerating once more is a fixed point
    let existing = FileSet::read_existing(dir.path(), fresh.paths()).unwrap();
    assert_eq!(regenerate(&changed, &opts, &existing).unwrap(), existing);
}

#[test]
fn overwrite_discards_regions() {
    let opts = GenOptions::default();
    let model = example_model();
    let fs = generate(&model, &opts).unwrap();
    let mut existing = FileSet::new();
    let path = "src/modules/sonar.rs";
    let mut bodies = BTreeMap::new();
    bodies.insert("sonar.state".to_owned(), "    count: u32,\n".to_owned());
    existing.insert(path, fill_regions(path, fs.get(path).unwrap(), &bodies));
    let forced = GenOptions {
        overwrite_user_regions: true,
        ..opts.clone()
    };
    assert_eq!(regenerate(&model, &forced, &existing).unwrap().get(path), fs.get(path));
    assert_ne!(regenerate(&model, &opts, &existing).unwrap().get(path), fs.get(path));
}

#[test]
fn edits_outside_regions_conflict() {
    let opts = GenOptions::default();
    let model = example_model();
    let fs = generate(&model, &opts).unwrap();
    let path = "src/modules/collide.rs";
    let edited = fs
        .get(path)
        .unwrap()
        .replace("pub const LAYER: u32 = 0;", "pub const LAYER: u32 = 7;");
    let mut existing = FileSet::new();
    existing.insert(path, edited);
    match regenerate(&model, &opts, &existing) {
        Err(CodegenError::IoConflict { path: p, summary }) => {
            assert_eq!(p, path);
            assert!(summary.contains("+ pub const LAYER: u32 = 7;"), "{summary}");
            assert!(summary.contains("- pub const LAYER: u32 = 0;"), "{summary}");
        }
        other => panic!("{other:?}"),
    }

    let mut foreign = FileSet::new();
    foreign.insert("src/main.rs", "fn main() {}\n");
    assert!(matches!(
        regenerate(&model, &opts, &foreign),
        Err(CodegenError::IoConflict { .. })
    ));

    let mut broken = FileSet::new();
    broken.insert(path, fs.get(path).unwrap().replace("// USER CODE END collide.step\n", ""));
    assert!(matches!(
        regenerate(&model, &opts, &broken),
        Err(CodegenError::MalformedRegions { .. })
    ));
}

#[test]
fn docs_pages() {
    let docs = generate_docs(&example_model()).unwrap();
    assert_eq!(docs.len(), 9);
    let index = docs.get("docs/index.md").unwrap();
    assert!(index.contains("### Layer 0") && index.contains("### Layer 1"));
    assert!(index.contains("[`wander`](wander.md)"));
    assert_eq!(docs, generate_docs(&example_model()).unwrap());

    let model = subsume::SystemBuilder::new("bare")
        .module("lonely", 0, |m| m)
        .build();
    let docs = generate_docs(&model).unwrap();
    let page = docs.get("docs/lonely.md").unwrap();
    assert!(page.contains("(no description)"));
    assert!(page.contains("Not connected."));
}

#[test]
fn example_ratio_of_generated_to_stub_lines() {
    let opts = GenOptions {
        emit_tests: true,
        ..GenOptions::default()
    };
    let fs = generate(&example_model(), &opts).unwrap();
    let generated: usize = fs.iter().map(|(p, c)| code_lines(p, c)).sum();
    let regions: usize = fs
        .iter()
        .map(|(p, c)| user_regions(p, c).unwrap().len())
        .sum();
    // every region costs two marker lines of scaffold at most
    assert!(generated >= 5 * regions, "{generated} vs {regions} regions");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_sets_are_deterministic_and_well_formed(seed in any::<u64>()) {
        let model = random_model(&mut rng(seed), Faults::NONE);
        prop_assert!(validate(&model).is_empty());
        let opts = GenOptions { emit_docs: true, emit_tests: true, ..GenOptions::default() };
        let first = generate(&model, &opts);
        let Ok(fs) = first else {
            // mangling collisions are the only refusal for valid models
            let collided = matches!(first, Err(CodegenError::NameCollision { .. }));
            prop_assert!(collided);
            return Ok(());
        };
        prop_assert_eq!(&fs, &generate(&model, &opts).unwrap());
        let units = fs.paths().filter(|p| p.starts_with("src/modules/")).count();
        prop_assert_eq!(units, model.modules.len());
        for (p, c) in fs.iter() {
            prop_assert!(!p.starts_with('/') && !p.contains(".."));
            prop_assert!(c.ends_with('\n'));
            prop_assert!(user_regions(p, c).is_ok());
        }
        // regenerating over itself changes nothing
        prop_assert_eq!(&regenerate(&model, &opts, &fs).unwrap(), &fs);
    }
}
