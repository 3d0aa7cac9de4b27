mod common;

use common::{random_model, rng, Faults};
use proptest::prelude::*;
use subsume::dsl::{format, parse};
use subsume::example::example_model;

fn example_text() -> String {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/example.sub");
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn example_file_matches_builder_model() {
    let parsed = parse(&example_text()).unwrap();
    assert_eq!(parsed, example_model());
    assert_eq!(parsed.modules.len(), 8);
    assert_eq!(parsed.modifiers.len(), 1);
}

#[test]
fn example_round_trip() {
    let canonical = format(&parse(&example_text()).unwrap());
    assert_eq!(format(&parse(&canonical).unwrap()), canonical);
    assert!(!canonical.contains('#'));
    assert!(canonical.lines().all(|l| !l.starts_with(' ') || l.starts_with("  ")));
}

#[test]
fn minimal_forms() {
    let m = parse("system s { }").unwrap();
    assert_eq!(m.name, "s");
    assert_eq!(format(&m), "system s {\n}\n");
    let errs = parse("system s { wire a.b -> }").unwrap_err();
    assert_eq!(errs[0].span.column, 24);
}

#[test]
fn comments_and_whitespace_do_not_matter() {
    let tidy = "system s {\n  type T;\n\n  module a layer 0 {\n    out x: T;\n  }\n}\n";
    let messy = "# header\nsystem   s{type T ;# trailing\n\n module a\tlayer 0{out x:T;}}";
    assert_eq!(format(&parse(messy).unwrap()), tidy);
    assert_eq!(format(&parse(tidy).unwrap()), tidy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_inverts_format(seed in any::<u64>(), rate in 0.0f64..0.3) {
        let model = random_model(&mut rng(seed), Faults::textual(rate));
        let text = format(&model);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(format(&back), text);
    }

    #[test]
    fn error_spans_stay_in_bounds(seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "[{};.:\"#a-z0-9 \n-]{0,4}") {
        let text = format(&random_model(&mut rng(seed), Faults::NONE));
        let at = cut.index(text.len() + 1);
        let at = (0..=at).rev().find(|&i| text.is_char_boundary(i)).unwrap();
        let mutated = format!("{}{}{}", &text[..at], junk, &text[at..]);
        match parse(&mutated) {
            Ok(m) => {
                let once = format(&m);
                prop_assert_eq!(format(&parse(&once).unwrap()), once);
            }
            Err(errors) => {
                prop_assert!(!errors.is_empty());
                for e in errors {
                    prop_assert!(e.span.start <= e.span.end && e.span.end <= mutated.len());
                    prop_assert!(!e.message.is_empty());
                    prop_assert!(e.span.line >= 1 && e.span.column >= 1);
                }
            }
        }
    }
}
