mod common;

use common::*;
use metakernel::merge::{EquivalenceEntry, EquivalenceMode, EquivalenceSpec};
use metakernel::syntax_io::{self, FormatError};
use proptest::prelude::*;

fn awkward(prefix: &str) -> GenOptions {
    let mut o = GenOptions::new(prefix);
    o.awkward_text = true;
    o
}

#[test]
fn fixtures_are_canonical_after_one_pass() {
    for name in [
        "signalflow.mm",
        "signalflow_v2.mm",
        "discrete.mm",
        "continuous.mm",
        "empty.mm",
    ] {
        let mm = fixture_metamodel(name);
        let text = syntax_io::serialize_metamodel(&mm);
        let back = syntax_io::parse_metamodel(&text).unwrap();
        assert_eq!(back, mm, "{name}");
        assert_eq!(syntax_io::serialize_metamodel(&back), text, "{name}");
    }
    let mm = fixture_metamodel("signalflow.mm");
    for name in ["fig36b.mdl", "sibling_outputs.mdl", "glyph_override.mdl"] {
        let model = fixture_model(name, &mm);
        let text = syntax_io::serialize_model(&model);
        assert_eq!(syntax_io::parse_model(&text, &mm).unwrap(), model, "{name}");
    }
}

#[test]
fn seeded_metamodels_round_trip() {
    for seed in 0..200 {
        let mm = gen_metamodel(&mut rng(seed), &awkward("T"));
        let text = syntax_io::serialize_metamodel(&mm);
        let back = syntax_io::parse_metamodel(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(back, mm, "seed {seed}");
        assert_eq!(syntax_io::serialize_metamodel(&back), text);
    }
}

#[test]
fn seeded_models_round_trip() {
    let signal = fixture_metamodel("signalflow.mm");
    for seed in 0..200 {
        let mut r = rng(seed);
        let (model, mm) = if seed % 2 == 0 {
            (gen_cloned_model(&mut r, &signal, 30), signal.clone())
        } else {
            let mm = gen_metamodel(&mut r, &awkward("U"));
            let raw = gen_raw_model(&mut r, &mm, 20, 0.5);
            (
                syntax_io::parse_model(&raw.to_text(&mm.name, mm.version), &mm).unwrap(),
                mm,
            )
        };
        let text = syntax_io::serialize_model(&model);
        let back = syntax_io::parse_model(&text, &mm).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(back, model, "seed {seed}");
        assert_eq!(syntax_io::serialize_model(&back), text);
    }
}

#[test]
fn equivalence_specs_round_trip() {
    let spec = EquivalenceSpec {
        entries: vec![
            EquivalenceEntry::new(EquivalenceMode::Identity, "A", "B", "AB"),
            EquivalenceEntry::new(EquivalenceMode::Interface, "C", "D", "CD"),
            EquivalenceEntry::new(EquivalenceMode::Implementation, "E", "F", "EF"),
        ],
    };
    let text = syntax_io::serialize_equivalence(&spec);
    assert_eq!(syntax_io::parse_equivalence(&text).unwrap(), spec);
    let fixture = syntax_io::parse_equivalence(&fixture("hybrid.eqv")).unwrap();
    assert_eq!(fixture.entries.len(), 1);
}

#[test]
fn errors_carry_positions() {
    let err = syntax_io::parse_metamodel("metamodel M version 1\nclass A {\n  attr x: nonsense;\n}\n").unwrap_err();
    match err {
        FormatError::Syntax { line, .. } => assert_eq!(line, 3),
        other => panic!("{other}"),
    }
    let err = syntax_io::decode(b"model \xff").unwrap_err();
    assert!(err.to_string().contains("UTF-8"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsers_are_total_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        if let Ok(text) = syntax_io::decode(&bytes) {
            let _ = syntax_io::parse_metamodel(text);
            let _ = syntax_io::parse_model_unchecked(text);
            let _ = syntax_io::parse_equivalence(text);
        }
    }

    #[test]
    fn parsers_are_total_on_token_soup(words in proptest::collection::vec(
        prop_oneof![
            Just("metamodel"), Just("model"), Just("class"), Just("entity"), Just("link"), Just("{"), Just("}"),
            Just("("), Just(")"), Just(";"), Just(":"), Just("="), Just("#1"), Just("@1"), Just("->"), Just("A"),
            Just("\"s\""), Just("1"), Just("-2.5e3"), Just("version"), Just("conforms"), Just("next"),
            Just("correspondence"), Just("clone"), Just("[0..*]"), Just("attr"), Just("enum"), Just("~"),
        ],
        0..60,
    )) {
        let text = words.join(" ");
        let _ = syntax_io::parse_metamodel(&text);
        let _ = syntax_io::parse_model_unchecked(&text);
        let _ = syntax_io::parse_equivalence(&text);
    }

    #[test]
    fn mutated_models_never_panic(seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "[ -~]{0,8}") {
        let mm = fixture_metamodel("signalflow.mm");
        let model = gen_cloned_model(&mut rng(seed), &mm, 15);
        let mut text = syntax_io::serialize_model(&model);
        let mut at = cut.index(text.len() + 1);
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        text.insert_str(at, &junk);
        let _ = syntax_io::parse_model(&text, &mm);
    }

    #[test]
    fn metamodels_round_trip(seed in any::<u64>()) {
        let mm = gen_metamodel(&mut rng(seed), &awkward("V"));
        let text = syntax_io::serialize_metamodel(&mm);
        prop_assert_eq!(syntax_io::parse_metamodel(&text).unwrap(), mm);
    }
}
