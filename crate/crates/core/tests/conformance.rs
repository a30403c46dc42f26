mod common;

use common::*;
use metakernel::constraints::eval_all;
use metakernel::diagnostics::DiagCode;
use metakernel::model_store::{check_conformance, Model};
use metakernel::syntax_io;
use proptest::prelude::*;

fn library_check(raw: &RawModel, mm: &metakernel::meta_core::Metamodel) -> (Model, Vec<Finding>) {
    let text = raw.to_text(&mm.name, mm.version);
    let model = syntax_io::parse_model(&text, mm).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let diags = check_conformance(&model, mm).unwrap();
    let findings = library_findings(&model, &diags);
    (model, findings)
}

#[test]
fn fixtures_conform() {
    let mm = fixture_metamodel("signalflow.mm");
    let model = fixture_model("fig36b.mdl", &mm);
    assert_eq!(check_conformance(&model, &mm).unwrap(), vec![]);
}

#[test]
fn sibling_outputs_violate_once() {
    let mm = fixture_metamodel("signalflow.mm");
    let model = fixture_model("sibling_outputs.mdl", &mm);
    let diags = check_conformance(&model, &mm).unwrap();
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].code, DiagCode::ConstraintViolation);
    assert_eq!(model.location_path(&diags[0].location), "/System/Top/@0");
    let eval = eval_all(&model, &mm);
    assert!(!eval.results[0].overall);
}

#[test]
fn published_constraint_text_is_verbatim() {
    let mm = fixture_metamodel("signalflow.mm");
    let c = mm.constraint("NoSiblingOutputs").unwrap();
    let reparsed = metakernel::meta_core::ConstraintDef::parse("x", SIBLING_OUTPUTS).unwrap();
    assert_eq!(c.expr, reparsed.expr);
}

#[test]
fn oracle_agrees_on_seeded_corpus() {
    for seed in 0..300 {
        let mut r = rng(seed);
        let mm = gen_metamodel(&mut r, &GenOptions::new("P"));
        let noise = [0.0, 0.3, 1.0][seed as usize % 3];
        let raw = gen_raw_model(&mut r, &mm, 20, noise);
        let (model, found) = library_check(&raw, &mm);
        let expected = oracle_check(&raw, &mm);
        assert_eq!(found, expected, "seed {seed}\n{}", syntax_io::serialize_model(&model));
    }
}

#[test]
fn clean_generation_mostly_conforms() {
    // guards against an oracle and library that agree only because every
    // model is broken
    let clean = (0..200)
        .filter(|seed| {
            let mut r = rng(*seed);
            let mut opts = GenOptions::new("Q");
            opts.constraints = false;
            let mm = gen_metamodel(&mut r, &opts);
            let raw = gen_raw_model(&mut r, &mm, 3, 0.0);
            oracle_check(&raw, &mm).is_empty()
        })
        .count();
    assert!(clean >= 40, "only {clean} clean models");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verdict_matches_oracle(seed in any::<u64>(), noise in 0.0f64..1.0) {
        let mut r = rng(seed);
        let mm = gen_metamodel(&mut r, &GenOptions::new("R"));
        let raw = gen_raw_model(&mut r, &mm, 12, noise);
        let (_, found) = library_check(&raw, &mm);
        prop_assert_eq!(found, oracle_check(&raw, &mm));
    }

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mm = gen_metamodel(&mut r, &GenOptions::new("S"));
        let raw = gen_raw_model(&mut r, &mm, 12, 0.5);
        let text = raw.to_text(&mm.name, mm.version);
        let a = syntax_io::parse_model(&text, &mm).unwrap();
        let b = syntax_io::parse_model(&text, &mm).unwrap();
        prop_assert_eq!(check_conformance(&a, &mm).unwrap(), check_conformance(&b, &mm).unwrap());
    }
}

#[test]
fn corpus_exercises_every_rule() {
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..300 {
        let mut r = rng(seed);
        let mm = gen_metamodel(&mut r, &GenOptions::new("P"));
        let noise = [0.0, 0.3, 1.0][seed as usize % 3];
        let raw = gen_raw_model(&mut r, &mm, 20, noise);
        for (rule, _) in oracle_check(&raw, &mm) {
            let rule = if rule.starts_with("constraint ") {
                "constraint".to_string()
            } else {
                rule
            };
            seen.insert(rule);
        }
    }
    let all = [
        "attribute",
        "class",
        "constraint",
        "containment",
        "containment-count",
        "link",
        "role-count",
    ];
    assert_eq!(seen.iter().map(String::as_str).collect::<Vec<_>>(), all);
}
