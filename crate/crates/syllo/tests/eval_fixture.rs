mod common;

use syllo::pipeline::evaluate;
use syllo::records::{GoldRecord, PredictionRecord};

#[test]
fn fixture_labels_and_metrics_match() {
    common::check_fixture().unwrap();
}

#[test]
fn fuzzed_predictions_get_exactly_one_bucket() {
    common::fuzz_exclusivity(100_000, 7).unwrap();
}

fn one_gold() -> Vec<GoldRecord> {
    vec![GoldRecord {
        id: "g".into(),
        itype: 2,
        length: 1,
        text: "knowledge base: All wug are dax, No dax are fep <QUERY> hypothesis: No wug are fep premises: All wug are dax, No dax are fep".into(),
        gold: vec!["All wug are dax".into(), "No dax are fep".into()],
    }]
}

fn pred(raw: &str) -> Vec<PredictionRecord> {
    vec![PredictionRecord { episode_id: "g".into(), raw_text: raw.into() }]
}

#[test]
fn premises_match_in_surface_form_only() {
    let out = evaluate(&one_gold(), &pred("premises: fep are no, x")).unwrap();
    assert!(!out.scored[0].correct && out.scored[0].hp);
    let out = evaluate(&one_gold(), &pred("all WUG are dax, No dax are FEP")).unwrap();
    assert!(out.scored[0].correct);
    let out = evaluate(&one_gold(), &pred("All wug are dax, No fep are dax")).unwrap();
    let s = &out.scored[0];
    assert!(!s.correct && s.hp && !s.map && !s.nvm);
}

#[test]
fn unknown_or_duplicate_prediction_ids_are_rejected() {
    let mut p = pred("All wug are dax");
    p[0].episode_id = "missing".into();
    assert!(evaluate(&one_gold(), &p).is_err());
    let mut p = pred("All wug are dax");
    p.push(p[0].clone());
    assert!(evaluate(&one_gold(), &p).is_err());
}

#[test]
fn missing_predictions_are_counted() {
    let out = evaluate(&one_gold(), &[]).unwrap();
    assert_eq!((out.unpredicted, out.report.total), (1, 0));
}
