//! Checks shared by the acceptance target and the ordinary integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syllo::io::{read_json, read_jsonl};
use syllo::pipeline::evaluate;
use syllo::records::{GoldRecord, PredictionRecord, ScoredRecord};
use syllo_core::render::render_formula;
use syllo_core::{
    aggregate, compare_reports, enumerate_inferences, gen_kbs, score, Assignment, Formula, GenConfig, KnowledgeBase,
    MetricsReport, Outcome, Purpose, Quantifier, Scored,
};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eval")
}

/// Scores the brute-force fixture and compares every label and metric with
/// the values the fixture script computed.
pub fn check_fixture() -> Result<String, String> {
    let dir = fixture_dir();
    let gold: Vec<GoldRecord> = read_jsonl(&dir.join("gold.jsonl")).map_err(|e| e.to_string())?;
    let preds: Vec<PredictionRecord> = read_jsonl(&dir.join("pred.jsonl")).map_err(|e| e.to_string())?;
    let want: Vec<ScoredRecord> = read_jsonl(&dir.join("expected_scored.jsonl")).map_err(|e| e.to_string())?;
    let want_report: MetricsReport = read_json(&dir.join("expected.json")).map_err(|e| e.to_string())?;
    let out = evaluate(&gold, &preds).map_err(|e| e.to_string())?;
    if out.scored.len() != want.len() {
        return Err(format!("{} scored, fixture has {}", out.scored.len(), want.len()));
    }
    let wrong: Vec<&str> =
        out.scored.iter().zip(&want).filter(|(a, b)| a != b).map(|(a, _)| a.episode_id.as_str()).collect();
    if !wrong.is_empty() {
        return Err(format!("{} labels differ, first {}", wrong.len(), wrong[0]));
    }
    let diff = compare_reports(&want_report, &out.report, 1e-9);
    if !diff.passes() {
        return Err(format!("metrics differ: {:?}", diff.entries));
    }
    Ok(format!("{} predictions, labels and metrics match", want.len()))
}

fn corpus(seed: u64) -> Vec<(KnowledgeBase, Vec<syllo_core::MinimalInference>)> {
    let cfg = GenConfig::for_purpose(Purpose::Train, seed);
    let (kbs, _) = gen_kbs(&cfg, 4, Purpose::Train).expect("generator");
    kbs.into_iter()
        .map(|kb| {
            let infs = enumerate_inferences(&kb).expect("enumeration");
            (kb, infs)
        })
        .collect()
}

fn flip_case(s: &str, rng: &mut ChaCha8Rng) -> String {
    s.chars().map(|c| if rng.gen_bool(0.2) { c.to_ascii_uppercase() } else { c }).collect()
}

/// Scores `n` random predictions and checks that every error gets exactly
/// one of NVM, MAP and residual, with counts and HP consistent with how the
/// prediction was built.
pub fn fuzz_exclusivity(n: usize, seed: u64) -> Result<String, String> {
    let corpus = corpus(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored = Vec::with_capacity(n);
    let mut counts = [0usize; 4];
    for i in 0..n {
        let (kb, infs) = &corpus[rng.gen_range(0..corpus.len())];
        let inf = &infs[rng.gen_range(0..infs.len())];
        let asg = Assignment::indexed(kb.n_terms());
        let gold = inf.premise_formulas(kb);
        let mut chosen: BTreeSet<usize> = BTreeSet::new();
        for (j, _) in kb.premises().iter().enumerate() {
            let p = if inf.premises.contains(j) { 0.8 } else { 0.04 };
            if rng.gen_bool(p) {
                chosen.insert(j);
            }
        }
        let mut items: Vec<String> = Vec::new();
        let mut hallucinated = false;
        // A converse E or I item names a statement outside the knowledge base.
        chosen.retain(|&j| {
            let f = kb.premises()[j];
            let flip = f.q.is_symmetric() && rng.gen_bool(0.2);
            let shown = if flip { f.converse() } else { f };
            items.push(flip_case(&render_formula(&shown, &asg).unwrap(), &mut rng));
            hallucinated |= flip;
            !flip
        });
        if rng.gen_bool(0.1) {
            items.push(items.first().cloned().unwrap_or_default());
        }
        if rng.gen_bool(0.15) {
            let q = Quantifier::ALL[rng.gen_range(0..4)];
            let s = rng.gen_range(0..kb.n_terms());
            let o = (s + rng.gen_range(1..kb.n_terms())) % kb.n_terms();
            let f = Formula::new(q, s, o);
            if kb.position(&f).is_none() {
                items.push(render_formula(&f, &asg).unwrap());
                hallucinated = true;
            }
        }
        if rng.gen_bool(0.05) {
            items.push(["All x1 are", "Maybe x2 are x3", "All q9 are x1"][rng.gen_range(0..3)].to_string());
            hallucinated = true;
        }
        items.shuffle(&mut rng);
        let raw = if rng.gen_bool(0.3) { format!("premises: {}\nextra", items.join(", ")) } else { items.join(", ") };
        let outcome = score(kb, &gold, &asg, &raw);

        let gold_idx: BTreeSet<usize> = inf.premises.iter().collect();
        let should_be_correct = !hallucinated && chosen == gold_idx;
        match outcome {
            Outcome::Correct => {
                if !should_be_correct {
                    return Err(format!("case {i}: marked correct: {raw:?}"));
                }
                counts[0] += 1;
            }
            Outcome::Error(l) => {
                if should_be_correct {
                    return Err(format!("case {i}: marked wrong: {raw:?}"));
                }
                if l.hp != hallucinated {
                    return Err(format!("case {i}: hp={} expected {hallucinated}", l.hp));
                }
                let buckets = [l.nvm, l.map, l.is_residual()].iter().filter(|&&b| b).count();
                if buckets != 1 {
                    return Err(format!("case {i}: {buckets} of NVM/MAP/residual set: {l:?}"));
                }
                let superset = gold_idx.is_subset(&chosen) && chosen.len() > gold_idx.len();
                if l.nvm != superset || (l.extra_count > 0) != l.nvm {
                    return Err(format!("case {i}: NVM label {l:?} for {raw:?}"));
                }
                let missing_a =
                    gold_idx.iter().filter(|&&j| kb.premises()[j].q == Quantifier::A && !chosen.contains(&j)).count();
                let expect_map = !superset && missing_a > 0;
                if l.map != expect_map || l.missing_a_count != if expect_map { missing_a } else { 0 } {
                    return Err(format!("case {i}: MAP label {l:?}, {missing_a} A-premises missing"));
                }
                let bucket = [l.nvm, l.map, true].iter().position(|&b| b).unwrap();
                counts[bucket + 1] += 1;
            }
        }
        scored.push(Scored { itype: inf.itype.number(), length: inf.length, outcome });
    }
    let r = aggregate(&scored);
    if r.correct + r.nvm_count + r.map_count + r.residual_count != r.total || r.total != n {
        return Err(format!("buckets do not partition {} predictions", r.total));
    }
    if r.error_count > 0 && (r.nvm_pct + r.map_pct + r.residual_pct - 100.0).abs() > 1e-9 {
        return Err("error shares do not sum to 100".into());
    }
    Ok(format!(
        "{n} fuzzed: {} correct, {} nvm, {} map, {} residual, {} hp",
        counts[0], counts[1], counts[2], counts[3], r.hp_count
    ))
}

/// The A-premises form a forest with at most one path between any two terms.
pub fn unique_path_forest(kb: &KnowledgeBase) -> bool {
    let n = kb.n_terms() as usize;
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut indeg = vec![0usize; n];
    for f in kb.premises().iter().filter(|f| f.q == Quantifier::A) {
        succ.entry(f.subj.index()).or_default().push(f.obj.index());
        indeg[f.obj.index()] += 1;
    }
    // Kahn order; a cycle leaves nodes unvisited.
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut deg = indeg.clone();
    while let Some(v) = ready.pop() {
        order.push(v);
        for &w in succ.get(&v).map_or(&[][..], |s| s.as_slice()) {
            deg[w] -= 1;
            if deg[w] == 0 {
                ready.push(w);
            }
        }
    }
    if order.len() != n {
        return false;
    }
    for &src in &order {
        let mut paths = vec![0u32; n];
        paths[src] = 1;
        for &v in order.iter().skip_while(|&&v| v != src) {
            if paths[v] == 0 {
                continue;
            }
            for &w in succ.get(&v).map_or(&[][..], |s| s.as_slice()) {
                paths[w] += paths[v];
                if paths[w] > 1 {
                    return false;
                }
            }
        }
    }
    true
}
