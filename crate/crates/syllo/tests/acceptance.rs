//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use syllo::io::{read_jsonl, write_json, write_jsonl};
use syllo::pipeline::{
    build_dataset, evaluate, flatten_records, load_vocabulary, oracle_check, random_small_kbs, same_pairs, BuildConfig,
    VocabSpec,
};
use syllo::records::{DatasetRecord, EpisodeRecord, GoldRecord, PredictionRecord};
use syllo::text::kb_from_text;
use syllo_core::episode::{episode_text, variant_surface};
use syllo_core::kbgen::check_nonredundant;
use syllo_core::oracle::{consistent_semantic, ModelBound, Oracle};
use syllo_core::render::{parse_episode, render_episode, render_formula};
use syllo_core::{
    consistent_syntactic, flatten_to_baseline, gen_kbs, length_ranges, BuiltSplit, Experiment, GenConfig,
    KnowledgeBase, Purpose, TypeLengthGrid, MAX_GRID_LENGTH,
};

type Check = Result<String, String>;

const SEED: u64 = 42;

fn oracle_equivalence() -> Check {
    let kbs: Vec<KnowledgeBase> = random_small_kbs(3000, 1, 6, 8)
        .into_iter()
        .filter(|kb| consistent_semantic(kb, ModelBound::completeness(kb.n_terms(), kb.premises())).unwrap_or(false))
        .take(500)
        .collect();
    if kbs.len() < 500 {
        return Err(format!("only {} consistent random KBs", kbs.len()));
    }
    let r = oracle_check(&kbs, &Oracle::default()).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} KBs, {} hypotheses, {} entailment and {} minimal-set disagreements",
        r.kbs_checked, r.hypotheses_checked, r.entailment_disagreements, r.minimal_set_disagreements
    );
    if r.agrees() && r.consistent_kbs == 500 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn consistency_equivalence() -> Check {
    let kbs = random_small_kbs(10_000, 2, 6, 8);
    let mut consistent = 0;
    let mut wrong = 0;
    for kb in &kbs {
        let semantic = consistent_semantic(kb, ModelBound::completeness(kb.n_terms(), kb.premises()))
            .map_err(|e| e.to_string())?;
        consistent += usize::from(semantic);
        wrong += usize::from(semantic != consistent_syntactic(kb));
    }
    let detail = format!("{} sets ({consistent} consistent), {wrong} disagreements", kbs.len());
    if wrong == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn train_kbs() -> Result<Vec<KnowledgeBase>, String> {
    let cfg = GenConfig::for_purpose(Purpose::Train, SEED);
    gen_kbs(&cfg, 1000, Purpose::Train).map(|(kbs, _)| kbs).map_err(|e| e.to_string())
}

fn generator_invariants(kbs: &[KnowledgeBase]) -> Check {
    let mut bad: BTreeMap<&str, usize> = BTreeMap::new();
    for kb in kbs {
        let n = kb.premises().len();
        for (name, ok) in [
            ("inconsistent", consistent_syntactic(kb)),
            ("not a unique-path forest", common::unique_path_forest(kb)),
            ("redundant", check_nonredundant(kb)),
            ("premise count outside 26-35", (26..=35).contains(&n)),
        ] {
            if !ok {
                *bad.entry(name).or_default() += 1;
            }
        }
    }
    let sizes = kbs.iter().map(|kb| kb.premises().len());
    let (lo, hi) = (sizes.clone().min().unwrap_or(0), sizes.max().unwrap_or(0));
    if kbs.len() == 1000 && bad.is_empty() {
        Ok(format!("1000 train KBs, premises {lo}-{hi}"))
    } else {
        Err(format!("{} KBs, violations {bad:?}", kbs.len()))
    }
}

fn published_ranges(kbs: &[KnowledgeBase]) -> Check {
    let grid = TypeLengthGrid::from_kbs(kbs).map_err(|e| e.to_string())?;
    let ranges = length_ranges(&grid);
    let get = |t: u8| ranges.iter().find(|r| r.itype == t).map(|r| (r.min_len, r.max_len));
    let all: Vec<String> = ranges.iter().map(|r| format!("T{}=[{},{}]", r.itype, r.min_len, r.max_len)).collect();
    // The grid stops at MAX_GRID_LENGTH; anything longer would make the
    // ranges above understate the true maxima.
    let beyond: u64 = grid.overflow.iter().sum();
    let detail = format!("{}, {beyond} inferences beyond length {MAX_GRID_LENGTH}", all.join(" "));
    if get(2) == Some((1, 10)) && get(3) == Some((0, 19)) && beyond == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn build_train(exp: Experiment, limited: bool) -> Result<BuiltSplit, String> {
    BuildConfig::new(exp, SEED, limited).builder().build(Purpose::Train).map_err(|e| e.to_string())
}

fn split_arithmetic(core: &BuiltSplit) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    let expected = [(Experiment::Core, 97_000), (Experiment::ShortToLong, 62_000), (Experiment::LongToShort, 62_000)];
    for (exp, want) in expected {
        let full = if exp == Experiment::Core { None } else { Some(build_train(exp, false)?) };
        let full = full.as_ref().unwrap_or(core);
        let limited = build_train(exp, true)?;
        let (n, m) = (full.queries.len(), limited.queries.len());
        ok &= n == want && m * 10 == want && full.report.is_complete() && limited.report.is_complete();
        parts.push(format!("{exp} {n} (limited {m})"));
    }
    if ok {
        Ok(parts.join(", "))
    } else {
        Err(parts.join(", "))
    }
}

/// Builds the core dataset with `seed`, then scores echoed gold answers on
/// its test split, so the artifacts cover generation, rendering and scoring.
fn run_pipeline(seed: u64, dir: &Path) -> Result<(), String> {
    let cfg = BuildConfig::new(Experiment::Core, seed, false);
    let summary = build_dataset(&cfg, dir).map_err(|e| e.to_string())?;
    if !summary.is_complete() {
        return Err("core build incomplete".into());
    }
    let gold: Vec<GoldRecord> = read_jsonl(&dir.join("test.episodes.jsonl")).map_err(|e| e.to_string())?;
    let preds: Vec<PredictionRecord> =
        gold.iter().map(|g| PredictionRecord { episode_id: g.id.clone(), raw_text: g.gold.join(", ") }).collect();
    write_jsonl(&dir.join("test.pred.jsonl"), &preds).map_err(|e| e.to_string())?;
    let out = evaluate(&gold, &preds).map_err(|e| e.to_string())?;
    write_jsonl(&dir.join("test.scored.jsonl"), &out.scored).map_err(|e| e.to_string())?;
    write_json(&dir.join("test.metrics.json"), &out.report).map_err(|e| e.to_string())?;
    if out.report.correct != out.report.total {
        return Err(format!("echoed gold scored {}/{}", out.report.correct, out.report.total));
    }
    Ok(())
}

fn d_equality(core: &BuiltSplit, dir: &Path) -> Check {
    let flat = flatten_to_baseline(&core.kbs, &core.episodes);
    let base = core.baseline();
    let structural = flat == base;
    let episodes: Vec<EpisodeRecord> = read_jsonl(&dir.join("train.episodes.jsonl")).map_err(|e| e.to_string())?;
    let baseline: Vec<DatasetRecord> = read_jsonl(&dir.join("train.baseline.jsonl")).map_err(|e| e.to_string())?;
    let flat_text = flatten_records(&episodes).map_err(|e| e.to_string())?;
    let textual = same_pairs(&flat_text, &baseline) && flat_text.len() == baseline.len();
    let detail = format!(
        "built split: {} flattened vs {} baseline; written files: {} flattened vs {} baseline",
        flat.len(),
        base.len(),
        flat_text.len(),
        baseline.len()
    );
    if structural && textual {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn round_trip(core: &BuiltSplit) -> Check {
    let vocab = load_vocabulary(&VocabSpec::pseudowords(SEED)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sample: Vec<_> = core.episodes.choose_multiple(&mut rng, 1000).collect();
    for ep in &sample {
        let kb = &core.kbs[ep.kb];
        let (asg, perm) = variant_surface(SEED, kb, ep.variant, &vocab).map_err(|e| e.to_string())?;
        let abs = episode_text(kb, ep, &perm).map_err(|e| e.to_string())?;
        let text = render_episode(&abs, &asg).map_err(|e| e.to_string())?.text;
        let back = parse_episode(&text, &asg).map_err(|e| format!("{}: {e}", ep.id))?;
        if back != abs {
            return Err(format!("{} parses to different content", ep.id));
        }
        if render_episode(&back, &asg).map_err(|e| e.to_string())?.text != text {
            return Err(format!("{} re-renders differently", ep.id));
        }
        let tkb = kb_from_text(&ep.id, &text).map_err(|e| e.to_string())?;
        let shown: Vec<String> = abs.premises.iter().map(|f| render_formula(f, &asg).unwrap()).collect();
        let recovered: Vec<String> = tkb.kb.premises().iter().map(|f| render_formula(f, &tkb.asg).unwrap()).collect();
        if shown != recovered || tkb.kb.n_terms() != kb.n_terms() {
            return Err(format!("{} knowledge base not recovered from text", ep.id));
        }
    }
    Ok(format!("{} episodes parse and re-render identically", sample.len()))
}

fn evaluator_fixtures() -> Check {
    let fixture = common::check_fixture()?;
    let fuzz = common::fuzz_exclusivity(100_000, 8)?;
    Ok(format!("{fixture}; {fuzz}"))
}

fn files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    out.sort();
    Ok(out)
}

fn determinism(a: &Path, b: &Path) -> Check {
    run_pipeline(SEED, b)?;
    let (fa, fb) = (files(a)?, files(b)?);
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    if names(&fa) != names(&fb) {
        return Err("runs wrote different file sets".into());
    }
    let mut bytes = 0u64;
    for (x, y) in fa.iter().zip(&fb) {
        let (dx, dy) = (std::fs::read(x).map_err(|e| e.to_string())?, std::fs::read(y).map_err(|e| e.to_string())?);
        if dx != dy {
            return Err(format!("{} differs", x.file_name().unwrap().to_string_lossy()));
        }
        bytes += dx.len() as u64;
    }
    Ok(format!("{} files, {} bytes identical", fa.len(), bytes))
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |name: &str, r: Check| match &r {
        Ok(d) => println!("PASS {name}: {d}"),
        Err(d) => {
            failures += 1;
            println!("FAIL {name}: {d}")
        }
    };
    report("oracle-equivalence", oracle_equivalence());
    report("consistency-equivalence", consistency_equivalence());
    match train_kbs() {
        Ok(kbs) => {
            report("generator-invariants", generator_invariants(&kbs));
            report("published-ranges", published_ranges(&kbs));
        }
        Err(e) => {
            report("generator-invariants", Err(e.clone()));
            report("published-ranges", Err(e));
        }
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    let (a, b) = (tmp.path().join("run-a"), tmp.path().join("run-b"));
    let first_run = run_pipeline(SEED, &a);
    match build_train(Experiment::Core, false) {
        Ok(core) => {
            report("split-arithmetic", split_arithmetic(&core));
            report("d-equality", first_run.clone().and_then(|_| d_equality(&core, &a)));
            report("round-trip", round_trip(&core));
        }
        Err(e) => {
            for name in ["split-arithmetic", "d-equality", "round-trip"] {
                report(name, Err(e.clone()));
            }
        }
    }
    report("evaluator-fixtures", evaluator_fixtures());
    report("determinism", first_run.and_then(|_| determinism(&a, &b)));
    println!("acceptance: {failures} failed, {:.1}s", start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
