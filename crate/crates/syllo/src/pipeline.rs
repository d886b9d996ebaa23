//! End-to-end operations behind the CLI subcommands.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use syllo_core::episode::{render_baseline_variant, render_episode_variant, BuildError};
use syllo_core::eval::Scored;
use syllo_core::inference::{classify, enumerate_inferences};
use syllo_core::oracle::{self, ModelBound, Oracle, OracleError};
use syllo_core::render::{parse_episode, DatapointText};
use syllo_core::rng::stream;
use syllo_core::{
    aggregate, consistent_syntactic, length_ranges, score, BuildReport, BuiltSplit, EpisodeBuilder, Experiment,
    Formula, GenConfig, InferenceType, KnowledgeBase, LengthRange, LogicError, MetricsReport, MinimalInference,
    Outcome, PremiseSet, Purpose, Quantifier, Reasoner, Split, SplitSpec, TypeLengthGrid, Vocabulary, VocabularyKind,
    FORMAT_VERSION,
};

use crate::io::{read_lines, write_json, write_jsonl, DataError};
use crate::records::{DatasetRecord, EpisodeRecord, GoldRecord, KbRecord, PredictionRecord, ScoredRecord};
use crate::text::{gold_formulas, kb_from_text};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Render(#[from] syllo_core::RenderError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub const DEFAULT_VOCAB_SIZE: usize = 5000;

/// Where term names come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabSpec {
    pub kind: VocabularyKind,
    pub size: usize,
    /// Seed of the pseudoword draw.
    pub seed: u64,
    /// Word list for external vocabularies.
    pub file: Option<PathBuf>,
    /// Syllable inventory replacing the bundled one.
    pub syllables: Option<PathBuf>,
    /// Words to leave out, e.g. the training vocabulary.
    pub exclude: Option<PathBuf>,
}

impl VocabSpec {
    pub fn pseudowords(seed: u64) -> Self {
        VocabSpec {
            kind: VocabularyKind::SyllablePseudowords,
            size: DEFAULT_VOCAB_SIZE,
            seed,
            file: None,
            syllables: None,
            exclude: None,
        }
    }

    pub fn symbolic() -> Self {
        VocabSpec { kind: VocabularyKind::SymbolicConstants, ..Self::pseudowords(0) }
    }
}

pub fn load_vocabulary(spec: &VocabSpec) -> Result<Vocabulary, PipelineError> {
    let vocab = match spec.kind {
        VocabularyKind::SymbolicConstants => Vocabulary::symbolic(spec.size),
        VocabularyKind::ExternalFile => {
            let path =
                spec.file.as_ref().ok_or_else(|| DataError::Invalid("external vocabulary needs a file".into()))?;
            Vocabulary::new(VocabularyKind::ExternalFile, read_lines(path)?)?
        }
        VocabularyKind::SyllablePseudowords => {
            let mut rng = stream(spec.seed, "vocab", 0);
            match &spec.syllables {
                Some(p) => Vocabulary::from_syllables(&read_lines(p)?, spec.size, &mut rng)?,
                None => Vocabulary::pseudowords(spec.size, &mut rng)?,
            }
        }
    };
    Ok(match &spec.exclude {
        Some(p) => {
            let other = Vocabulary::new(VocabularyKind::ExternalFile, read_lines(p)?)?;
            vocab.without(&other)
        }
        None => vocab,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub seed: u64,
    pub spec: SplitSpec,
    pub generator: GenConfig,
    pub vocab: VocabSpec,
    pub limited: bool,
}

impl BuildConfig {
    pub fn new(experiment: Experiment, seed: u64, limited: bool) -> Self {
        let spec = SplitSpec::new(experiment);
        BuildConfig {
            seed,
            spec: if limited { spec.limited() } else { spec },
            generator: GenConfig::for_purpose(Purpose::Train, seed),
            vocab: VocabSpec::pseudowords(seed),
            limited,
        }
    }

    /// The episode builder this configuration describes.
    pub fn builder(&self) -> EpisodeBuilder {
        let mut gen = self.generator.clone();
        gen.seed = self.seed;
        EpisodeBuilder::new(self.spec.clone(), gen)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub format_version: String,
    pub config: BuildConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub report: BuildReport,
    pub kbs_file: String,
    pub episodes_file: String,
    pub baseline_file: String,
    pub episodes_written: usize,
    pub baseline_written: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub meta: Meta,
    pub splits: Vec<SplitSummary>,
}

impl BuildSummary {
    pub fn is_complete(&self) -> bool {
        self.splits.iter().all(|s| s.report.is_complete())
    }
}

pub fn kb_records(built: &BuiltSplit) -> Vec<KbRecord> {
    built.kbs.iter().map(|kb| KbRecord::new(kb, built.split)).collect()
}

pub fn render_episodes(built: &BuiltSplit, vocab: &Vocabulary, seed: u64) -> Result<Vec<EpisodeRecord>, PipelineError> {
    built
        .episodes
        .par_iter()
        .map(|ep| {
            let kb = &built.kbs[ep.kb];
            let r = render_episode_variant(seed, kb, ep, vocab)?;
            Ok(EpisodeRecord {
                id: ep.id.clone(),
                experiment: ep.experiment,
                split: ep.split,
                alignment: ep.alignment,
                itype: ep.query.itype.number(),
                length: ep.query.length,
                kb_id: kb.id().to_string(),
                variant: ep.variant,
                text: r.text,
                gold: r.gold,
            })
        })
        .collect()
}

pub fn render_baseline(built: &BuiltSplit, vocab: &Vocabulary, seed: u64) -> Result<Vec<DatasetRecord>, PipelineError> {
    let prefix = format!("{}-{}-dp", built.spec.experiment.as_str(), built.split.as_str());
    built
        .queries
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let kb = &built.kbs[d.kb];
            let r = render_baseline_variant(seed, kb, d.variant, &d.inference, vocab)?;
            Ok(DatasetRecord {
                id: format!("{prefix}-{i:07}"),
                kb_id: kb.id().to_string(),
                variant: d.variant,
                itype: d.inference.itype.number(),
                length: d.inference.length,
                text: r.text,
                gold: r.gold,
            })
        })
        .collect()
}

/// Builds one split and writes its knowledge bases, episodes and baseline
/// datapoints into `out_dir`.
pub fn build_split(
    cfg: &BuildConfig,
    split: Split,
    vocab: &Vocabulary,
    out_dir: &Path,
) -> Result<SplitSummary, PipelineError> {
    let built = cfg.builder().build(split)?;
    let names = ["kbs", "episodes", "baseline"].map(|k| format!("{}.{k}.jsonl", split.as_str()));
    write_jsonl(&out_dir.join(&names[0]), &kb_records(&built))?;
    let episodes_written = write_jsonl(&out_dir.join(&names[1]), &render_episodes(&built, vocab, cfg.seed)?)?;
    let baseline_written = write_jsonl(&out_dir.join(&names[2]), &render_baseline(&built, vocab, cfg.seed)?)?;
    let [kbs_file, episodes_file, baseline_file] = names;
    Ok(SplitSummary {
        report: built.report,
        kbs_file,
        episodes_file,
        baseline_file,
        episodes_written,
        baseline_written,
    })
}

/// All three splits of one experiment, plus `meta.json`.
pub fn build_dataset(cfg: &BuildConfig, out_dir: &Path) -> Result<BuildSummary, PipelineError> {
    let vocab = load_vocabulary(&cfg.vocab)?;
    let meta = Meta { format_version: FORMAT_VERSION.to_string(), config: cfg.clone() };
    write_json(&out_dir.join("meta.json"), &meta)?;
    let splits =
        Purpose::ALL.into_iter().map(|s| build_split(cfg, s, &vocab, out_dir)).collect::<Result<Vec<_>, _>>()?;
    Ok(BuildSummary { meta, splits })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlattenSummary {
    pub episodes: usize,
    pub pairs: usize,
    /// Set equality with a baseline file, when one was given.
    pub baseline_pairs: Option<usize>,
    pub baseline_equal: Option<bool>,
}

/// Every study and query pair of the episodes as a baseline datapoint,
/// deduplicated on (knowledge base, variant, text), in first-seen order.
pub fn flatten_records(episodes: &[EpisodeRecord]) -> Result<Vec<DatasetRecord>, PipelineError> {
    let per_episode: Vec<Vec<DatasetRecord>> = episodes
        .par_iter()
        .map(|ep| {
            let tkb = kb_from_text(&ep.id, &ep.text)?;
            let parsed = parse_episode(&ep.text, &tkb.asg)?;
            let pairs = parsed.study.iter().cloned().chain(std::iter::once((parsed.hypothesis, parsed.gold.clone())));
            pairs
                .map(|(h, gold)| {
                    let premises: PremiseSet = gold.iter().filter_map(|g| tkb.kb.position(g)).collect();
                    let length = gold.iter().filter(|g| g.q == Quantifier::A).count();
                    let probe = MinimalInference {
                        itype: InferenceType::new(1).expect("type 1 exists"),
                        conclusion: h,
                        premises,
                        length,
                    };
                    let itype = classify(&tkb.kb, &probe)?;
                    let d = DatapointText { premises: parsed.premises.clone(), hypothesis: h, gold };
                    let r = syllo_core::render::render_datapoint(&d, &tkb.asg)?;
                    Ok(DatasetRecord {
                        id: String::new(),
                        kb_id: ep.kb_id.clone(),
                        variant: ep.variant,
                        itype: itype.number(),
                        length,
                        text: r.text,
                        gold: r.gold,
                    })
                })
                .collect::<Result<Vec<_>, PipelineError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mut r in per_episode.into_iter().flatten() {
        if seen.insert((r.kb_id.clone(), r.variant, r.text.clone())) {
            r.id = format!("flat-{:07}", out.len());
            out.push(r);
        }
    }
    Ok(out)
}

/// Set equality of two datapoint collections, ignoring ids and order.
pub fn same_pairs(a: &[DatasetRecord], b: &[DatasetRecord]) -> bool {
    let key = |r: &DatasetRecord| (r.kb_id.clone(), r.variant, r.text.clone());
    let sa: HashSet<_> = a.iter().map(key).collect();
    let sb: HashSet<_> = b.iter().map(key).collect();
    sa == sb
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub report: MetricsReport,
    pub scored: Vec<ScoredRecord>,
    /// Gold records without a prediction.
    pub unpredicted: usize,
}

pub fn evaluate(gold: &[GoldRecord], preds: &[PredictionRecord]) -> Result<EvalOutput, PipelineError> {
    let by_id: HashMap<&str, &GoldRecord> = gold.iter().map(|g| (g.id.as_str(), g)).collect();
    let mut seen = HashSet::new();
    for p in preds {
        if !by_id.contains_key(p.episode_id.as_str()) {
            return Err(DataError::Invalid(format!("prediction for unknown episode {}", p.episode_id)).into());
        }
        if !seen.insert(p.episode_id.as_str()) {
            return Err(DataError::Invalid(format!("duplicate prediction for episode {}", p.episode_id)).into());
        }
    }
    let scored: Vec<ScoredRecord> = preds
        .par_iter()
        .map(|p| {
            let g = by_id[p.episode_id.as_str()];
            let tkb = kb_from_text(&g.id, &g.text)?;
            let gold = gold_formulas(&g.id, &tkb, &g.gold)?;
            let outcome = score(&tkb.kb, &gold, &tkb.asg, &p.raw_text);
            let label = match outcome {
                Outcome::Correct => Default::default(),
                Outcome::Error(e) => e,
            };
            Ok(ScoredRecord {
                episode_id: p.episode_id.clone(),
                itype: g.itype,
                length: g.length,
                correct: outcome.is_correct(),
                nvm: label.nvm,
                map: label.map,
                hp: label.hp,
                extra_count: label.extra_count,
                missing_a_count: label.missing_a_count,
            })
        })
        .collect::<Result<_, PipelineError>>()?;
    let report = aggregate(&scored.iter().map(to_scored).collect::<Vec<_>>());
    Ok(EvalOutput { report, scored, unpredicted: gold.len() - preds.len() })
}

fn to_scored(r: &ScoredRecord) -> Scored {
    let outcome = if r.correct {
        Outcome::Correct
    } else {
        Outcome::Error(syllo_core::ErrorLabel {
            nvm: r.nvm,
            map: r.map,
            hp: r.hp,
            extra_count: r.extra_count,
            missing_a_count: r.missing_a_count,
        })
    };
    Scored { itype: r.itype, length: r.length, outcome }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub kbs: usize,
    pub inferences: u64,
    /// `(premise count, knowledge bases)`, ascending.
    pub premise_histogram: Vec<(usize, usize)>,
    pub cells: usize,
    pub ranges: Vec<LengthRange>,
    /// Inferences longer than the grid, per type.
    pub overflow: [u64; 7],
    pub grid: TypeLengthGrid,
}

pub fn enumerate_all(kbs: &[KnowledgeBase]) -> Result<Vec<Vec<MinimalInference>>, PipelineError> {
    Ok(kbs.par_iter().map(enumerate_inferences).collect::<Result<_, _>>()?)
}

pub fn stats(kbs: &[KnowledgeBase]) -> Result<Stats, PipelineError> {
    let mut grid = TypeLengthGrid::new();
    for infs in enumerate_all(kbs)? {
        grid.add_all(&infs);
    }
    let mut hist: Vec<(usize, usize)> = Vec::new();
    for kb in kbs {
        let n = kb.premises().len();
        match hist.binary_search_by_key(&n, |&(k, _)| k) {
            Ok(i) => hist[i].1 += 1,
            Err(i) => hist.insert(i, (n, 1)),
        }
    }
    Ok(Stats {
        kbs: kbs.len(),
        inferences: grid.total(),
        premise_histogram: hist,
        cells: grid.cells().len(),
        ranges: length_ranges(&grid),
        overflow: grid.overflow,
        grid,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kbs_checked: usize,
    pub kbs_skipped: usize,
    pub consistent_kbs: usize,
    pub consistency_disagreements: usize,
    pub hypotheses_checked: usize,
    pub entailment_disagreements: usize,
    pub minimal_set_disagreements: usize,
}

impl OracleReport {
    pub fn agrees(&self) -> bool {
        self.consistency_disagreements == 0 && self.entailment_disagreements == 0 && self.minimal_set_disagreements == 0
    }
}

/// Compares the syntactic procedures with the model-checking oracle on every
/// knowledge base small enough for the oracle.
pub fn oracle_check(kbs: &[KnowledgeBase], oracle: &Oracle) -> Result<OracleReport, PipelineError> {
    let per_kb: Vec<Option<OracleReport>> = kbs
        .par_iter()
        .map(|kb| {
            if kb.n_terms() > oracle.max_terms {
                return Ok(None);
            }
            let mut r = OracleReport { kbs_checked: 1, ..Default::default() };
            let semantic = oracle::consistent_semantic(kb, ModelBound::completeness(kb.n_terms(), kb.premises()))?;
            if semantic != consistent_syntactic(kb) {
                r.consistency_disagreements += 1;
            }
            let Ok(reasoner) = Reasoner::new(kb) else { return Ok(Some(r)) };
            r.consistent_kbs = 1;
            let n = kb.n_terms();
            let all = Quantifier::ALL.into_iter().flat_map(|q| {
                (0..n).flat_map(move |s| (0..n).filter(move |&o| o != s).map(move |o| Formula::new(q, s, o)))
            });
            for h in all {
                r.hypotheses_checked += 1;
                let expected = oracle.entails(kb, &h, oracle::refutation_bound(kb, &h))?;
                if reasoner.entails(&h)? != expected {
                    r.entailment_disagreements += 1;
                }
                let sets: Vec<PremiseSet> = reasoner.minimal_sets(&h)?.into_iter().map(|(s, _)| s).collect();
                if sets != oracle.minimal_entailing_subsets(kb, &h)? {
                    r.minimal_set_disagreements += 1;
                }
            }
            Ok(Some(r))
        })
        .collect::<Result<_, PipelineError>>()?;
    let mut total = OracleReport::default();
    for r in per_kb {
        match r {
            None => total.kbs_skipped += 1,
            Some(r) => {
                total.kbs_checked += r.kbs_checked;
                total.consistent_kbs += r.consistent_kbs;
                total.consistency_disagreements += r.consistency_disagreements;
                total.hypotheses_checked += r.hypotheses_checked;
                total.entailment_disagreements += r.entailment_disagreements;
                total.minimal_set_disagreements += r.minimal_set_disagreements;
            }
        }
    }
    Ok(total)
}

/// `count` random small knowledge bases for [`oracle_check`].
pub fn random_small_kbs(count: usize, seed: u64, max_terms: u32, max_premises: usize) -> Vec<KnowledgeBase> {
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, "oracle/random", i as u64);
            let (n, premises) = oracle::sample_instance(&mut rng, max_terms, max_premises);
            KnowledgeBase::new(format!("random-{i:06}"), n, premises).expect("sampled formulas are well formed")
        })
        .collect()
}

/// Caps rayon's global pool at `SYLLO_THREADS` when set.
pub fn init_threads() -> Result<usize, DataError> {
    let n = match std::env::var("SYLLO_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| DataError::Invalid(format!("SYLLO_THREADS must be a positive integer, got {v:?}")))?,
        Err(_) => return Ok(rayon::current_num_threads()),
    };
    // A second initialisation (e.g. in tests) keeps the existing pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(rayon::current_num_threads())
}
