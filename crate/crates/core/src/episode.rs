//! Dataset and episode construction for the core and length-generalization
//! experiments.
//!
//! A *datapoint* is an abstract minimal inference of one knowledge base seen
//! through one of its [`N_VARIANTS`] surface variants (a term assignment and a
//! premise order). Quotas are counted in datapoints per (type, length) cell.
//!
//! Training episodes are built so that every study pair is itself a selected
//! training query of the same knowledge base, variant and type. Flattening the
//! training episodes therefore gives back exactly the baseline training set.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use crate::inference::{enumerate_inferences, MAX_GRID_LENGTH};
use crate::kbgen::{GenConfig, GenError, GenReport, KbStream, Purpose};
use crate::logic::{Formula, InferenceType, KnowledgeBase, LogicError, MinimalInference};
use crate::premise_set::PremiseSet;
use crate::render::{
    datapoint_text, permutation, render_datapoint, render_episode, Assignment, EpisodeText, RenderError, Rendered,
    Vocabulary,
};
use crate::rng::stream;

pub const N_ASSIGNMENTS: u8 = 10;
pub const N_PERMUTATIONS: u8 = 3;
pub const N_VARIANTS: u8 = N_ASSIGNMENTS * N_PERMUTATIONS;
pub const STUDY_SIZE: usize = 3;
/// Width of the held-out band in the length-generalization experiments.
pub const HELD_OUT: usize = 5;

/// Default per-type `[min, max]` length windows, indexed by type number - 1.
pub const DEFAULT_WINDOWS: [(usize, usize); 7] = [(0, 8), (1, 10), (0, 19), (1, 14), (0, 13), (0, 15), (0, 13)];

/// Splits coincide with knowledge-base purposes.
pub type Split = Purpose;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Experiment {
    #[cfg_attr(feature = "serde", serde(rename = "core"))]
    Core,
    #[cfg_attr(feature = "serde", serde(rename = "short2long"))]
    ShortToLong,
    #[cfg_attr(feature = "serde", serde(rename = "long2short"))]
    LongToShort,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::Core, Experiment::ShortToLong, Experiment::LongToShort];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Core => "core",
            Experiment::ShortToLong => "short2long",
            Experiment::LongToShort => "long2short",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Alignment {
    #[cfg_attr(feature = "serde", serde(rename = "aligned"))]
    Aligned,
    #[cfg_attr(feature = "serde", serde(rename = "disaligned"))]
    Disaligned,
    #[cfg_attr(feature = "serde", serde(rename = "n/a"))]
    NotApplicable,
}

impl Alignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Alignment::Aligned => "aligned",
            Alignment::Disaligned => "disaligned",
            Alignment::NotApplicable => "n/a",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Alignment::Aligned, Alignment::Disaligned, Alignment::NotApplicable].into_iter().find(|a| a.as_str() == s)
    }
}

/// Inclusive length window.
pub type Window = (usize, usize);

const ANY_LENGTH: Window = (0, usize::MAX);

fn in_window(w: Window, len: usize) -> bool {
    w.0 <= len && len <= w.1
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitSpec {
    pub experiment: Experiment,
    /// Per-type `[sigma, mu]`, indexed by type number - 1.
    pub windows: [Window; 7],
    pub train_quota: usize,
    pub val_quota: usize,
    pub test_quota: usize,
    pub variants: u8,
    /// Knowledge bases drawn per split before a shortfall is reported.
    pub max_kbs: usize,
}

impl SplitSpec {
    pub fn new(experiment: Experiment) -> Self {
        SplitSpec {
            experiment,
            windows: DEFAULT_WINDOWS,
            train_quota: 1000,
            val_quota: 5,
            test_quota: 100,
            variants: N_VARIANTS,
            max_kbs: 20_000,
        }
    }

    /// Training quota cut to one tenth.
    pub fn limited(mut self) -> Self {
        self.train_quota /= 10;
        self
    }

    pub fn quota(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train_quota,
            Split::Val => self.val_quota,
            Split::Test => self.test_quota,
        }
    }

    fn train_window(&self, t: InferenceType) -> Option<Window> {
        let (lo, hi) = self.windows[t.index()];
        match self.experiment {
            Experiment::Core => Some((lo, hi)),
            Experiment::ShortToLong => (hi >= lo + HELD_OUT).then(|| (lo, hi - HELD_OUT)),
            Experiment::LongToShort => (hi >= lo + HELD_OUT).then(|| (lo + HELD_OUT, hi)),
        }
    }

    fn test_window(&self, t: InferenceType) -> Option<Window> {
        let (lo, hi) = self.windows[t.index()];
        match self.experiment {
            Experiment::Core => Some((lo, hi)),
            Experiment::ShortToLong => Some(((hi + 1).saturating_sub(HELD_OUT).max(lo), hi)),
            Experiment::LongToShort => Some((lo, (lo + HELD_OUT - 1).min(hi))),
        }
    }

    /// Lengths a query of type `t` may have in `split`.
    pub fn window(&self, split: Split, t: InferenceType) -> Option<Window> {
        match split {
            Split::Train | Split::Val => self.train_window(t),
            Split::Test => self.test_window(t),
        }
    }

    /// Lengths study pairs may have.
    pub fn support_window(&self, split: Split, t: InferenceType, alignment: Alignment) -> Option<Window> {
        if self.experiment == Experiment::Core {
            return Some(ANY_LENGTH);
        }
        match (split, alignment) {
            (Split::Test, Alignment::Aligned) => self.test_window(t),
            (Split::Test, Alignment::Disaligned) => self.train_window(t),
            (Split::Test, Alignment::NotApplicable) => None,
            _ => self.train_window(t),
        }
    }

    /// Alignments built for `split`; each test query gets one episode per
    /// alignment in the length experiments.
    pub fn alignments(&self, split: Split) -> &'static [Alignment] {
        match (self.experiment, split) {
            (Experiment::Core, _) | (_, Split::Train | Split::Val) => &[Alignment::NotApplicable],
            (_, Split::Test) => &[Alignment::Aligned, Alignment::Disaligned],
        }
    }

    /// Every (type, length) cell with a quota in `split`, type-major.
    pub fn cells(&self, split: Split) -> Vec<(InferenceType, usize)> {
        InferenceType::ALL
            .into_iter()
            .filter_map(|t| self.window(split, t).map(|w| (t, w)))
            .flat_map(|(t, (lo, hi))| (lo..=hi.min(MAX_GRID_LENGTH)).map(move |l| (t, l)))
            .collect()
    }
}

/// One abstract inference under one surface variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Datapoint {
    /// Index into the split's knowledge bases.
    pub kb: usize,
    pub variant: u8,
    pub inference: MinimalInference,
}

pub type StudyPair = MinimalInference;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Episode {
    pub id: String,
    pub experiment: Experiment,
    pub split: Split,
    pub alignment: Alignment,
    pub kb: usize,
    pub variant: u8,
    pub study: Vec<StudyPair>,
    pub query: MinimalInference,
}

impl Episode {
    pub fn pairs(&self) -> impl Iterator<Item = &MinimalInference> {
        self.study.iter().chain(core::iter::once(&self.query))
    }
}

/// Surface-level identity of a hypothesis-premises pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaselinePair {
    pub kb_id: String,
    pub variant: u8,
    pub hypothesis: Formula,
    pub premises: PremiseSet,
}

impl BaselinePair {
    fn of(kb: &KnowledgeBase, variant: u8, inf: &MinimalInference) -> Self {
        BaselinePair { kb_id: kb.id().into(), variant, hypothesis: inf.conclusion, premises: inf.premises.clone() }
    }
}

/// Deduplicated union of every study and query pair.
pub fn flatten_to_baseline<'a>(
    kbs: &[KnowledgeBase],
    episodes: impl IntoIterator<Item = &'a Episode>,
) -> BTreeSet<BaselinePair> {
    episodes.into_iter().flat_map(|e| e.pairs().map(move |p| BaselinePair::of(&kbs[e.kb], e.variant, p))).collect()
}

pub fn baseline_pairs<'a>(
    kbs: &[KnowledgeBase],
    datapoints: impl IntoIterator<Item = &'a Datapoint>,
) -> BTreeSet<BaselinePair> {
    datapoints.into_iter().map(|d| BaselinePair::of(&kbs[d.kb], d.variant, &d.inference)).collect()
}

/// Draws [`STUDY_SIZE`] distinct pool entries of the query's type whose length
/// lies in `window`, never the query itself. Returns indices into `pool`.
pub fn pick_support(
    query: &MinimalInference,
    pool: &[MinimalInference],
    window: Window,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let eligible: Vec<usize> = pool
        .iter()
        .enumerate()
        .filter(|(_, p)| p.itype == query.itype && in_window(window, p.length) && p.conclusion != query.conclusion)
        .map(|(i, _)| i)
        .collect();
    if eligible.len() < STUDY_SIZE {
        return None;
    }
    let mut picked: Vec<usize> = sample(rng, eligible.len(), STUDY_SIZE).into_iter().map(|i| eligible[i]).collect();
    picked.sort_unstable();
    Some(picked)
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellFill {
    pub itype: u8,
    pub length: usize,
    pub quota: usize,
    pub filled: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BuildReport {
    pub experiment: Experiment,
    pub split: Split,
    pub kbs_drawn: usize,
    pub kbs_used: usize,
    pub generator: GenReport,
    pub cells: Vec<CellFill>,
    /// Selected query datapoints.
    pub queries: usize,
    pub episodes: usize,
    /// Total missing datapoints over all cells.
    pub shortfall: usize,
    /// Training only: size of the baseline set and of the flattened episodes.
    pub baseline_pairs: Option<usize>,
    pub flattened_pairs: Option<usize>,
    pub baseline_equal: Option<bool>,
}

impl BuildReport {
    pub fn is_complete(&self) -> bool {
        self.shortfall == 0 && self.baseline_equal != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("invalid split config: {0}")]
    Config(String),
}

/// Output of one split build.
#[derive(Clone, Debug)]
pub struct BuiltSplit {
    pub spec: SplitSpec,
    pub split: Split,
    /// Knowledge bases referenced by the episodes, in draw order.
    pub kbs: Vec<KnowledgeBase>,
    /// Query datapoints in selection order.
    pub queries: Vec<Datapoint>,
    pub episodes: Vec<Episode>,
    pub report: BuildReport,
}

impl BuiltSplit {
    pub fn baseline(&self) -> BTreeSet<BaselinePair> {
        baseline_pairs(&self.kbs, &self.queries)
    }
}

const N_CELLS: usize = 7 * (MAX_GRID_LENGTH + 1);

fn cell_id(t: InferenceType, len: usize) -> usize {
    t.index() * (MAX_GRID_LENGTH + 1) + len
}

/// Per-cell remaining quota; cells outside the split have none.
fn quotas(spec: &SplitSpec, split: Split) -> Vec<usize> {
    let mut q = vec![0; N_CELLS];
    for (t, l) in spec.cells(split) {
        q[cell_id(t, l)] = spec.quota(split);
    }
    q
}

/// Cell of an inference if it lies inside the split's query windows.
fn query_cell(spec: &SplitSpec, split: Split, inf: &MinimalInference) -> Option<usize> {
    let w = spec.window(split, inf.itype)?;
    (inf.length <= MAX_GRID_LENGTH && in_window(w, inf.length)).then(|| cell_id(inf.itype, inf.length))
}

/// Training selection over (knowledge base, variant, type) units. A unit is
/// either unused or holds at least `STUDY_SIZE + 1` selected inferences, so
/// every selected query finds its study pairs among the other selections.
struct GroupSelector {
    remaining: Vec<usize>,
    open: usize,
    units: Vec<Unit>,
    /// Selected `(unit, position)` per cell, possibly stale.
    holders: Vec<Vec<(usize, usize)>>,
}

struct Unit {
    kb: usize,
    variant: u8,
    /// `(inference index, cell)`.
    items: Vec<(usize, usize)>,
    selected: Vec<bool>,
    count: usize,
}

const MIN_UNIT: usize = STUDY_SIZE + 1;

impl GroupSelector {
    fn new(remaining: Vec<usize>) -> Self {
        let open = remaining.iter().sum();
        GroupSelector { remaining, open, units: Vec::new(), holders: vec![Vec::new(); N_CELLS] }
    }

    fn is_done(&self) -> bool {
        self.open == 0
    }

    /// Takes one selected item of `cell` away from a unit that can spare it.
    fn steal(&mut self, cell: usize, log: &mut Vec<(usize, usize)>) -> bool {
        while let Some(&(u, p)) = self.holders[cell].last() {
            let unit = &mut self.units[u];
            if !unit.selected[p] || unit.count <= MIN_UNIT {
                self.holders[cell].pop();
                continue;
            }
            unit.selected[p] = false;
            unit.count -= 1;
            self.holders[cell].pop();
            log.push((u, p));
            return true;
        }
        false
    }

    fn undo(&mut self, log: Vec<(usize, usize)>) {
        for (u, p) in log.into_iter().rev() {
            let unit = &mut self.units[u];
            unit.selected[p] = true;
            unit.count += 1;
            let cell = unit.items[p].1;
            self.holders[cell].push((u, p));
        }
    }

    fn offer(&mut self, kb: usize, variant: u8, items: Vec<(usize, usize)>) {
        if items.len() < MIN_UNIT {
            return;
        }
        let mut take = vec![false; items.len()];
        let mut used: Vec<(usize, usize)> = Vec::new();
        let mut n = 0;
        for (pos, &(_, cell)) in items.iter().enumerate() {
            let taken = used.iter().find(|(c, _)| *c == cell).map_or(0, |(_, k)| *k);
            if self.remaining[cell] > taken {
                take[pos] = true;
                n += 1;
                match used.iter_mut().find(|(c, _)| *c == cell) {
                    Some((_, k)) => *k += 1,
                    None => used.push((cell, 1)),
                }
            }
        }
        if n == 0 {
            return;
        }
        let mut log = Vec::new();
        for pos in 0..items.len() {
            if n + log.len() >= MIN_UNIT {
                break;
            }
            if !take[pos] && self.steal(items[pos].1, &mut log) {
                take[pos] = true;
            }
        }
        if n + log.len() < MIN_UNIT {
            self.undo(log);
            return;
        }
        let u = self.units.len();
        for (pos, &(_, cell)) in items.iter().enumerate() {
            if take[pos] {
                self.holders[cell].push((u, pos));
            }
        }
        for (cell, k) in used {
            self.remaining[cell] -= k;
            self.open -= k;
        }
        let count = n + log.len();
        self.units.push(Unit { kb, variant, items, selected: take, count });
    }
}

/// Builds splits for one experiment from purpose-specific knowledge-base
/// streams.
#[derive(Clone, Debug)]
pub struct EpisodeBuilder {
    pub spec: SplitSpec,
    pub gen: GenConfig,
}

impl EpisodeBuilder {
    pub fn new(spec: SplitSpec, gen: GenConfig) -> Self {
        EpisodeBuilder { spec, gen }
    }

    fn check(&self) -> Result<(), BuildError> {
        for (i, &(lo, hi)) in self.spec.windows.iter().enumerate() {
            if lo > hi || hi > MAX_GRID_LENGTH {
                return Err(BuildError::Config(format!("window of type {} is [{lo}, {hi}]", i + 1)));
            }
        }
        if self.spec.variants == 0 || self.spec.variants > N_VARIANTS {
            return Err(BuildError::Config(format!("variants must lie in 1..={N_VARIANTS}")));
        }
        Ok(())
    }

    fn kb_stream(&self, split: Split) -> Result<KbStream, BuildError> {
        let mut cfg = self.gen.clone();
        cfg.target_premises = split.default_premises();
        Ok(KbStream::new(cfg, split)?)
    }

    fn study_rng(&self, split: Split, index: usize) -> ChaCha8Rng {
        let label = format!("study/{}/{}", self.spec.experiment.as_str(), split.as_str());
        stream(self.gen.seed, &label, index as u64)
    }

    fn episode_id(&self, split: Split, alignment: Alignment, index: usize) -> String {
        let exp = self.spec.experiment.as_str();
        match alignment {
            Alignment::NotApplicable => format!("{exp}-{}-{index:07}", split.as_str()),
            a => format!("{exp}-{}-{}-{index:07}", split.as_str(), a.as_str()),
        }
    }

    pub fn build(&self, split: Split) -> Result<BuiltSplit, BuildError> {
        self.check()?;
        match split {
            Split::Train => self.build_train(),
            _ => self.build_eval(split),
        }
    }

    fn report(&self, split: Split, remaining: &[usize], kbs: &KbStream, used: usize) -> BuildReport {
        let quota = self.spec.quota(split);
        let cells: Vec<CellFill> = self
            .spec
            .cells(split)
            .into_iter()
            .map(|(t, l)| CellFill { itype: t.number(), length: l, quota, filled: quota - remaining[cell_id(t, l)] })
            .collect();
        BuildReport {
            experiment: self.spec.experiment,
            split,
            kbs_drawn: kbs.emitted(),
            kbs_used: used,
            generator: kbs.report().clone(),
            queries: cells.iter().map(|c| c.filled).sum(),
            shortfall: remaining.iter().sum(),
            cells,
            episodes: 0,
            baseline_pairs: None,
            flattened_pairs: None,
            baseline_equal: None,
        }
    }

    fn build_train(&self) -> Result<BuiltSplit, BuildError> {
        let split = Split::Train;
        let mut sel = GroupSelector::new(quotas(&self.spec, split));
        let mut stream = self.kb_stream(split)?;
        let mut kbs: Vec<KnowledgeBase> = Vec::new();
        let mut infs: Vec<Vec<MinimalInference>> = Vec::new();
        while !sel.is_done() && stream.emitted() < self.spec.max_kbs {
            let kb = stream.next_kb()?;
            let all = enumerate_inferences(&kb)?;
            let k = kbs.len();
            let before = sel.units.len();
            for t in InferenceType::ALL {
                let items: Vec<(usize, usize)> = all
                    .iter()
                    .enumerate()
                    .filter(|(_, inf)| inf.itype == t)
                    .filter_map(|(i, inf)| query_cell(&self.spec, split, inf).map(|c| (i, c)))
                    .collect();
                for v in 0..self.spec.variants {
                    if sel.is_done() {
                        break;
                    }
                    sel.offer(k, v, items.clone());
                }
            }
            if sel.units.len() > before {
                kbs.push(kb);
                infs.push(all);
            }
        }

        let mut queries = Vec::new();
        let mut episodes = Vec::new();
        for unit in &sel.units {
            let pool: Vec<MinimalInference> = unit
                .items
                .iter()
                .zip(&unit.selected)
                .filter(|(_, s)| **s)
                .map(|((i, _), _)| infs[unit.kb][*i].clone())
                .collect();
            for q in &pool {
                let mut rng = self.study_rng(split, episodes.len());
                let picked =
                    pick_support(q, &pool, ANY_LENGTH, &mut rng).expect("every used unit holds enough selections");
                let idx = episodes.len();
                episodes.push(Episode {
                    id: self.episode_id(split, Alignment::NotApplicable, idx),
                    experiment: self.spec.experiment,
                    split,
                    alignment: Alignment::NotApplicable,
                    kb: unit.kb,
                    variant: unit.variant,
                    study: picked.into_iter().map(|i| pool[i].clone()).collect(),
                    query: q.clone(),
                });
                queries.push(Datapoint { kb: unit.kb, variant: unit.variant, inference: q.clone() });
            }
        }

        let mut report = self.report(split, &sel.remaining, &stream, kbs.len());
        let baseline = baseline_pairs(&kbs, &queries);
        let flat = flatten_to_baseline(&kbs, &episodes);
        report.episodes = episodes.len();
        report.baseline_pairs = Some(baseline.len());
        report.flattened_pairs = Some(flat.len());
        report.baseline_equal = Some(baseline == flat);
        Ok(BuiltSplit { spec: self.spec.clone(), split, kbs, queries, episodes, report })
    }

    fn build_eval(&self, split: Split) -> Result<BuiltSplit, BuildError> {
        let mut remaining = quotas(&self.spec, split);
        let mut open: usize = remaining.iter().sum();
        let alignments = self.spec.alignments(split);
        let mut stream = self.kb_stream(split)?;
        let mut kbs = Vec::new();
        let mut queries = Vec::new();
        // (datapoint index, alignment, support indices into the kb's inferences)
        let mut planned: Vec<(usize, Alignment, Vec<usize>)> = Vec::new();
        let mut infs_kept: Vec<Vec<MinimalInference>> = Vec::new();
        while open > 0 && stream.emitted() < self.spec.max_kbs {
            let kb = stream.next_kb()?;
            let all = enumerate_inferences(&kb)?;
            let k = kbs.len();
            let mut used = false;
            for inf in &all {
                let Some(cell) = query_cell(&self.spec, split, inf) else { continue };
                if remaining[cell] == 0 {
                    continue;
                }
                let windows: Option<Vec<Window>> =
                    alignments.iter().map(|&a| self.spec.support_window(split, inf.itype, a)).collect();
                let Some(windows) = windows else { continue };
                let enough = windows.iter().all(|&w| {
                    all.iter()
                        .filter(|p| p.itype == inf.itype && in_window(w, p.length) && p.conclusion != inf.conclusion)
                        .nth(STUDY_SIZE - 1)
                        .is_some()
                });
                if !enough {
                    continue;
                }
                for v in 0..self.spec.variants {
                    if remaining[cell] == 0 {
                        break;
                    }
                    remaining[cell] -= 1;
                    open -= 1;
                    used = true;
                    let d = queries.len();
                    queries.push(Datapoint { kb: k, variant: v, inference: inf.clone() });
                    for (&a, &w) in alignments.iter().zip(&windows) {
                        let mut rng = self.study_rng(split, planned.len());
                        let picked = pick_support(inf, &all, w, &mut rng).expect("support pool was checked");
                        planned.push((d, a, picked));
                    }
                }
            }
            if used {
                kbs.push(kb);
                infs_kept.push(all);
            }
        }

        let mut counters = [0usize; 3];
        let episodes: Vec<Episode> = planned
            .into_iter()
            .map(|(d, a, picked)| {
                let q = &queries[d];
                let slot = a as usize;
                let id = self.episode_id(split, a, counters[slot]);
                counters[slot] += 1;
                Episode {
                    id,
                    experiment: self.spec.experiment,
                    split,
                    alignment: a,
                    kb: q.kb,
                    variant: q.variant,
                    study: picked.into_iter().map(|i| infs_kept[q.kb][i].clone()).collect(),
                    query: q.inference.clone(),
                }
            })
            .collect();
        let mut report = self.report(split, &remaining, &stream, kbs.len());
        report.episodes = episodes.len();
        Ok(BuiltSplit { spec: self.spec.clone(), split, kbs, queries, episodes, report })
    }
}

/// Term names and premise order of one surface variant.
pub fn variant_surface(
    seed: u64,
    kb: &KnowledgeBase,
    variant: u8,
    vocab: &Vocabulary,
) -> Result<(Assignment, Vec<usize>), RenderError> {
    let (a, p) = (variant / N_PERMUTATIONS, variant % N_PERMUTATIONS);
    let mut rng = stream(seed, &format!("assign/{}", kb.id()), u64::from(a));
    let asg = Assignment::random(vocab, kb.n_terms(), &mut rng)?;
    let mut rng = stream(seed, &format!("perm/{}", kb.id()), u64::from(p));
    Ok((asg, permutation(kb.premises().len(), &mut rng)))
}

/// Abstract text structure of an episode under a given premise order.
pub fn episode_text(kb: &KnowledgeBase, ep: &Episode, perm: &[usize]) -> Result<EpisodeText, RenderError> {
    let dp = |inf: &MinimalInference| datapoint_text(kb, &inf.conclusion, &inf.premises, perm);
    let q = dp(&ep.query)?;
    let study = ep.study.iter().map(|s| dp(s).map(|d| (d.hypothesis, d.gold))).collect::<Result<Vec<_>, _>>()?;
    Ok(EpisodeText { premises: q.premises, study, hypothesis: q.hypothesis, gold: q.gold })
}

pub fn render_episode_variant(
    seed: u64,
    kb: &KnowledgeBase,
    ep: &Episode,
    vocab: &Vocabulary,
) -> Result<Rendered, RenderError> {
    let (asg, perm) = variant_surface(seed, kb, ep.variant, vocab)?;
    render_episode(&episode_text(kb, ep, &perm)?, &asg)
}

pub fn render_baseline_variant(
    seed: u64,
    kb: &KnowledgeBase,
    variant: u8,
    inf: &MinimalInference,
    vocab: &Vocabulary,
) -> Result<Rendered, RenderError> {
    let (asg, perm) = variant_surface(seed, kb, variant, vocab)?;
    render_datapoint(&datapoint_text(kb, &inf.conclusion, &inf.premises, &perm)?, &asg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: u8) -> InferenceType {
        InferenceType::new(n).unwrap()
    }

    #[test]
    fn windows_per_experiment() {
        let core = SplitSpec::new(Experiment::Core);
        assert_eq!(core.cells(Split::Train).len(), 97);
        assert_eq!(core.cells(Split::Test).len(), 97);
        let s2l = SplitSpec::new(Experiment::ShortToLong);
        assert_eq!(s2l.window(Split::Train, t(2)), Some((1, 5)));
        assert_eq!(s2l.window(Split::Test, t(2)), Some((6, 10)));
        assert_eq!(s2l.cells(Split::Train).len(), 62);
        assert_eq!(s2l.cells(Split::Test).len(), 35);
        let l2s = SplitSpec::new(Experiment::LongToShort);
        assert_eq!(l2s.window(Split::Train, t(3)), Some((5, 19)));
        assert_eq!(l2s.window(Split::Test, t(3)), Some((0, 4)));
        assert_eq!(l2s.support_window(Split::Test, t(3), Alignment::Aligned), Some((0, 4)));
        assert_eq!(l2s.support_window(Split::Test, t(3), Alignment::Disaligned), Some((5, 19)));
        assert_eq!(l2s.cells(Split::Train).len(), 62);
        assert_eq!(SplitSpec::new(Experiment::Core).limited().train_quota, 100);
    }

    #[test]
    fn flatten_dedups() {
        let kb = KnowledgeBase::new("k", 4, vec![Formula::a(0, 1), Formula::a(1, 2), Formula::a(2, 3)]).unwrap();
        let infs = enumerate_inferences(&kb).unwrap();
        let ep = |q: usize, s: [usize; 3]| Episode {
            id: String::new(),
            experiment: Experiment::Core,
            split: Split::Train,
            alignment: Alignment::NotApplicable,
            kb: 0,
            variant: 0,
            study: s.iter().map(|&i| infs[i].clone()).collect(),
            query: infs[q].clone(),
        };
        let kbs = [kb.clone()];
        assert_eq!(flatten_to_baseline(&kbs, [&ep(0, [1, 2, 3])]).len(), 4);
        assert_eq!(flatten_to_baseline(&kbs, [&ep(0, [1, 2, 3]), &ep(4, [1, 5, 0])]).len(), 6);
    }
}
