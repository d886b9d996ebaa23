//! Two-stage random knowledge-base generator.
//!
//! Stage one grows disjoint out-trees of A-premises (the backbone). Stage two
//! shuffles every admissible E, I and O edge and accepts candidates greedily,
//! keeping only those that leave the knowledge base consistent and
//! non-redundant, until the per-quantifier quotas are met.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::inference::{enumerate_inferences, hypothesis_space, MAX_GRID_LENGTH};
use crate::logic::{Formula, KnowledgeBase, Quantifier, Reasoner};
use crate::rng::stream;

/// Inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub min: u32,
    pub max: u32,
}

impl Span {
    pub const fn new(min: u32, max: u32) -> Self {
        Span { min, max }
    }

    pub fn contains(self, v: u32) -> bool {
        self.min <= v && v <= self.max
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> u32 {
        rng.gen_range(self.min..=self.max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Purpose {
    Train,
    Val,
    Test,
}

impl Purpose {
    pub const ALL: [Purpose; 3] = [Purpose::Train, Purpose::Val, Purpose::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Train => "train",
            Purpose::Val => "val",
            Purpose::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Purpose> {
        Purpose::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Premise-count window used for this split by default.
    pub fn default_premises(self) -> Span {
        match self {
            Purpose::Train => Span::new(26, 35),
            Purpose::Val => Span::new(26, 36),
            Purpose::Test => Span::new(26, 38),
        }
    }
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenConfig {
    pub seed: u64,
    pub n_trees: Span,
    /// Nodes per tree.
    pub tree_size: Span,
    /// Longest root-to-leaf path, in A-edges.
    pub max_chain_len: u32,
    /// Probability that a new node extends the most recently added node
    /// rather than a uniformly chosen one.
    pub chain_bias: f64,
    pub n_e: Span,
    pub n_i: Span,
    pub n_o: Span,
    /// Depth window for both endpoints of an E edge.
    pub e_depth: Span,
    /// Depth window for both endpoints of an I edge.
    pub i_depth: Span,
    /// Allowed depth difference between an O edge's subject and the
    /// ancestor it points to.
    pub o_gap: Span,
    pub target_premises: Span,
    /// Longest allowed minimal inference, in A-premises; knowledge bases
    /// with a longer one are rejected.
    pub max_length: u32,
    /// Backbone retries before giving up on a size split.
    pub max_backbone_retries: u32,
}

impl GenConfig {
    pub fn for_purpose(purpose: Purpose, seed: u64) -> Self {
        GenConfig {
            seed,
            n_trees: Span::new(2, 2),
            tree_size: Span::new(8, 20),
            max_chain_len: 10,
            chain_bias: 0.75,
            n_e: Span::new(1, 1),
            n_i: Span::new(1, 1),
            n_o: Span::new(3, 3),
            e_depth: Span::new(0, 10),
            i_depth: Span::new(0, 10),
            o_gap: Span::new(1, 10),
            target_premises: purpose.default_premises(),
            max_length: MAX_GRID_LENGTH as u32,
            max_backbone_retries: 64,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let spans = [
            ("n_trees", self.n_trees),
            ("tree_size", self.tree_size),
            ("n_e", self.n_e),
            ("n_i", self.n_i),
            ("n_o", self.n_o),
            ("target_premises", self.target_premises),
        ];
        if let Some((name, _)) = spans.iter().find(|(_, s)| s.min > s.max) {
            return Err(GenError::Config(format!("{name} is an empty range")));
        }
        if self.n_trees.min == 0 || self.tree_size.min < 2 || self.max_chain_len == 0 {
            return Err(GenError::Config("trees need at least two nodes and depth one".into()));
        }
        if !(0.0..=1.0).contains(&self.chain_bias) {
            return Err(GenError::Config("chain_bias must lie in [0, 1]".into()));
        }
        let extra_min = self.n_e.min + self.n_i.min + self.n_o.min;
        let extra_max = self.n_e.max + self.n_i.max + self.n_o.max;
        let a_min = self.n_trees.min * (self.tree_size.min - 1) + extra_min;
        let a_max = self.n_trees.max * (self.tree_size.max - 1) + extra_max;
        if a_max < self.target_premises.min || a_min > self.target_premises.max {
            return Err(GenError::Config("target_premises unreachable from tree and edge ranges".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("gave up after {attempts} attempts with {emitted} of {requested} knowledge bases")]
    Exhausted { attempts: u64, emitted: usize, requested: usize },
}

/// Why one generation attempt was discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    Backbone,
    Consistency,
    Redundancy,
    Length,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenReport {
    pub attempts: u64,
    pub kbs_emitted: u64,
    pub kbs_rejected_backbone: u64,
    pub kbs_rejected_consistency: u64,
    pub kbs_rejected_redundancy: u64,
    pub kbs_rejected_length: u64,
    /// `(premise count, number of knowledge bases)`, ascending.
    pub premise_histogram: Vec<(u32, u64)>,
}

impl GenReport {
    pub fn record(&mut self, outcome: &Result<KnowledgeBase, Rejection>) {
        self.attempts += 1;
        match outcome {
            Ok(kb) => {
                self.kbs_emitted += 1;
                let n = kb.premises().len() as u32;
                match self.premise_histogram.binary_search_by_key(&n, |&(k, _)| k) {
                    Ok(i) => self.premise_histogram[i].1 += 1,
                    Err(i) => self.premise_histogram.insert(i, (n, 1)),
                }
            }
            Err(Rejection::Backbone) => self.kbs_rejected_backbone += 1,
            Err(Rejection::Consistency) => self.kbs_rejected_consistency += 1,
            Err(Rejection::Redundancy) => self.kbs_rejected_redundancy += 1,
            Err(Rejection::Length) => self.kbs_rejected_length += 1,
        }
    }
}

/// Parent of every node (`None` for roots) plus tree membership and depth.
#[derive(Clone, Debug)]
pub struct Forest {
    pub parent: Vec<Option<u32>>,
    pub tree: Vec<u32>,
    pub depth: Vec<u32>,
}

impl Forest {
    pub fn n_terms(&self) -> u32 {
        self.parent.len() as u32
    }

    /// True iff `anc` lies on the path from the root to `node` (inclusive).
    pub fn is_ancestor(&self, anc: u32, node: u32) -> bool {
        let mut cur = Some(node);
        while let Some(c) = cur {
            if c == anc {
                return true;
            }
            cur = self.parent[c as usize];
        }
        false
    }

    pub fn a_premises(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> =
            self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| Formula::a(p, c as u32))).collect();
        out.sort_by_key(|f| (f.subj, f.obj));
        out
    }
}

/// Splits `total` into `parts` values inside `span` by handing out units one
/// at a time to random parts with room left.
fn split_sizes(rng: &mut ChaCha8Rng, total: u32, parts: u32, span: Span) -> Option<Vec<u32>> {
    if total < parts * span.min || total > parts * span.max {
        return None;
    }
    let mut sizes = vec![span.min; parts as usize];
    let mut rest = total - parts * span.min;
    while rest > 0 {
        let i = rng.gen_range(0..parts as usize);
        if sizes[i] < span.max {
            sizes[i] += 1;
            rest -= 1;
        }
    }
    Some(sizes)
}

/// Grows one tree of `size` nodes with depth at most `max_depth`.
fn grow_tree(rng: &mut ChaCha8Rng, size: u32, max_depth: u32, bias: f64) -> (Vec<Option<u32>>, Vec<u32>) {
    let mut parent = vec![None];
    let mut depth = vec![0u32];
    for node in 1..size {
        let last = node - 1;
        let p = if depth[last as usize] < max_depth && rng.gen_bool(bias) {
            last
        } else {
            let open: Vec<u32> = (0..node).filter(|&v| depth[v as usize] < max_depth).collect();
            *open.choose(rng).expect("root always has room")
        };
        parent.push(Some(p));
        depth.push(depth[p as usize] + 1);
    }
    (parent, depth)
}

/// Stage one: a forest of `n_a` A-edges. Trees occupy contiguous id blocks,
/// each numbered in creation order from its root.
pub fn gen_backbone(cfg: &GenConfig, n_a: u32, rng: &mut ChaCha8Rng) -> Result<Forest, Rejection> {
    for _ in 0..cfg.max_backbone_retries.max(1) {
        let k = cfg.n_trees.sample(rng);
        // n_a edges over k trees means n_a + k nodes.
        let Some(sizes) = split_sizes(rng, n_a + k, k, cfg.tree_size) else {
            continue;
        };
        let mut f = Forest { parent: Vec::new(), tree: Vec::new(), depth: Vec::new() };
        for (t, &size) in sizes.iter().enumerate() {
            let offset = f.parent.len() as u32;
            let (parent, depth) = grow_tree(rng, size, cfg.max_chain_len, cfg.chain_bias);
            f.parent.extend(parent.into_iter().map(|p| p.map(|p| p + offset)));
            f.depth.extend(depth);
            f.tree.extend(core::iter::repeat_n(t as u32, size as usize));
        }
        return Ok(f);
    }
    Err(Rejection::Backbone)
}

/// Every derivable hypothesis has exactly one minimal premise set.
pub fn check_nonredundant(kb: &KnowledgeBase) -> bool {
    let Ok(r) = Reasoner::new(kb) else {
        return false;
    };
    nonredundant_with(&r)
}

fn nonredundant_with(r: &Reasoner<'_>) -> bool {
    hypothesis_space(r.kb().n_terms()).all(|h| match r.entails(&h) {
        Ok(false) => true,
        Ok(true) => r.minimal_sets(&h).is_ok_and(|s| s.len() == 1),
        Err(_) => false,
    })
}

/// Admissible positions for the extra edges: E and I join two trees, O points
/// from a node to one of its proper ancestors.
fn candidates(forest: &Forest, cfg: &GenConfig) -> Vec<Formula> {
    let n = forest.n_terms();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let cross = forest.tree[x as usize] != forest.tree[y as usize];
            let both = |w: Span| w.contains(forest.depth[x as usize]) && w.contains(forest.depth[y as usize]);
            if cross && x < y && both(cfg.e_depth) {
                out.push(Formula::e(x, y));
            }
            if cross && x < y && both(cfg.i_depth) {
                out.push(Formula::i(x, y));
            }
            let gap = forest.depth[x as usize].wrapping_sub(forest.depth[y as usize]);
            if cfg.o_gap.contains(gap) && forest.is_ancestor(y, x) {
                out.push(Formula::o(x, y));
            }
        }
    }
    out
}

/// Stage two: greedy E/I/O insertion under the consistency and
/// non-redundancy filters.
pub fn add_existential_edges(
    cfg: &GenConfig,
    forest: &Forest,
    quotas: [(Quantifier, u32); 3],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Formula>, Rejection> {
    let mut cands = candidates(forest, cfg);
    cands.shuffle(rng);
    let mut premises = forest.a_premises();
    let mut need: Vec<(Quantifier, u32)> = quotas.to_vec();
    let mut last_failure = Rejection::Consistency;
    for c in cands {
        let Some(slot) = need.iter_mut().find(|(q, _)| *q == c.q) else {
            continue;
        };
        if slot.1 == 0 {
            continue;
        }
        premises.push(c);
        let kb = KnowledgeBase::new("", forest.n_terms(), premises.clone()).expect("candidates are well formed");
        let r = Reasoner::unchecked(&kb);
        if !r.is_consistent() {
            last_failure = Rejection::Consistency;
            premises.pop();
        } else if !nonredundant_with(&r) {
            last_failure = Rejection::Redundancy;
            premises.pop();
        } else {
            slot.1 -= 1;
            if need.iter().all(|(_, k)| *k == 0) {
                return Ok(premises);
            }
        }
    }
    if need.iter().all(|(_, k)| *k == 0) {
        Ok(premises)
    } else {
        Err(last_failure)
    }
}

/// One full attempt, driven entirely by `rng`.
pub fn gen_kb(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<KnowledgeBase, Rejection> {
    let total = cfg.target_premises.sample(rng);
    let (ne, ni, no) = (cfg.n_e.sample(rng), cfg.n_i.sample(rng), cfg.n_o.sample(rng));
    let n_a = total.checked_sub(ne + ni + no).ok_or(Rejection::Backbone)?;
    let forest = gen_backbone(cfg, n_a, rng)?;
    let premises =
        add_existential_edges(cfg, &forest, [(Quantifier::E, ne), (Quantifier::I, ni), (Quantifier::O, no)], rng)?;
    let kb = KnowledgeBase::new("", forest.n_terms(), premises).expect("generated premises are well formed");
    let longest = enumerate_inferences(&kb).map_err(|_| Rejection::Redundancy)?.iter().map(|i| i.length).max();
    if longest.unwrap_or(0) > cfg.max_length as usize {
        return Err(Rejection::Length);
    }
    Ok(kb)
}

/// Attempt number `attempt` for a split; its random stream depends only on
/// the seed, the purpose and the attempt number.
pub fn gen_attempt(cfg: &GenConfig, purpose: Purpose, attempt: u64) -> Result<KnowledgeBase, Rejection> {
    let mut rng = stream(cfg.seed, &format!("kbgen/{}", purpose.as_str()), attempt);
    gen_kb(cfg, &mut rng)
}

pub fn kb_id(purpose: Purpose, index: usize) -> String {
    format!("{}-{:06}", purpose.as_str(), index)
}

/// Consecutive rejected attempts after which a stream gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1000;

/// Resumable, deterministic source of knowledge bases for one purpose.
///
/// Attempt `k` always uses the same random stream, so the first `n` items of
/// any two streams with equal config and purpose coincide.
#[derive(Clone, Debug)]
pub struct KbStream {
    cfg: GenConfig,
    purpose: Purpose,
    attempt: u64,
    emitted: usize,
    report: GenReport,
}

impl KbStream {
    pub fn new(cfg: GenConfig, purpose: Purpose) -> Result<Self, GenError> {
        cfg.validate()?;
        Ok(KbStream { cfg, purpose, attempt: 0, emitted: 0, report: GenReport::default() })
    }

    pub fn next_kb(&mut self) -> Result<KnowledgeBase, GenError> {
        let start = self.attempt;
        loop {
            if self.attempt - start >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(GenError::Exhausted {
                    attempts: self.attempt,
                    emitted: self.emitted,
                    requested: self.emitted + 1,
                });
            }
            let outcome = gen_attempt(&self.cfg, self.purpose, self.attempt);
            self.report.record(&outcome);
            self.attempt += 1;
            if let Ok(kb) = outcome {
                let id = kb_id(self.purpose, self.emitted);
                self.emitted += 1;
                return Ok(kb.with_id(id));
            }
        }
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn report(&self) -> &GenReport {
        &self.report
    }
}

/// The first `count` knowledge bases of the purpose's stream.
pub fn gen_kbs(cfg: &GenConfig, count: usize, purpose: Purpose) -> Result<(Vec<KnowledgeBase>, GenReport), GenError> {
    let mut stream = KbStream::new(cfg.clone(), purpose)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        match stream.next_kb() {
            Ok(kb) => out.push(kb),
            Err(GenError::Exhausted { attempts, emitted, .. }) => {
                return Err(GenError::Exhausted { attempts, emitted, requested: count })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((out, stream.report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn small_backbone_is_a_chain_forest() {
        let mut cfg = GenConfig::for_purpose(Purpose::Train, 1);
        cfg.n_trees = Span::new(1, 1);
        cfg.tree_size = Span::new(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = gen_backbone(&cfg, 2, &mut rng).unwrap();
        assert_eq!(f.a_premises().len(), 2);
        assert_eq!(f.parent[0], None);
    }

    #[test]
    fn antilogism_edge_is_rejected() {
        let kb = KnowledgeBase::new("", 3, vec![Formula::a(0, 1), Formula::a(0, 2)]).unwrap();
        let with = kb.with_premise(Formula::e(1, 2)).unwrap();
        assert!(!crate::consistent_syntactic(&with));
        let kb = KnowledgeBase::new("", 3, vec![Formula::a(0, 1), Formula::o(0, 2)]).unwrap();
        assert!(crate::consistent_syntactic(&kb) && check_nonredundant(&kb));
    }

    #[test]
    fn redundancy_examples() {
        let tri = KnowledgeBase::new("", 3, vec![Formula::a(0, 1), Formula::a(1, 2), Formula::a(0, 2)]).unwrap();
        assert!(!check_nonredundant(&tri));
        let chain = KnowledgeBase::new("", 3, vec![Formula::a(0, 1), Formula::a(1, 2)]).unwrap();
        assert!(check_nonredundant(&chain));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::for_purpose(Purpose::Train, 9);
        let (a, ra) = gen_kbs(&cfg, 3, Purpose::Train).unwrap();
        let (b, rb) = gen_kbs(&cfg, 3, Purpose::Train).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a[2].id(), "train-000002");
    }

    #[test]
    fn length_cap_rejects_long_inferences() {
        let mut cfg = GenConfig::for_purpose(Purpose::Train, 3);
        cfg.max_length = 12;
        let (kbs, rep) = gen_kbs(&cfg, 20, Purpose::Train).unwrap();
        assert!(rep.kbs_rejected_length > 0);
        for kb in &kbs {
            assert!(enumerate_inferences(kb).unwrap().iter().all(|i| i.length <= 12));
        }
    }
}
