//! Textual form of knowledge bases, datapoints and episodes, and the parsers
//! that read it back.
//!
//! Layout, with single spaces and `", "` between premises:
//!
//! ```text
//! knowledge base: P1, P2, ... <QUERY> hypothesis: H premises: G1, G2
//! knowledge base: P1, ... <STUDY> hypothesis: H premises: S1, S2; <repeated x3> <QUERY> hypothesis: H premises: G1
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::logic::{Formula, KnowledgeBase, Quantifier, Term};
use crate::premise_set::PremiseSet;

pub const KB_TAG: &str = "knowledge base:";
pub const STUDY_TAG: &str = "<STUDY>";
pub const QUERY_TAG: &str = "<QUERY>";

/// Words that may never be used as a term name.
pub const RESERVED: [&str; 11] =
    ["all", "no", "some", "are", "not", "hypothesis", "premises", "knowledge", "base", "study", "query"];

const BUNDLED_SYLLABLES: &str = include_str!("../data/syllables.txt");

/// The bundled inventory of common English syllables.
pub fn bundled_syllables() -> Vec<&'static str> {
    BUNDLED_SYLLABLES.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("term {0} has no word in the assignment")]
    UnmappedTerm(u32),
    #[error("episodes need exactly 3 study pairs, got {0}")]
    StudyCount(usize),
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("assignment needs {needed} words, vocabulary has {available}")]
    VocabularyTooSmall { needed: usize, available: usize },
    #[error("not a permutation of {0} premises")]
    Permutation(usize),
    #[error("cannot parse {what}: {text:?}")]
    Parse { what: &'static str, text: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "kebab-case"))]
pub enum VocabularyKind {
    SyllablePseudowords,
    SymbolicConstants,
    ExternalFile,
}

impl VocabularyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VocabularyKind::SyllablePseudowords => "syllable-pseudowords",
            VocabularyKind::SymbolicConstants => "symbolic-constants",
            VocabularyKind::ExternalFile => "external-file",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::SyllablePseudowords, Self::SymbolicConstants, Self::ExternalFile].into_iter().find(|k| k.as_str() == s)
    }
}

/// An ordered list of unique words usable as term names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    kind: VocabularyKind,
    words: Vec<String>,
}

fn check_word(w: &str) -> Result<(), RenderError> {
    if w.is_empty() {
        return Err(RenderError::Vocabulary("empty word".into()));
    }
    if w.chars().any(|c| c.is_whitespace() || ",;:<>".contains(c)) {
        return Err(RenderError::Vocabulary(format!("word {w:?} contains a separator")));
    }
    if RESERVED.contains(&w.to_lowercase().as_str()) {
        return Err(RenderError::Vocabulary(format!("word {w:?} is a reserved keyword")));
    }
    Ok(())
}

impl Vocabulary {
    /// Validates uniqueness (case-insensitively), separators and keywords.
    pub fn new(kind: VocabularyKind, words: Vec<String>) -> Result<Self, RenderError> {
        let mut seen = BTreeMap::new();
        for w in &words {
            check_word(w)?;
            if seen.insert(w.to_lowercase(), ()).is_some() {
                return Err(RenderError::Vocabulary(format!("duplicate word {w:?}")));
            }
        }
        Ok(Vocabulary { kind, words })
    }

    /// `X1..X{size}`.
    pub fn symbolic(size: usize) -> Self {
        let words = (1..=size).map(|i| format!("X{i}")).collect();
        Vocabulary { kind: VocabularyKind::SymbolicConstants, words }
    }

    /// `size` distinct two-syllable words, drawn without replacement from all
    /// ordered syllable pairs in a seed-determined order.
    pub fn from_syllables<S: AsRef<str>>(
        inventory: &[S],
        size: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, RenderError> {
        let mut syll: Vec<String> = inventory.iter().map(|s| s.as_ref().trim().to_lowercase()).collect();
        syll.retain(|s| !s.is_empty());
        syll.sort();
        syll.dedup();
        let n = syll.len();
        let mut pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|i| (0..n as u32).map(move |j| (i, j))).collect();
        pairs.shuffle(rng);
        let mut seen = BTreeMap::new();
        let mut words = Vec::with_capacity(size);
        for (i, j) in pairs {
            if words.len() == size {
                break;
            }
            let w = format!("{}{}", syll[i as usize], syll[j as usize]);
            if check_word(&w).is_err() || seen.insert(w.clone(), ()).is_some() {
                continue;
            }
            words.push(w);
        }
        if words.len() < size {
            return Err(RenderError::VocabularyTooSmall { needed: size, available: words.len() });
        }
        Ok(Vocabulary { kind: VocabularyKind::SyllablePseudowords, words })
    }

    /// Bundled inventory, 5000 words unless told otherwise.
    pub fn pseudowords(size: usize, rng: &mut ChaCha8Rng) -> Result<Self, RenderError> {
        Self::from_syllables(&bundled_syllables(), size, rng)
    }

    pub fn kind(&self) -> VocabularyKind {
        self.kind
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Removes every word that also occurs in `other`.
    pub fn without(&self, other: &Vocabulary) -> Vocabulary {
        let taken: BTreeMap<String, ()> = other.words.iter().map(|w| (w.to_lowercase(), ())).collect();
        let words = self.words.iter().filter(|w| !taken.contains_key(&w.to_lowercase())).cloned().collect();
        Vocabulary { kind: self.kind, words }
    }
}

/// Injective naming of a knowledge base's terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    names: Vec<String>,
    lookup: BTreeMap<String, Term>,
}

impl Assignment {
    pub fn new(names: Vec<String>) -> Result<Self, RenderError> {
        let mut lookup = BTreeMap::new();
        for (i, w) in names.iter().enumerate() {
            check_word(w)?;
            if lookup.insert(w.to_lowercase(), Term(i as u32)).is_some() {
                return Err(RenderError::Vocabulary(format!("word {w:?} assigned twice")));
            }
        }
        Ok(Assignment { names, lookup })
    }

    /// `x1..x{n}` for terms `0..n`, the naming used in worked examples.
    pub fn indexed(n_terms: u32) -> Self {
        Self::new((1..=n_terms).map(|i| format!("x{i}")).collect()).expect("indexed names are valid")
    }

    /// `n_terms` distinct words sampled from the vocabulary.
    pub fn random(vocab: &Vocabulary, n_terms: u32, rng: &mut ChaCha8Rng) -> Result<Self, RenderError> {
        let n = n_terms as usize;
        if vocab.len() < n {
            return Err(RenderError::VocabularyTooSmall { needed: n, available: vocab.len() });
        }
        let names = vocab.words.choose_multiple(rng, n).cloned().collect();
        Self::new(names)
    }

    pub fn name(&self, t: Term) -> Result<&str, RenderError> {
        self.names.get(t.index()).map(String::as_str).ok_or(RenderError::UnmappedTerm(t.0))
    }

    /// Case-insensitive reverse lookup.
    pub fn term(&self, word: &str) -> Option<Term> {
        self.lookup.get(&word.to_lowercase()).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

pub fn render_formula(f: &Formula, asg: &Assignment) -> Result<String, RenderError> {
    let (s, o) = (asg.name(f.subj)?, asg.name(f.obj)?);
    Ok(match f.q {
        Quantifier::A => format!("All {s} are {o}"),
        Quantifier::E => format!("No {s} are {o}"),
        Quantifier::I => format!("Some {s} are {o}"),
        Quantifier::O => format!("Some {s} are not {o}"),
    })
}

pub fn render_list(fs: &[Formula], asg: &Assignment) -> Result<String, RenderError> {
    let parts = fs.iter().map(|f| render_formula(f, asg)).collect::<Result<Vec<_>, _>>()?;
    Ok(parts.join(", "))
}

/// Why one item of a premise list could not be read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemError {
    /// Does not match any of the four templates.
    Template,
    /// Matches a template but names a word outside the assignment.
    UnknownWord(String),
}

/// Splits a formula into quantifier and the two words, without resolving the
/// words. Keywords match case-insensitively; words are returned as written.
pub fn parse_template(text: &str) -> Option<(Quantifier, &str, &str)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let kw = |i: usize, w: &str| toks[i].eq_ignore_ascii_case(w);
    match toks.len() {
        4 if kw(0, "all") && kw(2, "are") => Some((Quantifier::A, toks[1], toks[3])),
        4 if kw(0, "no") && kw(2, "are") => Some((Quantifier::E, toks[1], toks[3])),
        4 if kw(0, "some") && kw(2, "are") => Some((Quantifier::I, toks[1], toks[3])),
        5 if kw(0, "some") && kw(2, "are") && kw(3, "not") => Some((Quantifier::O, toks[1], toks[4])),
        _ => None,
    }
}

/// Reads a single formula; case-insensitive on keywords and words.
pub fn parse_formula(text: &str, asg: &Assignment) -> Result<Formula, ItemError> {
    let (q, s, o) = parse_template(text).ok_or(ItemError::Template)?;
    let look = |w: &str| asg.term(w).ok_or_else(|| ItemError::UnknownWord(w.to_string()));
    let (s, o) = (look(s)?, look(o)?);
    if s == o {
        return Err(ItemError::Template);
    }
    Ok(Formula { q, subj: s, obj: o })
}

/// One comma-separated item of a (possibly model-written) premise list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PremiseItem {
    pub text: String,
    pub parsed: Result<Formula, ItemError>,
}

/// Splits on commas and trims; empty items are dropped. Never fails: items
/// that do not parse are returned as data.
pub fn parse_premise_list(text: &str, asg: &Assignment) -> Vec<PremiseItem> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| PremiseItem { text: s.to_string(), parsed: parse_formula(s, asg) })
        .collect()
}

fn strict_list(text: &str, asg: &Assignment, what: &'static str) -> Result<Vec<Formula>, RenderError> {
    parse_premise_list(text, asg)
        .into_iter()
        .map(|it| it.parsed.map_err(|_| RenderError::Parse { what, text: it.text }))
        .collect()
}

/// Premises in rendered order, plus the gold premise set in that order.
fn ordered(kb: &KnowledgeBase, perm: &[usize], gold: &PremiseSet) -> Result<(Vec<Formula>, Vec<Formula>), RenderError> {
    let n = kb.premises().len();
    let mut seen = PremiseSet::new();
    for &i in perm {
        if i >= n || seen.contains(i) {
            return Err(RenderError::Permutation(n));
        }
        seen.insert(i);
    }
    if perm.len() != n {
        return Err(RenderError::Permutation(n));
    }
    let premises = perm.iter().map(|&i| kb.premises()[i]).collect();
    let gold = perm.iter().filter(|&&i| gold.contains(i)).map(|&i| kb.premises()[i]).collect();
    Ok((premises, gold))
}

/// Abstract content of a rendered baseline datapoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatapointText {
    pub premises: Vec<Formula>,
    pub hypothesis: Formula,
    pub gold: Vec<Formula>,
}

/// Abstract content of a rendered episode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpisodeText {
    pub premises: Vec<Formula>,
    /// `(hypothesis, premises)` per study pair.
    pub study: Vec<(Formula, Vec<Formula>)>,
    pub hypothesis: Formula,
    pub gold: Vec<Formula>,
}

/// Rendered text plus the gold premises as strings, in rendered order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub gold: Vec<String>,
}

pub fn datapoint_text(
    kb: &KnowledgeBase,
    hypothesis: &Formula,
    gold: &PremiseSet,
    perm: &[usize],
) -> Result<DatapointText, RenderError> {
    let (premises, gold) = ordered(kb, perm, gold)?;
    Ok(DatapointText { premises, hypothesis: *hypothesis, gold })
}

pub fn render_datapoint(d: &DatapointText, asg: &Assignment) -> Result<Rendered, RenderError> {
    let text = format!(
        "{KB_TAG} {} {QUERY_TAG} hypothesis: {} premises: {}",
        render_list(&d.premises, asg)?,
        render_formula(&d.hypothesis, asg)?,
        render_list(&d.gold, asg)?,
    );
    let gold = d.gold.iter().map(|f| render_formula(f, asg)).collect::<Result<_, _>>()?;
    Ok(Rendered { text, gold })
}

pub fn render_episode(e: &EpisodeText, asg: &Assignment) -> Result<Rendered, RenderError> {
    if e.study.len() != 3 {
        return Err(RenderError::StudyCount(e.study.len()));
    }
    let mut text = format!("{KB_TAG} {} {STUDY_TAG} ", render_list(&e.premises, asg)?);
    for (h, ps) in &e.study {
        text.push_str(&format!("hypothesis: {} premises: {}; ", render_formula(h, asg)?, render_list(ps, asg)?));
    }
    text.push_str(&format!(
        "{QUERY_TAG} hypothesis: {} premises: {}",
        render_formula(&e.hypothesis, asg)?,
        render_list(&e.gold, asg)?
    ));
    let gold = e.gold.iter().map(|f| render_formula(f, asg)).collect::<Result<_, _>>()?;
    Ok(Rendered { text, gold })
}

fn parse_err(what: &'static str, text: &str) -> RenderError {
    RenderError::Parse { what, text: text.to_string() }
}

/// `hypothesis: H premises: P1, P2` into its two parts.
fn parse_pair(text: &str, asg: &Assignment) -> Result<(Formula, Vec<Formula>), RenderError> {
    let rest = text.trim().strip_prefix("hypothesis: ").ok_or_else(|| parse_err("pair", text))?;
    let (h, ps) = rest.split_once(" premises: ").ok_or_else(|| parse_err("pair", text))?;
    let h = parse_formula(h, asg).map_err(|_| parse_err("hypothesis", h))?;
    Ok((h, strict_list(ps, asg, "premise")?))
}

pub fn parse_datapoint(text: &str, asg: &Assignment) -> Result<DatapointText, RenderError> {
    let rest = text.strip_prefix(KB_TAG).ok_or_else(|| parse_err("datapoint", text))?;
    let (kb, query) = rest.split_once(&format!(" {QUERY_TAG} ")).ok_or_else(|| parse_err("datapoint", text))?;
    let premises = strict_list(kb, asg, "premise")?;
    let (hypothesis, gold) = parse_pair(query, asg)?;
    Ok(DatapointText { premises, hypothesis, gold })
}

pub fn parse_episode(text: &str, asg: &Assignment) -> Result<EpisodeText, RenderError> {
    let rest = text.strip_prefix(KB_TAG).ok_or_else(|| parse_err("episode", text))?;
    let (kb, rest) = rest.split_once(&format!(" {STUDY_TAG} ")).ok_or_else(|| parse_err("episode", text))?;
    let (study, query) = rest.split_once(&format!("{QUERY_TAG} ")).ok_or_else(|| parse_err("episode", text))?;
    let premises = strict_list(kb, asg, "premise")?;
    let study = study
        .split("; ")
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_pair(s, asg))
        .collect::<Result<Vec<_>, _>>()?;
    if study.len() != 3 {
        return Err(RenderError::StudyCount(study.len()));
    }
    let (hypothesis, gold) = parse_pair(query, asg)?;
    Ok(EpisodeText { premises, study, hypothesis, gold })
}

/// Seed-determined permutation of `0..n`.
pub fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
