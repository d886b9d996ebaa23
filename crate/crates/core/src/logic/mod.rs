//! The syllogistic fragment: terms, the four quantifiers, formulas and
//! knowledge bases, plus the derivability procedure in [`Reasoner`].

mod reasoner;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use reasoner::Reasoner;

use crate::premise_set::PremiseSet;

/// Abstract node identifier. Rendering to words happens in [`crate::render`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Term(pub u32);

impl Term {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Quantifier {
    /// All s are o.
    A,
    /// No s are o.
    E,
    /// Some s are o.
    I,
    /// Some s are not o.
    O,
}

impl Quantifier {
    pub const ALL: [Quantifier; 4] = [Quantifier::A, Quantifier::E, Quantifier::I, Quantifier::O];

    /// E and I are symmetric in their two terms; A and O are directed.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Quantifier::E | Quantifier::I)
    }

    pub fn is_universal(self) -> bool {
        matches!(self, Quantifier::A | Quantifier::E)
    }

    /// Contradictory quantifier: A/O and E/I.
    pub fn negate(self) -> Quantifier {
        match self {
            Quantifier::A => Quantifier::O,
            Quantifier::O => Quantifier::A,
            Quantifier::E => Quantifier::I,
            Quantifier::I => Quantifier::E,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Quantifier::A => 'A',
            Quantifier::E => 'E',
            Quantifier::I => 'I',
            Quantifier::O => 'O',
        }
    }

    pub fn from_letter(c: char) -> Option<Quantifier> {
        match c {
            'A' | 'a' => Some(Quantifier::A),
            'E' | 'e' => Some(Quantifier::E),
            'I' | 'i' => Some(Quantifier::I),
            'O' | 'o' => Some(Quantifier::O),
            _ => None,
        }
    }
}

/// One quantified statement `q(subj, obj)`.
///
/// Equality is structural: `E(a,b)` and `E(b,a)` are different formulas.
/// Symmetry of E and I is only taken into account by entailment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Formula {
    pub q: Quantifier,
    pub subj: Term,
    pub obj: Term,
}

impl Formula {
    pub fn new(q: Quantifier, subj: u32, obj: u32) -> Self {
        Formula { q, subj: Term(subj), obj: Term(obj) }
    }

    pub fn a(subj: u32, obj: u32) -> Self {
        Self::new(Quantifier::A, subj, obj)
    }

    pub fn e(subj: u32, obj: u32) -> Self {
        Self::new(Quantifier::E, subj, obj)
    }

    pub fn i(subj: u32, obj: u32) -> Self {
        Self::new(Quantifier::I, subj, obj)
    }

    pub fn o(subj: u32, obj: u32) -> Self {
        Self::new(Quantifier::O, subj, obj)
    }

    pub fn is_reflexive(&self) -> bool {
        self.subj == self.obj
    }

    /// Same statement with subject and object exchanged.
    pub fn converse(&self) -> Formula {
        Formula { q: self.q, subj: self.obj, obj: self.subj }
    }

    /// E/I formulas are put in lower-id-first orientation; A/O unchanged.
    pub fn canonical(&self) -> Formula {
        if self.q.is_symmetric() && self.subj > self.obj {
            self.converse()
        } else {
            *self
        }
    }

    /// Same formula up to E/I symmetry.
    pub fn equivalent(&self, other: &Formula) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.q.letter(), self.subj.0, self.obj.0)
    }
}

/// Contradictory of a formula: A↔O, E↔I over the same terms.
pub fn negate(f: Formula) -> Formula {
    Formula { q: f.q.negate(), ..f }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("term {term} is outside the knowledge base's {n_terms} terms")]
    UnknownTerm { term: u32, n_terms: u32 },
    #[error("reflexive formula {0} is not part of the hypothesis space")]
    Reflexive(Formula),
    #[error("premise {0} appears more than once")]
    DuplicatePremise(Formula),
    #[error("knowledge base is inconsistent; every formula would follow")]
    Inconsistent,
    #[error("hypothesis {hypothesis} has {count} minimal premise sets; knowledge base is redundant")]
    Redundant { hypothesis: Formula, count: usize },
    #[error("premises do not instantiate any inference pattern for {0}")]
    Unclassifiable(Formula),
}

/// Ordered premises over the terms `0..n_terms`.
///
/// Order is significant: it is the order premises are rendered in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeBase {
    id: String,
    n_terms: u32,
    premises: Vec<Formula>,
}

impl KnowledgeBase {
    pub fn new(id: impl Into<String>, n_terms: u32, premises: Vec<Formula>) -> Result<Self, LogicError> {
        for (i, p) in premises.iter().enumerate() {
            for t in [p.subj, p.obj] {
                if t.0 >= n_terms {
                    return Err(LogicError::UnknownTerm { term: t.0, n_terms });
                }
            }
            if p.is_reflexive() {
                return Err(LogicError::Reflexive(*p));
            }
            if premises[..i].contains(p) {
                return Err(LogicError::DuplicatePremise(*p));
            }
        }
        Ok(KnowledgeBase { id: id.into(), n_terms, premises })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n_terms(&self) -> u32 {
        self.n_terms
    }

    pub fn premises(&self) -> &[Formula] {
        &self.premises
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> {
        (0..self.n_terms).map(Term)
    }

    /// Index of a premise, matching structurally.
    pub fn position(&self, f: &Formula) -> Option<usize> {
        self.premises.iter().position(|p| p == f)
    }

    /// Index of a premise, matching E/I premises in either orientation.
    pub fn position_equivalent(&self, f: &Formula) -> Option<usize> {
        self.position(f).or_else(|| self.premises.iter().position(|p| p.equivalent(f)))
    }

    pub fn count(&self, q: Quantifier) -> usize {
        self.premises.iter().filter(|p| p.q == q).count()
    }

    /// Sub-knowledge-base made of the selected premises, in KB order.
    pub fn restrict(&self, subset: &PremiseSet) -> KnowledgeBase {
        KnowledgeBase {
            id: self.id.clone(),
            n_terms: self.n_terms,
            premises: subset.iter().map(|i| self.premises[i]).collect(),
        }
    }

    /// Returns a copy with one more premise appended.
    pub fn with_premise(&self, f: Formula) -> Result<KnowledgeBase, LogicError> {
        let mut premises = self.premises.clone();
        premises.push(f);
        KnowledgeBase::new(self.id.clone(), self.n_terms, premises)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub(crate) fn check_term(&self, t: Term) -> Result<(), LogicError> {
        if t.0 < self.n_terms {
            Ok(())
        } else {
            Err(LogicError::UnknownTerm { term: t.0, n_terms: self.n_terms })
        }
    }
}

/// The seven minimal inference patterns, numbered as in the usual
/// presentation (chains `X-Y` may be empty, collapsing `X` and `Y`):
///
/// | type | premises | conclusion |
/// |---|---|---|
/// | 1 | `A a-b, A c-d, O a d` | `O b c` |
/// | 2 | `A a-b` | `A a b` |
/// | 3 | `A a-b, A c-d, A a-e, E d e` | `O b c` |
/// | 4 | `A a-b, A a-c` | `I b c` |
/// | 5 | `A a-b, A c-d, A e-f, I a e, E d f` | `O b c` |
/// | 6 | `A a-b, A c-d, E b d` | `E a c` |
/// | 7 | `A a-b, A c-d, I a c` | `I b d` |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InferenceType(u8);

impl InferenceType {
    pub const ALL: [InferenceType; 7] = [
        InferenceType(1),
        InferenceType(2),
        InferenceType(3),
        InferenceType(4),
        InferenceType(5),
        InferenceType(6),
        InferenceType(7),
    ];

    pub fn new(n: u8) -> Option<Self> {
        (1..=7).contains(&n).then_some(InferenceType(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based row index for grids.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for InferenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A minimal entailment `premises ⊨ conclusion` inside a knowledge base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalInference {
    pub itype: InferenceType,
    pub conclusion: Formula,
    /// Indices into the knowledge base's premises.
    pub premises: PremiseSet,
    /// Number of A-formulas among the premises.
    pub length: usize,
}

impl MinimalInference {
    /// Premise formulas in knowledge-base order.
    pub fn premise_formulas(&self, kb: &KnowledgeBase) -> Vec<Formula> {
        self.premises.iter().map(|i| kb.premises()[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Minimality {
    Entailed(MinimalInference),
    NotEntailed,
}

impl Minimality {
    pub fn inference(self) -> Option<MinimalInference> {
        match self {
            Minimality::Entailed(inf) => Some(inf),
            Minimality::NotEntailed => None,
        }
    }
}

/// True iff `x = y` or a directed path of A-premises leads from `x` to `y`.
pub fn a_reachable(kb: &KnowledgeBase, x: Term, y: Term) -> Result<bool, LogicError> {
    kb.check_term(x)?;
    kb.check_term(y)?;
    Ok(Reasoner::unchecked(kb).reaches(x, y))
}

pub fn entails(kb: &KnowledgeBase, h: &Formula) -> Result<bool, LogicError> {
    Reasoner::new(kb)?.entails(h)
}

pub fn minimal_premises(kb: &KnowledgeBase, h: &Formula) -> Result<Minimality, LogicError> {
    Reasoner::new(kb)?.minimal_premises(h)
}

/// Consistency by absence of antilogism instances.
pub fn consistent_syntactic(kb: &KnowledgeBase) -> bool {
    Reasoner::unchecked(kb).is_consistent()
}

#[cfg(test)]
mod tests;
