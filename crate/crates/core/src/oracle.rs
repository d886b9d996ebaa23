//! Finite-model ground truth for small instances.
//!
//! Formulas are read as first-order sentences over unary predicates, one per
//! term, with every predicate required to be non-empty. An element of a
//! model is characterised by its *type*: the set of terms whose extent
//! contains it. Universal formulas (A, E) constrain which types may occur;
//! existential formulas (I, O) and the non-emptiness of each term each need
//! one element of a suitable type. Model search therefore walks over sets of
//! distinct types, branching on witnesses for the first unmet requirement.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::logic::{negate, Formula, KnowledgeBase, Quantifier};
use crate::premise_set::PremiseSet;

/// Finite structure: per-term extents over the universe `0..universe_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    universe_size: usize,
    extents: Vec<u64>,
}

impl Interpretation {
    pub const MAX_UNIVERSE: usize = 64;

    /// `extents[t]` is a bitmask of the elements in term `t`'s extent.
    pub fn new(universe_size: usize, extents: Vec<u64>) -> Result<Self, OracleError> {
        if universe_size == 0 || universe_size > Self::MAX_UNIVERSE {
            return Err(OracleError::UniverseSize(universe_size));
        }
        let full = if universe_size == 64 { u64::MAX } else { (1u64 << universe_size) - 1 };
        for (t, &e) in extents.iter().enumerate() {
            if e == 0 || e & !full != 0 {
                return Err(OracleError::BadExtent { term: t as u32 });
            }
        }
        Ok(Interpretation { universe_size, extents })
    }

    /// Builds extents from explicit element lists.
    pub fn from_sets(universe_size: usize, sets: &[&[usize]]) -> Result<Self, OracleError> {
        let extents =
            sets.iter().map(|s| s.iter().fold(0u64, |m, &e| m | 1u64.checked_shl(e as u32).unwrap_or(0))).collect();
        Self::new(universe_size, extents)
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn n_terms(&self) -> usize {
        self.extents.len()
    }

    pub fn extent(&self, term: u32) -> u64 {
        self.extents[term as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelBound {
    max_universe: usize,
}

impl ModelBound {
    pub fn new(max_universe: usize) -> Result<Self, OracleError> {
        if max_universe == 0 {
            Err(OracleError::UniverseSize(0))
        } else {
            Ok(ModelBound { max_universe })
        }
    }

    pub fn max_universe(self) -> usize {
        self.max_universe
    }

    /// One inhabitant per term plus one witness per existential premise.
    pub fn completeness(n_terms: u32, premises: &[Formula]) -> Self {
        let existential = premises.iter().filter(|f| !f.q.is_universal()).count();
        ModelBound { max_universe: (n_terms as usize + existential).max(1) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("universe size {0} outside 1..=64")]
    UniverseSize(usize),
    #[error("extent of term {term} is empty or exceeds the universe")]
    BadExtent { term: u32 },
    #[error("model bound {bound} is below the completeness threshold {required}")]
    BoundTooSmall { bound: usize, required: usize },
    #[error("{n_terms} terms exceeds the oracle limit of {limit}")]
    TooManyTerms { n_terms: u32, limit: u32 },
    #[error("premises are unsatisfiable")]
    Inconsistent,
    #[error("formula {0} mentions a term outside the instance")]
    UnknownTerm(Formula),
}

/// Truth of a formula in a structure, following the first-order reading:
/// `A`: ∀x (a(x) → b(x)), `E`: ∀x ¬(a(x) ∧ b(x)),
/// `I`: ∃x (a(x) ∧ b(x)), `O`: ∃x (a(x) ∧ ¬b(x)).
pub fn satisfies(m: &Interpretation, f: &Formula) -> bool {
    let (a, b) = (m.extent(f.subj.0), m.extent(f.obj.0));
    match f.q {
        Quantifier::A => a & !b == 0,
        Quantifier::E => a & b == 0,
        Quantifier::I => a & b != 0,
        Quantifier::O => a & !b != 0,
    }
}

/// Growable bitset over element types `0..2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct TypeMask(Vec<u64>);

impl TypeMask {
    fn full(n_types: usize) -> Self {
        let mut words = vec![u64::MAX; n_types.div_ceil(64)];
        if !n_types.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (n_types % 64)) - 1;
        }
        TypeMask(words)
    }

    fn from_fn(n_types: usize, keep: impl Fn(u32) -> bool) -> Self {
        let mut words = vec![0u64; n_types.div_ceil(64)];
        for t in 0..n_types {
            if keep(t as u32) {
                words[t / 64] |= 1 << (t % 64);
            }
        }
        TypeMask(words)
    }

    fn and(&self, other: &TypeMask) -> TypeMask {
        TypeMask(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_assign(&mut self, other: &TypeMask) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    fn intersects(&self, other: &TypeMask) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn contains(&self, t: u32) -> bool {
        self.0[t as usize / 64] & (1 << (t % 64)) != 0
    }

    fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let tz = bits.trailing_zeros();
                    bits &= bits - 1;
                    wi as u32 * 64 + tz
                })
            })
        })
    }
}

fn has(t: u32, term: u32) -> bool {
    t >> term & 1 == 1
}

/// Element types permitted by a universal formula.
fn universal_mask(n_types: usize, f: &Formula) -> TypeMask {
    let (a, b) = (f.subj.0, f.obj.0);
    match f.q {
        Quantifier::A => TypeMask::from_fn(n_types, |t| !has(t, a) || has(t, b)),
        Quantifier::E => TypeMask::from_fn(n_types, |t| !(has(t, a) && has(t, b))),
        _ => TypeMask::full(n_types),
    }
}

/// Element types witnessing an existential formula.
fn witness_mask(n_types: usize, f: &Formula) -> TypeMask {
    let (a, b) = (f.subj.0, f.obj.0);
    match f.q {
        Quantifier::I => TypeMask::from_fn(n_types, |t| has(t, a) && has(t, b)),
        Quantifier::O => TypeMask::from_fn(n_types, |t| has(t, a) && !has(t, b)),
        _ => TypeMask::full(n_types),
    }
}

fn inhabitant_mask(n_types: usize, term: u32) -> TypeMask {
    TypeMask::from_fn(n_types, |t| has(t, term))
}

fn interpretation_of(n_terms: u32, types: &[u32]) -> Interpretation {
    let extents = (0..n_terms)
        .map(|term| types.iter().enumerate().filter(|(_, &t)| has(t, term)).fold(0u64, |m, (e, _)| m | 1 << e))
        .collect();
    Interpretation { universe_size: types.len(), extents }
}

fn search(allowed: &TypeMask, reqs: &[TypeMask], chosen: &mut Vec<u32>, max_universe: usize) -> bool {
    let Some(open) = reqs.iter().find(|r| !chosen.iter().any(|&t| r.contains(t))) else {
        return true;
    };
    if chosen.len() == max_universe {
        return false;
    }
    for t in open.and(allowed).iter() {
        chosen.push(t);
        if search(allowed, reqs, chosen, max_universe) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Searches all structures with at most `max_universe` elements for a model
/// of `premises`. No completeness threshold is enforced here.
pub fn find_model(n_terms: u32, premises: &[Formula], max_universe: usize) -> Option<Interpretation> {
    let n_types = 1usize << n_terms;
    let mut allowed = TypeMask::full(n_types);
    let mut reqs: Vec<TypeMask> = (0..n_terms).map(|t| inhabitant_mask(n_types, t)).collect();
    for f in premises {
        if f.q.is_universal() {
            allowed.and_assign(&universal_mask(n_types, f));
        } else {
            reqs.push(witness_mask(n_types, f));
        }
    }
    if reqs.iter().any(|r| !r.intersects(&allowed)) {
        return None;
    }
    let max_universe = max_universe.min(Interpretation::MAX_UNIVERSE);
    let mut chosen = Vec::new();
    if !search(&allowed, &reqs, &mut chosen, max_universe) {
        return None;
    }
    if chosen.is_empty() {
        // Zero terms: any one-element structure.
        chosen.push(0);
    }
    let m = interpretation_of(n_terms, &chosen);
    premises.iter().all(|f| satisfies(&m, f)).then_some(m)
}

/// Oracle with a configurable refusal limit on instance size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub max_terms: u32,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { max_terms: 8 }
    }
}

impl Oracle {
    fn check(&self, n_terms: u32, premises: &[Formula], bound: ModelBound) -> Result<(), OracleError> {
        if n_terms > self.max_terms {
            return Err(OracleError::TooManyTerms { n_terms, limit: self.max_terms });
        }
        if let Some(f) = premises.iter().find(|f| f.subj.0 >= n_terms || f.obj.0 >= n_terms) {
            return Err(OracleError::UnknownTerm(*f));
        }
        let required = ModelBound::completeness(n_terms, premises).max_universe;
        if bound.max_universe < required {
            return Err(OracleError::BoundTooSmall { bound: bound.max_universe, required });
        }
        Ok(())
    }

    pub fn consistent(&self, kb: &KnowledgeBase, bound: ModelBound) -> Result<bool, OracleError> {
        self.consistent_formulas(kb.n_terms(), kb.premises(), bound)
    }

    pub fn consistent_formulas(
        &self,
        n_terms: u32,
        premises: &[Formula],
        bound: ModelBound,
    ) -> Result<bool, OracleError> {
        self.check(n_terms, premises, bound)?;
        Ok(find_model(n_terms, premises, bound.max_universe).is_some())
    }

    /// Entailment by refutation: no bounded model of the premises plus the
    /// negated hypothesis. The bound must also cover the negation's witness.
    pub fn entails(&self, kb: &KnowledgeBase, h: &Formula, bound: ModelBound) -> Result<bool, OracleError> {
        if !self.consistent(kb, bound)? {
            return Err(OracleError::Inconsistent);
        }
        let mut extended = kb.premises().to_vec();
        extended.push(negate(*h));
        Ok(!self.consistent_formulas(kb.n_terms(), &extended, bound)?)
    }

    /// Every inclusion-minimal subset of the premises that entails `h`,
    /// sorted. Sweeps all `2^|premises|` subsets using the type-mask
    /// representation: a subset is consistent with `negate(h)` iff every
    /// inhabitant and witness requirement has a permitted type, which is exact
    /// because the threshold bound always admits one element per requirement.
    pub fn minimal_entailing_subsets(&self, kb: &KnowledgeBase, h: &Formula) -> Result<Vec<PremiseSet>, OracleError> {
        let n_terms = kb.n_terms();
        if n_terms > self.max_terms {
            return Err(OracleError::TooManyTerms { n_terms, limit: self.max_terms });
        }
        let premises = kb.premises();
        let k = premises.len();
        if k > 20 {
            return Err(OracleError::TooManyTerms { n_terms: k as u32, limit: 20 });
        }
        let n_types = 1usize << n_terms;
        let neg = negate(*h);
        let inhabitants: Vec<TypeMask> = (0..n_terms).map(|t| inhabitant_mask(n_types, t)).collect();
        let universal: Vec<TypeMask> = premises.iter().map(|f| universal_mask(n_types, f)).collect();
        let witness: Vec<Option<TypeMask>> =
            premises.iter().map(|f| (!f.q.is_universal()).then(|| witness_mask(n_types, f))).collect();
        let neg_universal = universal_mask(n_types, &neg);
        let neg_witness = (!neg.q.is_universal()).then(|| witness_mask(n_types, &neg));

        let mut allowed: Vec<TypeMask> = Vec::with_capacity(1 << k);
        let mut entailing = vec![false; 1 << k];
        for s in 0..1usize << k {
            let mask = if s == 0 {
                TypeMask::full(n_types)
            } else {
                let low = s.trailing_zeros() as usize;
                allowed[s & (s - 1)].and(&universal[low])
            };
            let with_neg = mask.and(&neg_universal);
            let satisfiable = inhabitants.iter().all(|r| r.intersects(&with_neg))
                && (0..k)
                    .filter(|i| s >> i & 1 == 1)
                    .filter_map(|i| witness[i].as_ref())
                    .chain(neg_witness.as_ref())
                    .all(|r| r.intersects(&with_neg));
            entailing[s] = !satisfiable;
            allowed.push(mask);
        }
        let minimal = (0..1usize << k)
            .filter(|&s| entailing[s] && (0..k).all(|i| s >> i & 1 == 0 || !entailing[s & !(1 << i)]))
            .map(|s| (0..k).filter(|i| s >> i & 1 == 1).collect::<PremiseSet>());
        let mut out: Vec<PremiseSet> = minimal.collect();
        out.sort();
        Ok(out)
    }
}

/// [`Oracle::consistent`] with the default term limit.
pub fn consistent_semantic(kb: &KnowledgeBase, bound: ModelBound) -> Result<bool, OracleError> {
    Oracle::default().consistent(kb, bound)
}

/// [`Oracle::entails`] with the default term limit.
pub fn entails_semantic(kb: &KnowledgeBase, h: &Formula, bound: ModelBound) -> Result<bool, OracleError> {
    Oracle::default().entails(kb, h, bound)
}

/// Smallest bound accepted by [`entails_semantic`] for `h`.
pub fn refutation_bound(kb: &KnowledgeBase, h: &Formula) -> ModelBound {
    let mut fs = kb.premises().to_vec();
    fs.push(negate(*h));
    ModelBound::completeness(kb.n_terms(), &fs)
}

/// Calls `visit` on every structure with universe `1..=max_universe` and
/// non-empty extents, in lexicographic order of extents. Stops early when
/// `visit` returns false.
pub fn for_each_interpretation(n_terms: u32, max_universe: usize, mut visit: impl FnMut(&Interpretation) -> bool) {
    for u in 1..=max_universe.min(Interpretation::MAX_UNIVERSE) {
        let top = if u == 64 { u64::MAX } else { (1u64 << u) - 1 };
        let mut m = Interpretation { universe_size: u, extents: vec![1; n_terms as usize] };
        loop {
            if !visit(&m) {
                return;
            }
            // Odometer over extents 1..=top, last term fastest.
            let mut i = n_terms as usize;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if m.extents[i] < top {
                    m.extents[i] += 1;
                    break;
                }
                m.extents[i] = 1;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || n_terms == 0 {
                break;
            }
        }
    }
}

/// Entailment straight from the definition: `h` holds in every structure of
/// at most `max_universe` elements that satisfies the premises.
pub fn entails_direct(kb: &KnowledgeBase, h: &Formula, max_universe: usize) -> bool {
    let mut holds = true;
    for_each_interpretation(kb.n_terms(), max_universe, |m| {
        if kb.premises().iter().all(|f| satisfies(m, f)) && !satisfies(m, h) {
            holds = false;
        }
        holds
    });
    holds
}

/// Satisfiability by naive enumeration of every set of at most `max_universe`
/// distinct element types. Exponential; meant for cross-checking
/// [`find_model`] on tiny instances.
pub fn consistent_exhaustive(n_terms: u32, premises: &[Formula], max_universe: usize) -> bool {
    let n_types = 1u32 << n_terms;
    let mut chosen: Vec<u32> = Vec::new();
    fn rec(next: u32, n_types: u32, n_terms: u32, premises: &[Formula], chosen: &mut Vec<u32>, max: usize) -> bool {
        if !chosen.is_empty() {
            let m = interpretation_of(n_terms, chosen);
            let inhabited = m.extents.iter().all(|&e| e != 0);
            if inhabited && premises.iter().all(|f| satisfies(&m, f)) {
                return true;
            }
        }
        if chosen.len() == max {
            return false;
        }
        for t in next..n_types {
            chosen.push(t);
            if rec(t + 1, n_types, n_terms, premises, chosen, max) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    rec(0, n_types, n_terms, premises, &mut chosen, max_universe.min(Interpretation::MAX_UNIVERSE))
}

/// Random small instance for cross-checks: 2..=`max_terms` terms and up to
/// `max_premises` distinct non-reflexive formulas, biased towards A so that
/// chains of several steps occur. Not necessarily consistent.
pub fn sample_instance(rng: &mut ChaCha8Rng, max_terms: u32, max_premises: usize) -> (u32, Vec<Formula>) {
    let n = rng.gen_range(2..=max_terms.max(2));
    let mut all: Vec<Formula> = Quantifier::ALL
        .into_iter()
        .flat_map(|q| (0..n).flat_map(move |s| (0..n).filter(move |&o| o != s).map(move |o| Formula::new(q, s, o))))
        .collect();
    all.shuffle(rng);
    let k = rng.gen_range(0..=max_premises);
    let mut premises = Vec::with_capacity(k);
    for f in all {
        if premises.len() == k {
            break;
        }
        if f.q != Quantifier::A && rng.gen_bool(0.5) {
            continue;
        }
        premises.push(f);
    }
    (n, premises)
}
