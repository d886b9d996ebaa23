//! Enumeration of every minimal inference in a knowledge base, and the
//! type-by-length bookkeeping built on top of it.

use alloc::vec::Vec;

use crate::logic::{Formula, InferenceType, KnowledgeBase, LogicError, MinimalInference, Quantifier, Reasoner};
use crate::premise_set::PremiseSet;

/// Longest length with its own grid column; longer inferences are counted as
/// overflow for their type.
pub const MAX_GRID_LENGTH: usize = 19;

/// Non-reflexive hypotheses over `n` terms, with E and I only in lower-id-first
/// orientation. Ordered by quantifier, then subject, then object.
pub fn hypothesis_space(n_terms: u32) -> impl Iterator<Item = Formula> {
    Quantifier::ALL.into_iter().flat_map(move |q| {
        (0..n_terms).flat_map(move |s| {
            (0..n_terms).filter(move |&o| o != s && !(q.is_symmetric() && o < s)).map(move |o| Formula::new(q, s, o))
        })
    })
}

/// Every derivable hypothesis with its unique minimal premise set.
///
/// Fails with [`LogicError::Redundant`] on the first hypothesis that has more
/// than one minimal premise set.
pub fn enumerate_inferences(kb: &KnowledgeBase) -> Result<Vec<MinimalInference>, LogicError> {
    let r = Reasoner::new(kb)?;
    enumerate_with(&r)
}

pub(crate) fn enumerate_with(r: &Reasoner<'_>) -> Result<Vec<MinimalInference>, LogicError> {
    let mut out = Vec::new();
    for h in hypothesis_space(r.kb().n_terms()) {
        if !r.entails(&h)? {
            continue;
        }
        let mut sets = r.minimal_sets(&h)?;
        if sets.len() != 1 {
            return Err(LogicError::Redundant { hypothesis: h, count: sets.len() });
        }
        let (set, itype) = sets.pop().unwrap();
        out.push(r.build_inference(&h, set, itype));
    }
    Ok(out)
}

/// The lowest-numbered pattern whose instantiation uses exactly the
/// inference's premises.
pub fn classify(kb: &KnowledgeBase, inf: &MinimalInference) -> Result<InferenceType, LogicError> {
    let sub = kb.restrict(&inf.premises);
    let everything: PremiseSet = (0..sub.premises().len()).collect();
    let r = Reasoner::unchecked(&sub);
    let mut best: Option<InferenceType> = None;
    r.instances(&inf.conclusion, |t, s| {
        if s == everything {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    });
    best.ok_or(LogicError::Unclassifiable(inf.conclusion))
}

/// Observed `[min_len, max_len]` for one type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LengthRange {
    pub itype: u8,
    pub min_len: usize,
    pub max_len: usize,
}

/// Inference counts per (type, length).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypeLengthGrid {
    pub counts: [[u64; MAX_GRID_LENGTH + 1]; 7],
    /// Inferences longer than [`MAX_GRID_LENGTH`], per type.
    pub overflow: [u64; 7],
}

impl TypeLengthGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, itype: InferenceType, length: usize) {
        match self.counts[itype.index()].get_mut(length) {
            Some(c) => *c += 1,
            None => self.overflow[itype.index()] += 1,
        }
    }

    pub fn add_all<'a>(&mut self, infs: impl IntoIterator<Item = &'a MinimalInference>) {
        for inf in infs {
            self.add(inf.itype, inf.length);
        }
    }

    pub fn merge(&mut self, other: &TypeLengthGrid) {
        for t in 0..7 {
            for l in 0..=MAX_GRID_LENGTH {
                self.counts[t][l] += other.counts[t][l];
            }
            self.overflow[t] += other.overflow[t];
        }
    }

    /// Builds the grid over a corpus; fails on any redundant or
    /// inconsistent knowledge base.
    pub fn from_kbs<'a>(kbs: impl IntoIterator<Item = &'a KnowledgeBase>) -> Result<Self, LogicError> {
        let mut g = Self::new();
        for kb in kbs {
            g.add_all(&enumerate_inferences(kb)?);
        }
        Ok(g)
    }

    pub fn get(&self, itype: InferenceType, length: usize) -> u64 {
        self.counts[itype.index()].get(length).copied().unwrap_or(0)
    }

    /// Lengths with a non-zero count for `itype`, ascending.
    pub fn lengths(&self, itype: InferenceType) -> Vec<usize> {
        (0..=MAX_GRID_LENGTH).filter(|&l| self.get(itype, l) > 0).collect()
    }

    /// Non-zero (type, length) cells in type-major order.
    pub fn cells(&self) -> Vec<(InferenceType, usize)> {
        InferenceType::ALL.into_iter().flat_map(|t| self.lengths(t).into_iter().map(move |l| (t, l))).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.overflow.iter().sum::<u64>()
    }
}

/// Per-type observed length range over the grid's columns. Types never
/// observed are omitted.
pub fn length_ranges(grid: &TypeLengthGrid) -> Vec<LengthRange> {
    InferenceType::ALL
        .into_iter()
        .filter_map(|t| {
            let ls = grid.lengths(t);
            Some(LengthRange { itype: t.number(), min_len: *ls.first()?, max_len: *ls.last()? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kb(n: u32, premises: Vec<Formula>) -> KnowledgeBase {
        KnowledgeBase::new("i", n, premises).unwrap()
    }

    #[test]
    fn chain_of_two() {
        let k = kb(3, vec![Formula::a(0, 1), Formula::a(1, 2)]);
        let infs = enumerate_inferences(&k).unwrap();
        let concl: Vec<_> = infs.iter().map(|i| (i.conclusion, i.itype.number(), i.length)).collect();
        assert_eq!(
            concl,
            vec![
                (Formula::a(0, 1), 2, 1),
                (Formula::a(0, 2), 2, 2),
                (Formula::a(1, 2), 2, 1),
                (Formula::i(0, 1), 4, 1),
                (Formula::i(0, 2), 4, 2),
                (Formula::i(1, 2), 4, 1),
            ]
        );
        for inf in &infs {
            assert_eq!(classify(&k, inf).unwrap(), inf.itype);
        }
    }

    #[test]
    fn single_edge_grid() {
        let g = TypeLengthGrid::from_kbs([&kb(2, vec![Formula::a(0, 1)])]).unwrap();
        assert_eq!(g.cells(), vec![(InferenceType::new(2).unwrap(), 1), (InferenceType::new(4).unwrap(), 1)]);
        assert_eq!(
            length_ranges(&g),
            vec![LengthRange { itype: 2, min_len: 1, max_len: 1 }, LengthRange { itype: 4, min_len: 1, max_len: 1 }]
        );
    }

    #[test]
    fn classify_examples() {
        let k = kb(5, vec![Formula::a(0, 4), Formula::a(4, 1), Formula::a(2, 3), Formula::e(1, 3)]);
        let r = Reasoner::new(&k).unwrap();
        let inf = r.minimal_premises(&Formula::e(0, 2)).unwrap().inference().unwrap();
        assert_eq!(classify(&k, &inf).unwrap().number(), 6);
        assert_eq!(inf.length, 3);

        let k = kb(4, vec![Formula::a(0, 1), Formula::a(2, 3), Formula::i(0, 2)]);
        let inf = Reasoner::new(&k).unwrap().minimal_premises(&Formula::i(1, 3)).unwrap();
        assert_eq!(inf.inference().unwrap().itype.number(), 7);
    }

    #[test]
    fn overflow_is_counted() {
        let mut g = TypeLengthGrid::new();
        let t = InferenceType::new(3).unwrap();
        g.add(t, 25);
        assert_eq!(g.overflow[2], 1);
        assert_eq!(g.total(), 1);
        assert!(g.cells().is_empty());
    }
}
