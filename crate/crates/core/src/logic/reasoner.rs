use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use super::{Formula, InferenceType, KnowledgeBase, LogicError, MinimalInference, Minimality, Quantifier, Term};
use crate::premise_set::PremiseSet;

const T1: InferenceType = InferenceType(1);
const T2: InferenceType = InferenceType(2);
const T3: InferenceType = InferenceType(3);
const T4: InferenceType = InferenceType(4);
const T5: InferenceType = InferenceType(5);
const T6: InferenceType = InferenceType(6);
const T7: InferenceType = InferenceType(7);

/// Derivability over one knowledge base.
///
/// The A-premises are viewed as a digraph; `reach` is its reflexive
/// transitive closure. Entailment is decided by closure rules read off the
/// seven inference patterns, and minimal premise sets are found by
/// instantiating the patterns with every simple A-path and keeping the
/// inclusion-minimal premise sets.
pub struct Reasoner<'kb> {
    kb: &'kb KnowledgeBase,
    n: usize,
    reach: Vec<bool>,
    a_out: Vec<Vec<(usize, usize)>>,
    e_idx: Vec<usize>,
    i_idx: Vec<usize>,
    o_idx: Vec<usize>,
    chains: OnceCell<Vec<Vec<PremiseSet>>>,
}

impl<'kb> Reasoner<'kb> {
    /// Fails with [`LogicError::Inconsistent`] on inconsistent input.
    pub fn new(kb: &'kb KnowledgeBase) -> Result<Self, LogicError> {
        let r = Self::unchecked(kb);
        if r.is_consistent() {
            Ok(r)
        } else {
            Err(LogicError::Inconsistent)
        }
    }

    pub(crate) fn unchecked(kb: &'kb KnowledgeBase) -> Self {
        let n = kb.n_terms() as usize;
        let mut a_out = vec![Vec::new(); n];
        let (mut e_idx, mut i_idx, mut o_idx) = (Vec::new(), Vec::new(), Vec::new());
        for (k, p) in kb.premises().iter().enumerate() {
            match p.q {
                Quantifier::A => a_out[p.subj.index()].push((p.obj.index(), k)),
                Quantifier::E => e_idx.push(k),
                Quantifier::I => i_idx.push(k),
                Quantifier::O => o_idx.push(k),
            }
        }
        let mut reach = vec![false; n * n];
        let mut stack = Vec::new();
        for s in 0..n {
            reach[s * n + s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &a_out[v] {
                    if !reach[s * n + w] {
                        reach[s * n + w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        Reasoner { kb, n, reach, a_out, e_idx, i_idx, o_idx, chains: OnceCell::new() }
    }

    pub fn kb(&self) -> &'kb KnowledgeBase {
        self.kb
    }

    pub fn reaches(&self, x: Term, y: Term) -> bool {
        self.r(x.index(), y.index())
    }

    #[inline]
    fn r(&self, x: usize, y: usize) -> bool {
        self.reach[x * self.n + y]
    }

    fn premise(&self, k: usize) -> (usize, usize) {
        let p = self.kb.premises()[k];
        (p.subj.index(), p.obj.index())
    }

    /// Both readings of a symmetric premise.
    fn orientations(&self, k: usize) -> [(usize, usize); 2] {
        let (u, v) = self.premise(k);
        [(u, v), (v, u)]
    }

    fn derives_i(&self, x: usize, y: usize) -> bool {
        (0..self.n).any(|z| self.r(z, x) && self.r(z, y))
            || self.i_idx.iter().any(|&k| self.orientations(k).iter().any(|&(u, v)| self.r(u, x) && self.r(v, y)))
    }

    fn derives_e(&self, x: usize, y: usize) -> bool {
        self.e_idx.iter().any(|&k| self.orientations(k).iter().any(|&(u, v)| self.r(x, u) && self.r(y, v)))
    }

    fn derives_o(&self, x: usize, y: usize) -> bool {
        let via_o = self.o_idx.iter().any(|&k| {
            let (u, v) = self.premise(k);
            self.r(u, x) && self.r(y, v)
        });
        let via_e = || {
            self.e_idx.iter().any(|&k| {
                self.orientations(k)
                    .iter()
                    .any(|&(e, d)| self.r(y, d) && (0..self.n).any(|z| self.r(z, x) && self.r(z, e)))
            })
        };
        let via_ie = || {
            self.i_idx.iter().any(|&ki| {
                self.orientations(ki).iter().any(|&(a, e)| {
                    self.r(a, x)
                        && self
                            .e_idx
                            .iter()
                            .any(|&ke| self.orientations(ke).iter().any(|&(f, d)| self.r(e, f) && self.r(y, d)))
                })
            })
        };
        via_o || via_e() || via_ie()
    }

    /// No `O u v` premise with an A-path `u → v`, and no `E u v` premise
    /// whose terms are derivably overlapping.
    pub fn is_consistent(&self) -> bool {
        let o_ok = self.o_idx.iter().all(|&k| {
            let (u, v) = self.premise(k);
            !self.r(u, v)
        });
        o_ok && self.e_idx.iter().all(|&k| {
            let (u, v) = self.premise(k);
            !self.derives_i(u, v)
        })
    }

    fn check_hypothesis(&self, h: &Formula) -> Result<(), LogicError> {
        self.kb.check_term(h.subj)?;
        self.kb.check_term(h.obj)?;
        if h.is_reflexive() {
            return Err(LogicError::Reflexive(*h));
        }
        Ok(())
    }

    pub fn entails(&self, h: &Formula) -> Result<bool, LogicError> {
        self.check_hypothesis(h)?;
        let (x, y) = (h.subj.index(), h.obj.index());
        Ok(match h.q {
            Quantifier::A => self.r(x, y),
            Quantifier::I => self.derives_i(x, y),
            Quantifier::E => self.derives_e(x, y),
            Quantifier::O => self.derives_o(x, y),
        })
    }

    /// Every simple A-path from `x` to `y`, as premise sets. `x == y` yields
    /// the single empty chain.
    pub fn chains(&self, x: Term, y: Term) -> &[PremiseSet] {
        self.ch(x.index(), y.index())
    }

    fn ch(&self, x: usize, y: usize) -> &[PremiseSet] {
        let all = self.chains.get_or_init(|| self.all_chains());
        &all[x * self.n + y]
    }

    fn all_chains(&self) -> Vec<Vec<PremiseSet>> {
        let n = self.n;
        let mut out = vec![Vec::new(); n * n];
        let mut on_path = vec![false; n];
        for s in 0..n {
            // Explicit DFS over simple paths: (node, edge cursor, path set).
            let mut stack: Vec<(usize, usize, PremiseSet)> = vec![(s, 0, PremiseSet::new())];
            on_path[s] = true;
            out[s * n + s].push(PremiseSet::new());
            while let Some(top) = stack.last_mut() {
                let (v, cursor) = (top.0, top.1);
                if cursor < self.a_out[v].len() {
                    top.1 += 1;
                    let (w, k) = self.a_out[v][cursor];
                    if on_path[w] {
                        continue;
                    }
                    let mut path = top.2.clone();
                    path.insert(k);
                    out[s * n + w].push(path.clone());
                    on_path[w] = true;
                    stack.push((w, 0, path));
                } else {
                    on_path[v] = false;
                    stack.pop();
                }
            }
        }
        out
    }

    /// Calls `emit` for every instantiation of an inference pattern that
    /// concludes `h`, with the pattern's type and its premise set.
    pub(crate) fn instances(&self, h: &Formula, mut emit: impl FnMut(InferenceType, PremiseSet)) {
        let (x, y) = (h.subj.index(), h.obj.index());
        let n = self.n;
        match h.q {
            Quantifier::A => {
                for p in self.ch(x, y) {
                    emit(T2, p.clone());
                }
            }
            Quantifier::I => {
                for z in (0..n).filter(|&z| self.r(z, x) && self.r(z, y)) {
                    for p in self.ch(z, x) {
                        for q in self.ch(z, y) {
                            emit(T4, p.union(q));
                        }
                    }
                }
                for &k in &self.i_idx {
                    for (u, v) in self.orientations(k) {
                        for p in self.ch(u, x) {
                            for q in self.ch(v, y) {
                                let mut s = p.union(q);
                                s.insert(k);
                                emit(T7, s);
                            }
                        }
                    }
                }
            }
            Quantifier::E => {
                for &k in &self.e_idx {
                    for (u, v) in self.orientations(k) {
                        for p in self.ch(x, u) {
                            for q in self.ch(y, v) {
                                let mut s = p.union(q);
                                s.insert(k);
                                emit(T6, s);
                            }
                        }
                    }
                }
            }
            Quantifier::O => {
                for &k in &self.o_idx {
                    let (u, v) = self.premise(k);
                    for p in self.ch(u, x) {
                        for q in self.ch(y, v) {
                            let mut s = p.union(q);
                            s.insert(k);
                            emit(T1, s);
                        }
                    }
                }
                for &k in &self.e_idx {
                    for (e, d) in self.orientations(k) {
                        if !self.r(y, d) {
                            continue;
                        }
                        for z in (0..n).filter(|&z| self.r(z, x) && self.r(z, e)) {
                            for p in self.ch(z, x) {
                                for q in self.ch(z, e) {
                                    for r in self.ch(y, d) {
                                        let mut s = p.union(q);
                                        s.union_with(r);
                                        s.insert(k);
                                        emit(T3, s);
                                    }
                                }
                            }
                        }
                    }
                }
                for &ki in &self.i_idx {
                    for (a, e) in self.orientations(ki) {
                        if !self.r(a, x) {
                            continue;
                        }
                        for &ke in &self.e_idx {
                            for (f, d) in self.orientations(ke) {
                                if !(self.r(e, f) && self.r(y, d)) {
                                    continue;
                                }
                                for p in self.ch(a, x) {
                                    for q in self.ch(e, f) {
                                        for r in self.ch(y, d) {
                                            let mut s = p.union(q);
                                            s.union_with(r);
                                            s.insert(ki);
                                            s.insert(ke);
                                            emit(T5, s);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// All inclusion-minimal premise sets entailing `h`, each with the lowest
    /// pattern type that produces exactly that set. Sorted by premise set.
    pub fn minimal_sets(&self, h: &Formula) -> Result<Vec<(PremiseSet, InferenceType)>, LogicError> {
        self.check_hypothesis(h)?;
        let mut cands: Vec<(PremiseSet, InferenceType)> = Vec::new();
        self.instances(h, |t, s| match cands.iter_mut().find(|(c, _)| *c == s) {
            Some(entry) => entry.1 = entry.1.min(t),
            None => cands.push((s, t)),
        });
        let mut minimal: Vec<(PremiseSet, InferenceType)> =
            cands.iter().filter(|(s, _)| !cands.iter().any(|(o, _)| o != s && o.is_subset(s))).cloned().collect();
        minimal.sort();
        Ok(minimal)
    }

    pub(crate) fn build_inference(&self, h: &Formula, set: PremiseSet, itype: InferenceType) -> MinimalInference {
        let length = set.iter().filter(|&i| self.kb.premises()[i].q == Quantifier::A).count();
        MinimalInference { itype, conclusion: *h, premises: set, length }
    }

    /// The unique minimal premise set for `h`, checked by single-removal.
    pub fn minimal_premises(&self, h: &Formula) -> Result<Minimality, LogicError> {
        let mut sets = self.minimal_sets(h)?;
        match sets.len() {
            0 => Ok(Minimality::NotEntailed),
            1 => {
                let (set, itype) = sets.pop().unwrap();
                for i in set.iter() {
                    let mut rest = set.clone();
                    rest.remove(i);
                    let sub = self.kb.restrict(&rest);
                    if Reasoner::unchecked(&sub).entails(h)? {
                        return Err(LogicError::Redundant { hypothesis: *h, count: 2 });
                    }
                }
                Ok(Minimality::Entailed(self.build_inference(h, set, itype)))
            }
            count => Err(LogicError::Redundant { hypothesis: *h, count }),
        }
    }
}
