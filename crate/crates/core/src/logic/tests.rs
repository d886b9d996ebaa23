use alloc::vec;
use alloc::vec::Vec;

use super::*;

fn kb(n: u32, premises: Vec<Formula>) -> KnowledgeBase {
    KnowledgeBase::new("t", n, premises).unwrap()
}

/// x1..x11 as terms 0..10.
fn worked_example() -> KnowledgeBase {
    let x = |i: u32| i - 1;
    kb(
        11,
        vec![
            Formula::a(x(1), x(2)),
            Formula::a(x(2), x(4)),
            Formula::a(x(3), x(5)),
            Formula::a(x(10), x(11)),
            Formula::a(x(4), x(6)),
            Formula::a(x(2), x(3)),
            Formula::a(x(5), x(7)),
            Formula::o(x(5), x(1)),
            Formula::a(x(9), x(10)),
            Formula::a(x(6), x(8)),
            Formula::a(x(8), x(9)),
            Formula::o(x(11), x(4)),
        ],
    )
}

#[test]
fn reachability_is_directed_and_reflexive() {
    let k = kb(2, vec![Formula::a(0, 1)]);
    assert!(a_reachable(&k, Term(0), Term(1)).unwrap());
    assert!(!a_reachable(&k, Term(1), Term(0)).unwrap());
    assert!(a_reachable(&k, Term(1), Term(1)).unwrap());
    assert!(matches!(a_reachable(&k, Term(0), Term(5)), Err(LogicError::UnknownTerm { term: 5, n_terms: 2 })));
    assert!(a_reachable(&worked_example(), Term(2), Term(6)).unwrap());
}

#[test]
fn entailment_examples() {
    let k = kb(3, vec![Formula::a(0, 1), Formula::a(0, 2)]);
    assert!(entails(&k, &Formula::i(1, 2)).unwrap());
    let k = kb(2, vec![Formula::a(0, 1)]);
    assert!(!entails(&k, &Formula::o(0, 1)).unwrap());
    // a -> a1 -> b, c -> d, E b d  gives  E a c.
    let k = kb(5, vec![Formula::a(0, 4), Formula::a(4, 1), Formula::a(2, 3), Formula::e(1, 3)]);
    assert!(entails(&k, &Formula::e(0, 2)).unwrap());
    assert!(entails(&k, &Formula::e(2, 0)).unwrap());
}

#[test]
fn inconsistent_kb_is_an_error() {
    let k = kb(3, vec![Formula::a(0, 1), Formula::a(0, 2), Formula::e(1, 2)]);
    assert!(!consistent_syntactic(&k));
    assert_eq!(entails(&k, &Formula::a(1, 2)), Err(LogicError::Inconsistent));
    assert!(consistent_syntactic(&kb(3, vec![Formula::a(0, 1), Formula::a(1, 2)])));
    assert!(!consistent_syntactic(&kb(2, vec![Formula::a(0, 1), Formula::o(0, 1)])));
}

#[test]
fn worked_example_query() {
    let k = worked_example();
    let inf = minimal_premises(&k, &Formula::a(2, 6)).unwrap().inference().unwrap();
    assert_eq!(inf.itype.number(), 2);
    assert_eq!(inf.length, 2);
    assert_eq!(inf.premise_formulas(&k), vec![Formula::a(2, 4), Formula::a(4, 6)]);
}

#[test]
fn single_premise_and_length_zero() {
    let k = kb(2, vec![Formula::a(0, 1)]);
    let inf = minimal_premises(&k, &Formula::a(0, 1)).unwrap().inference().unwrap();
    assert_eq!((inf.itype.number(), inf.length), (2, 1));
    assert_eq!(minimal_premises(&k, &Formula::a(1, 0)).unwrap(), Minimality::NotEntailed);

    let k = kb(2, vec![Formula::e(0, 1)]);
    let inf = minimal_premises(&k, &Formula::o(0, 1)).unwrap().inference().unwrap();
    assert_eq!((inf.itype.number(), inf.length), (3, 0));
}

#[test]
fn redundant_kb_is_reported() {
    let k = kb(3, vec![Formula::a(0, 1), Formula::a(1, 2), Formula::a(0, 2)]);
    assert!(matches!(minimal_premises(&k, &Formula::a(0, 2)), Err(LogicError::Redundant { count: 2, .. })));
}

#[test]
fn negation_is_an_involution() {
    assert_eq!(negate(Formula::e(1, 2)), Formula::i(1, 2));
    assert_eq!(negate(Formula::a(0, 1)), Formula::o(0, 1));
    for q in Quantifier::ALL {
        let f = Formula::new(q, 3, 4);
        assert_eq!(negate(negate(f)), f);
    }
}

#[test]
fn kb_construction_rejects_bad_premises() {
    assert_eq!(KnowledgeBase::new("x", 2, vec![Formula::a(0, 0)]), Err(LogicError::Reflexive(Formula::a(0, 0))));
    assert_eq!(
        KnowledgeBase::new("x", 2, vec![Formula::a(0, 1), Formula::a(0, 1)]),
        Err(LogicError::DuplicatePremise(Formula::a(0, 1)))
    );
    assert!(KnowledgeBase::new("x", 2, vec![Formula::a(0, 2)]).is_err());
}

#[test]
fn chains_enumerate_simple_paths() {
    let k = kb(4, vec![Formula::a(0, 1), Formula::a(1, 2), Formula::a(0, 3), Formula::a(3, 2)]);
    let r = Reasoner::unchecked(&k);
    let mut sets: Vec<_> = r.chains(Term(0), Term(2)).iter().map(|s| s.to_vec()).collect();
    sets.sort();
    assert_eq!(sets, vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(r.chains(Term(2), Term(2)), &[PremiseSet::new()]);
}
