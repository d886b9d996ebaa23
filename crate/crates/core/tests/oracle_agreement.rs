use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use syllo_core::oracle::{find_model, sample_instance, ModelBound, Oracle};
use syllo_core::{consistent_syntactic, Formula, KnowledgeBase, Quantifier, Reasoner};

fn random_kb(rng: &mut ChaCha8Rng, max_terms: u32, max_premises: usize) -> KnowledgeBase {
    let (n, premises) = sample_instance(rng, max_terms, max_premises);
    KnowledgeBase::new("r", n, premises).unwrap()
}

fn hypotheses(n: u32) -> Vec<Formula> {
    let mut hs = Vec::new();
    for q in Quantifier::ALL {
        for s in 0..n {
            for o in 0..n {
                if s != o {
                    hs.push(Formula::new(q, s, o));
                }
            }
        }
    }
    hs
}

#[test]
fn syntactic_consistency_matches_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let kb = random_kb(&mut rng, 6, 8);
        let bound = ModelBound::completeness(kb.n_terms(), kb.premises());
        let semantic = find_model(kb.n_terms(), kb.premises(), bound.max_universe()).is_some();
        assert_eq!(consistent_syntactic(&kb), semantic, "{:?}", kb.premises());
    }
}

#[test]
fn reasoner_matches_oracle_on_every_hypothesis() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let oracle = Oracle::default();
    let mut checked = 0;
    while checked < 300 {
        let kb = random_kb(&mut rng, 6, 8);
        let Ok(r) = Reasoner::new(&kb) else { continue };
        checked += 1;
        for h in hypotheses(kb.n_terms()) {
            let expected = oracle.minimal_entailing_subsets(&kb, &h).unwrap();
            let bound = syllo_core::oracle::refutation_bound(&kb, &h);
            assert_eq!(r.entails(&h).unwrap(), oracle.entails(&kb, &h, bound).unwrap());
            let got: Vec<_> = r.minimal_sets(&h).unwrap().into_iter().map(|(s, _)| s).collect();
            assert_eq!(got, expected, "{:?} ⊢ {h}", kb.premises());
        }
    }
}
