mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pmc_core::corpus::{random_lasso, random_temporal_formula};
use pmc_core::gba::{accepting_states, accepts_lasso, elementary, translate, GbaState};
use pmc_core::ltl::{atomic_props, eval_lasso, parse_formula, Formula};

const PROPS: &[&str] = &["a", "b"];

fn universe(f: &Formula) -> BTreeSet<String> {
    let mut u: BTreeSet<String> = PROPS.iter().map(|p| p.to_string()).collect();
    u.extend(atomic_props(f));
    u
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn automaton_agrees_with_lasso_semantics(salt in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ salt);
        let f = random_temporal_formula(&mut rng, PROPS, 4);
        let a = translate(&f, &universe(&f)).unwrap();
        for _ in 0..20 {
            let w = random_lasso(&mut rng, PROPS, 4, 4);
            prop_assert_eq!(accepts_lasso(&a, &w), eval_lasso(&f, &w), "{} on {:?}", f, w);
        }
    }

    #[test]
    fn subset_states_partition_words(salt in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ salt);
        let f = random_temporal_formula(&mut rng, PROPS, 4);
        let a = translate(&f, &universe(&f)).unwrap();
        prop_assert!(a.check_reverse_deterministic().exactly_one);
        for _ in 0..20 {
            let w = random_lasso(&mut rng, PROPS, 4, 4);
            let acc = accepting_states(&a, &w);
            let n = a
                .states()
                .iter()
                .enumerate()
                .filter(|(q, s)| matches!(s, GbaState::Subset(_)) && acc[*q])
                .count();
            prop_assert_eq!(n, 1, "{} on {:?}", f, w);
        }
    }

    #[test]
    fn state_count_law(salt in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ salt);
        let f = random_temporal_formula(&mut rng, PROPS, 4);
        let a = translate(&f, &universe(&f)).unwrap();
        prop_assert_eq!(a.num_states(), 1 + (1usize << elementary(&f).len()));
    }

    #[test]
    fn shift_law(salt in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ salt);
        let f = random_temporal_formula(&mut rng, PROPS, 3);
        let w = random_lasso(&mut rng, PROPS, 4, 4);
        prop_assert_eq!(eval_lasso(&Formula::next(f.clone()), &w), eval_lasso(&f, &w.shifted()));
    }
}

#[test]
fn fixed_formulas_agree_on_random_lassos() {
    let mut rng = common::rng(11);
    for text in ["a U b", "G F a", "F G a", "X X b", "G (a -> F b)", "!(a U !b) & F a"] {
        let f = parse_formula(text).unwrap();
        let a = translate(&f, &universe(&f)).unwrap();
        for _ in 0..100 {
            let w = random_lasso(&mut rng, PROPS, 4, 4);
            assert_eq!(accepts_lasso(&a, &w), eval_lasso(&f, &w), "{text} on {w:?}");
        }
    }
}
