mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use waml::semantics::{check, truth_set};
use waml::syntax::{enumerate_formulas, parse};
use waml::translate::{fol_eval, st, tptp_export, Role};
use waml::Formula;

use common::{alphabet, random_formula, random_small_model, rng};

const LETTERS: &[&str] = &["p", "q"];

fn at(x: &str, w: &str) -> BTreeMap<String, String> {
    BTreeMap::from([(x.to_string(), w.to_string())])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn translation_agrees_with_model_checking(seed in any::<u64>(), arity in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_small_model(&mut r, arity, 4, LETTERS);
        let f = random_formula(&mut r, LETTERS, 2, 4);
        let g = st(&f, arity, "x");
        let x = BTreeSet::from(["x".to_string()]);
        if f.letters().is_empty() && f.modal_depth() == 0 {
            prop_assert!(g.free_vars().is_subset(&x));
        } else {
            prop_assert_eq!(g.free_vars(), x);
        }
        let truth = truth_set(&m, &f);
        for (i, w) in m.worlds().iter().enumerate() {
            prop_assert_eq!(fol_eval(&m, &at("x", w), &g).unwrap(), truth[i], "{} at {}", f, w);
        }
    }

    #[test]
    fn duality_survives_translation(seed in any::<u64>(), arity in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_small_model(&mut r, arity, 4, LETTERS);
        let f = random_formula(&mut r, LETTERS, 1, 3);
        let dia = st(&Formula::diamond(f.clone()), arity, "x");
        let dual = st(&Formula::not(Formula::boxed(Formula::not(f))), arity, "x");
        for w in m.worlds() {
            prop_assert_eq!(
                fol_eval(&m, &at("x", w), &dia).unwrap(),
                fol_eval(&m, &at("x", w), &dual).unwrap()
            );
        }
    }
}

#[test]
fn enumerated_corpus_translates_faithfully() {
    let alpha = alphabet(LETTERS);
    let corpus: Vec<Formula> = enumerate_formulas(&alpha, 2, 5).collect();
    let mut r = rng(11);
    for arity in 1..=2 {
        let m = random_small_model(&mut r, arity, 3, LETTERS);
        for f in &corpus {
            let g = st(f, arity, "x");
            for w in m.worlds() {
                assert_eq!(fol_eval(&m, &at("x", w), &g).unwrap(), check(&m, w, f).unwrap(), "{f}");
            }
        }
    }
}

#[test]
fn unbound_variable_and_arity_errors() {
    let m = random_small_model(&mut rng(1), 2, 2, LETTERS);
    let g = st(&parse("box p").unwrap(), 2, "x");
    assert!(fol_eval(&m, &BTreeMap::new(), &g).is_err());
    let wrong = st(&parse("box p").unwrap(), 3, "x");
    assert!(fol_eval(&m, &at("x", "w0"), &wrong).is_err());
}

#[test]
fn tptp_grounds_the_free_variable() {
    let g = st(&parse("dia (p & ~q)").unwrap(), 1, "x");
    let text = tptp_export(&g, Role::Conjecture, "goal", &at("x", "c0")).unwrap();
    assert!(text.starts_with("fof(goal, conjecture, "), "{text}");
    assert!(text.ends_with(")."), "{text}");
    assert!(text.contains("r(c0,Y1)"), "{text}");
    assert!(!text.contains('x'), "{text}");
}
