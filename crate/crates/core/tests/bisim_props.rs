mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use waml::bisim::{
    adjacency, check_bisim, distances_from, distinguishing_formula, greatest_bisim, k_bisim, Distance, PairRelation,
    Stratification,
};
use waml::fixtures::{bisimilar_pair, counterexample_models, z_pairs, BISIMILAR_PAIR_Z};
use waml::model::NModel;
use waml::semantics::{check, Evaluator};
use waml::syntax::enumerate_formulas;

use common::{all_pairs_distance, alphabet, naive_is_bisim, random_small_model, rng};

fn model_pair(seed: u64, arity: usize, max_worlds: usize, letters: &[&str]) -> (NModel, NModel) {
    let mut r = rng(seed);
    let left = random_small_model(&mut r, arity, max_worlds, letters);
    let right = if seed.is_multiple_of(3) {
        left.clone()
    } else {
        random_small_model(&mut r, arity, max_worlds, letters)
    };
    (left, right)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn bisimilar_worlds_agree(seed in any::<u64>()) {
        let (l, r) = model_pair(seed, 2, 4, &["p", "q"]);
        let alpha = alphabet(&["p", "q"]);
        let z = greatest_bisim(&l, &r, &alpha).unwrap();
        let (mut el, mut er) = (Evaluator::new(&l), Evaluator::new(&r));
        for f in enumerate_formulas(&alpha, 2, 6) {
            let (tl, tr) = (el.eval(&f), er.eval(&f));
            for &(a, b) in &z.pairs {
                prop_assert_eq!(tl[a], tr[b], "{} at ({}, {})", f, a, b);
            }
        }
    }

    #[test]
    fn non_bisimilar_worlds_are_separated(seed in any::<u64>(), arity in 1usize..=3) {
        let (l, r) = model_pair(seed, arity, 4, &["p"]);
        let alpha = alphabet(&["p"]);
        let strat = Stratification::compute(&l, &r, &alpha).unwrap();
        let z = strat.greatest();
        for a in 0..l.len() {
            for b in 0..r.len() {
                let (wa, wb) = (l.world_name(a), r.world_name(b));
                let d = distinguishing_formula(&l, wa, &r, wb, &alpha).unwrap();
                match d {
                    None => prop_assert!(z.pairs.contains(&(a, b))),
                    Some(f) => {
                        prop_assert!(!z.pairs.contains(&(a, b)));
                        prop_assert!(check(&l, wa, &f).unwrap());
                        prop_assert!(!check(&r, wb, &f).unwrap());
                        prop_assert!(f.letters().is_subset(&alpha));
                        prop_assert!(f.modal_depth() <= strat.death_stage(a, b).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn greatest_is_a_bisimulation(seed in any::<u64>(), arity in 1usize..=3) {
        let (l, r) = model_pair(seed, arity, 4, &["p"]);
        let alpha = alphabet(&["p"]);
        let z = greatest_bisim(&l, &r, &alpha).unwrap();
        prop_assert!(naive_is_bisim(&l, &r, &z.pairs, &alpha));
        if !z.is_empty() {
            prop_assert!(check_bisim(&z).unwrap().is_none());
        }
    }

    #[test]
    fn stages_shrink_to_the_greatest(seed in any::<u64>()) {
        let (l, r) = model_pair(seed, 2, 5, &["p"]);
        let alpha = alphabet(&["p"]);
        let strat = Stratification::compute(&l, &r, &alpha).unwrap();
        for k in 0..strat.fixpoint_stage() + 2 {
            let (a, b) = (strat.stage(k).pairs, strat.stage(k + 1).pairs);
            prop_assert!(b.is_subset(&a));
        }
        let far = k_bisim(&l, &r, &alpha, strat.fixpoint_stage() + 3).unwrap();
        prop_assert_eq!(far.pairs, strat.greatest().pairs);
    }

    #[test]
    fn self_bisimilarity_is_an_equivalence(seed in any::<u64>(), arity in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_small_model(&mut r, arity, 5, &["p"]);
        let z = greatest_bisim(&m, &m, &alphabet(&["p"])).unwrap().pairs;
        for a in 0..m.len() {
            prop_assert!(z.contains(&(a, a)));
        }
        for &(a, b) in &z {
            prop_assert!(z.contains(&(b, a)));
            for &(c, d) in &z {
                if b == c {
                    prop_assert!(z.contains(&(a, d)));
                }
            }
        }
    }

    #[test]
    fn distance_matches_floyd_warshall_and_triangle(seed in any::<u64>(), arity in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_small_model(&mut r, arity, 6, &["p"]);
        let oracle = all_pairs_distance(&m);
        let adj = adjacency(&m);
        let rows: Vec<Vec<Distance>> = (0..m.len()).map(|s| distances_from(&adj, s)).collect();
        for x in 0..m.len() {
            for y in 0..m.len() {
                let expected = oracle[x][y].map_or(Distance::Infinite, Distance::Finite);
                prop_assert_eq!(rows[x][y], expected);
                for z in 0..m.len() {
                    prop_assert!(rows[x][z] + rows[z][y] >= rows[x][y]);
                }
            }
        }
    }
}

/// Union of all relations that pass the naive clause check, by brute force.
fn union_of_all_bisims(l: &NModel, r: &NModel, alpha: &BTreeSet<String>) -> BTreeSet<(usize, usize)> {
    let cells: Vec<(usize, usize)> = (0..l.len()).flat_map(|a| (0..r.len()).map(move |b| (a, b))).collect();
    let mut union = BTreeSet::new();
    for mask in 0u32..(1 << cells.len()) {
        let z: BTreeSet<(usize, usize)> = cells
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, c)| *c)
            .collect();
        if naive_is_bisim(l, r, &z, alpha) {
            union.extend(z);
        }
    }
    union
}

#[test]
fn greatest_equals_union_of_all_bisimulations() {
    let alpha = alphabet(&["p"]);
    let mut nonempty = 0;
    for seed in 0..120 {
        let mut r = rng(seed);
        let arity = 1 + (seed as usize % 2);
        let l = random_small_model(&mut r, arity, 3, &["p"]);
        let rt = random_small_model(&mut r, arity, 3, &["p"]);
        let expected = union_of_all_bisims(&l, &rt, &alpha);
        let got = greatest_bisim(&l, &rt, &alpha).unwrap().pairs;
        assert_eq!(got, expected, "seed {seed}");
        nonempty += usize::from(!got.is_empty());
    }
    assert!(nonempty > 30, "only {nonempty} nonempty cases");
}

#[test]
fn exhibited_relations_are_contained_in_the_greatest() {
    let (l, r) = bisimilar_pair();
    let alpha = alphabet(&["p"]);
    let z = PairRelation::from_names(&l, &r, BISIMILAR_PAIR_Z, alpha.clone()).unwrap();
    assert!(check_bisim(&z).unwrap().is_none());
    assert!(z.pairs.is_subset(&greatest_bisim(&l, &r, &alpha).unwrap().pairs));
    for n in 2..=5 {
        let (m, k) = counterexample_models(n).unwrap();
        let z = PairRelation::from_names(&m, &k, &z_pairs(n).unwrap(), alpha.clone()).unwrap();
        assert!(check_bisim(&z).unwrap().is_none(), "n={n}");
        assert!(
            z.pairs.is_subset(&greatest_bisim(&m, &k, &alpha).unwrap().pairs),
            "n={n}"
        );
    }
}

#[test]
fn counterexample_roots_survive_every_stage() {
    let alpha = alphabet(&["p"]);
    let (m, k) = counterexample_models(2).unwrap();
    let strat = Stratification::compute(&m, &k, &alpha).unwrap();
    for stage in 0..=strat.fixpoint_stage() + 1 {
        assert!(strat.stage(stage).contains("w", "v"), "stage {stage}");
    }
}

#[test]
fn arity_mismatch_is_rejected() {
    let mut r = rng(1);
    let a = random_small_model(&mut r, 1, 2, &["p"]);
    let b = random_small_model(&mut r, 2, 2, &["p"]);
    assert!(greatest_bisim(&a, &b, &alphabet(&["p"])).is_err());
}
