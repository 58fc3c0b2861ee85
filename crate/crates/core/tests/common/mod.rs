#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waml::model::{random_model, NModel};
use waml::Formula;

pub fn alphabet(letters: &[&str]) -> BTreeSet<String> {
    letters.iter().map(|s| s.to_string()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random formula over `letters` with modal depth at most `depth`.
pub fn random_formula(rng: &mut ChaCha8Rng, letters: &[&str], depth: usize, fuel: usize) -> Formula {
    if fuel == 0 {
        return leaf(rng, letters);
    }
    let choice = rng.random_range(0..if depth > 0 { 10 } else { 7 });
    let sub = |rng: &mut ChaCha8Rng, d: usize| random_formula(rng, letters, d, fuel - 1);
    match choice {
        0 | 1 => leaf(rng, letters),
        2 => Formula::not(sub(rng, depth)),
        3 => Formula::and(sub(rng, depth), sub(rng, depth)),
        4 => Formula::or(sub(rng, depth), sub(rng, depth)),
        5 => Formula::implies(sub(rng, depth), sub(rng, depth)),
        6 => Formula::iff(sub(rng, depth), sub(rng, depth)),
        7 | 8 => Formula::boxed(sub(rng, depth - 1)),
        _ => Formula::diamond(sub(rng, depth - 1)),
    }
}

fn leaf(rng: &mut ChaCha8Rng, letters: &[&str]) -> Formula {
    match rng.random_range(0..letters.len() + 2) {
        0 => Formula::Top,
        1 => Formula::Bottom,
        i => Formula::letter(letters[i - 2]),
    }
}

pub fn random_small_model(rng: &mut ChaCha8Rng, arity: usize, max_worlds: usize, letters: &[&str]) -> NModel {
    let worlds = rng.random_range(1..=max_worlds);
    let density = [0.1, 0.25, 0.4][rng.random_range(0..3)];
    random_model(arity, worlds, density, &alphabet(letters), rng.random())
}

/// All-pairs distance over the undirected first-to-successor graph, by Floyd-Warshall.
pub fn all_pairs_distance(m: &NModel) -> Vec<Vec<Option<usize>>> {
    let k = m.len();
    let mut d = vec![vec![None; k]; k];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for t in m.relation() {
        for &y in &t[1..] {
            if y != t[0] {
                d[t[0]][y] = Some(1);
                d[y][t[0]] = Some(1);
            }
        }
    }
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                if let (Some(x), Some(y)) = (d[i][via], d[via][j]) {
                    if d[i][j].is_none_or(|c| x + y < c) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Naive bisimulation test written directly from the three clauses.
pub fn naive_is_bisim(left: &NModel, right: &NModel, z: &BTreeSet<(usize, usize)>, alpha: &BTreeSet<String>) -> bool {
    let n = left.arity();
    // forth: every member of the right answer is related to some member of the left challenge
    let matched = |a: &[usize], b: &[usize]| (0..n).all(|j| (0..n).any(|i| z.contains(&(a[i], b[j]))));
    // back: every member of the left answer is related to some member of the right challenge
    let matched_back = |a: &[usize], b: &[usize]| (0..n).all(|i| (0..n).any(|j| z.contains(&(a[i], b[j]))));
    z.iter().all(|&(a, b)| {
        let inv = alpha.iter().all(|p| left.holds(a, p) == right.holds(b, p));
        let forth = left
            .successors(a)
            .iter()
            .all(|s| right.successors(b).iter().any(|t| matched(s, t)));
        let back = right
            .successors(b)
            .iter()
            .all(|t| left.successors(a).iter().any(|s| matched_back(s, t)));
        inv && forth && back
    })
}

pub fn names(m: &NModel, pairs: &BTreeSet<(usize, usize)>, other: &NModel) -> BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|&(a, b)| (m.world_name(a).to_string(), other.world_name(b).to_string()))
        .collect()
}

pub fn subst_map(pairs: Vec<(String, Formula)>) -> BTreeMap<String, Formula> {
    pairs.into_iter().collect()
}
