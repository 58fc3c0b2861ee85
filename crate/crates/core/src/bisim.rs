//! wa^n-bisimulations between n-models: verification of a given relation,
//! the greatest bisimulation by stratified refinement, the depth-k stages,
//! distinguishing-formula extraction and the tuple-membership distance.
//!
//! A relation `Z` is a wa^n-bisimulation over an alphabet when related worlds
//! agree on the alphabet and
//!
//! * forth: for `w Z w'` and a tuple `(w, v1..vn)` there is `(w', v1'..vn')`
//!   such that every `vj'` is related to *some* `vi`;
//! * back: for `w Z w'` and a tuple `(w', v1'..vn')` there is `(w, v1..vn)`
//!   such that every `vi` is related to *some* `vj'`.
//!
//! The indices on the two sides are independent.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::NModel;
use crate::semantics::truth_set;
use crate::syntax::Formula;

/// A set of world pairs between two models, with the alphabet the
/// valuation clause is checked against. Pairs are world indices.
#[derive(Clone, Debug)]
pub struct PairRelation<'m> {
    pub left: &'m NModel,
    pub right: &'m NModel,
    pub pairs: BTreeSet<(usize, usize)>,
    pub alphabet: BTreeSet<String>,
}

impl<'m> PairRelation<'m> {
    pub fn new(left: &'m NModel, right: &'m NModel, alphabet: BTreeSet<String>) -> Result<PairRelation<'m>> {
        left.check_same_arity(right)?;
        Ok(PairRelation {
            left,
            right,
            pairs: BTreeSet::new(),
            alphabet,
        })
    }

    /// Builds a relation from world names.
    pub fn from_names<S: AsRef<str>>(
        left: &'m NModel,
        right: &'m NModel,
        pairs: &[(S, S)],
        alphabet: BTreeSet<String>,
    ) -> Result<PairRelation<'m>> {
        let mut z = PairRelation::new(left, right, alphabet)?;
        for (a, b) in pairs {
            z.pairs
                .insert((left.world_index(a.as_ref())?, right.world_index(b.as_ref())?));
        }
        Ok(z)
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        match (self.left.world_index(a), self.right.world_index(b)) {
            (Ok(x), Ok(y)) => self.pairs.contains(&(x, y)),
            _ => false,
        }
    }

    pub fn named_pairs(&self) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|&(a, b)| {
                (
                    self.left.world_name(a).to_string(),
                    self.right.world_name(b).to_string(),
                )
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn matrix(&self) -> Matrix {
        let mut m = Matrix::new(self.left.len(), self.right.len());
        for &(a, b) in &self.pairs {
            m.set(a, b, true);
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    Inv,
    Forth,
    Back,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Inv => "inv",
            Clause::Forth => "forth",
            Clause::Back => "back",
        })
    }
}

/// First violation found by [`check_bisim`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimCounterexample {
    pub pair: (String, String),
    pub clause: Clause,
    /// The challenging tuple (left tuple for forth, right tuple for back).
    pub tuple: Vec<String>,
}

impl fmt::Display for BisimCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair ({}, {}) violates {}", self.pair.0, self.pair.1, self.clause)?;
        if !self.tuple.is_empty() {
            write!(f, " on tuple ({})", self.tuple.join(","))?;
        }
        Ok(())
    }
}

/// Dense boolean relation between left and right worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Matrix {
    cols: usize,
    bits: Vec<bool>,
}

impl Matrix {
    fn new(rows: usize, cols: usize) -> Matrix {
        Matrix {
            cols,
            bits: vec![false; rows * cols],
        }
    }

    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.cols + b]
    }

    fn set(&mut self, a: usize, b: usize, v: bool) {
        self.bits[a * self.cols + b] = v;
    }

    fn count(&self) -> usize {
        self.bits.iter().filter(|&&x| x).count()
    }
}

fn agrees(left: &NModel, a: usize, right: &NModel, b: usize, alphabet: &BTreeSet<String>) -> bool {
    alphabet.iter().all(|p| left.holds(a, p) == right.holds(b, p))
}

/// Some right tuple from `b` has every member related to a member of `challenge`.
fn forth_answer(right: &NModel, b: usize, challenge: &[usize], z: &Matrix) -> bool {
    right
        .successors(b)
        .iter()
        .any(|answer| answer.iter().all(|&y| challenge.iter().any(|&x| z.get(x, y))))
}

/// Some left tuple from `a` has every member related to a member of `challenge`.
fn back_answer(left: &NModel, a: usize, challenge: &[usize], z: &Matrix) -> bool {
    left.successors(a)
        .iter()
        .any(|answer| answer.iter().all(|&x| challenge.iter().any(|&y| z.get(x, y))))
}

/// First failing left tuple (forth) or right tuple (back) for the pair.
fn find_failure(left: &NModel, right: &NModel, a: usize, b: usize, z: &Matrix) -> Option<(Clause, Vec<usize>)> {
    for t in left.successors(a) {
        if !forth_answer(right, b, t, z) {
            return Some((Clause::Forth, t.clone()));
        }
    }
    for u in right.successors(b) {
        if !back_answer(left, a, u, z) {
            return Some((Clause::Back, u.clone()));
        }
    }
    None
}

/// Verifies the three bisimulation clauses for every pair, in pair order.
pub fn check_bisim(z: &PairRelation<'_>) -> Result<Option<BisimCounterexample>> {
    z.left.check_same_arity(z.right)?;
    if z.pairs.is_empty() {
        return Err(Error::EmptyRelation);
    }
    let matrix = z.matrix();
    let (left, right) = (z.left, z.right);
    for &(a, b) in &z.pairs {
        let pair = (left.world_name(a).to_string(), right.world_name(b).to_string());
        if !agrees(left, a, right, b, &z.alphabet) {
            return Ok(Some(BisimCounterexample {
                pair,
                clause: Clause::Inv,
                tuple: Vec::new(),
            }));
        }
        if let Some((clause, succ)) = find_failure(left, right, a, b, &matrix) {
            let (src, model) = match clause {
                Clause::Back => (b, right),
                _ => (a, left),
            };
            let tuple = std::iter::once(src)
                .chain(succ)
                .map(|w| model.world_name(w).to_string())
                .collect();
            return Ok(Some(BisimCounterexample { pair, clause, tuple }));
        }
    }
    Ok(None)
}

/// The refinement sequence `stage_0 ⊇ stage_1 ⊇ ...` down to its fixpoint.
///
/// Stage 0 relates worlds agreeing on the alphabet; stage k+1 keeps the
/// pairs of stage k whose forth and back clauses are answered within stage k.
pub struct Stratification<'m> {
    left: &'m NModel,
    right: &'m NModel,
    alphabet: BTreeSet<String>,
    stages: Vec<Matrix>,
}

impl<'m> Stratification<'m> {
    pub fn compute(left: &'m NModel, right: &'m NModel, alphabet: &BTreeSet<String>) -> Result<Stratification<'m>> {
        left.check_same_arity(right)?;
        let mut stage0 = Matrix::new(left.len(), right.len());
        for a in 0..left.len() {
            for b in 0..right.len() {
                stage0.set(a, b, agrees(left, a, right, b, alphabet));
            }
        }
        let mut stages = vec![stage0];
        loop {
            let prev = stages.last().expect("nonempty");
            let mut next = prev.clone();
            for a in 0..left.len() {
                for b in 0..right.len() {
                    if prev.get(a, b) && find_failure(left, right, a, b, prev).is_some() {
                        next.set(a, b, false);
                    }
                }
            }
            if next == *prev {
                break;
            }
            stages.push(next);
        }
        Ok(Stratification {
            left,
            right,
            alphabet: alphabet.clone(),
            stages,
        })
    }

    /// Index of the last distinct stage; every later stage equals it.
    pub fn fixpoint_stage(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn stage(&self, k: usize) -> PairRelation<'m> {
        let m = &self.stages[k.min(self.fixpoint_stage())];
        self.relation_of(m)
    }

    pub fn greatest(&self) -> PairRelation<'m> {
        self.stage(self.fixpoint_stage())
    }

    fn relation_of(&self, m: &Matrix) -> PairRelation<'m> {
        let mut pairs = BTreeSet::new();
        for a in 0..self.left.len() {
            for b in 0..self.right.len() {
                if m.get(a, b) {
                    pairs.insert((a, b));
                }
            }
        }
        PairRelation {
            left: self.left,
            right: self.right,
            pairs,
            alphabet: self.alphabet.clone(),
        }
    }

    fn in_stage(&self, k: usize, a: usize, b: usize) -> bool {
        self.stages[k.min(self.fixpoint_stage())].get(a, b)
    }

    /// Stage at which the pair was removed, `None` when it survives.
    pub fn death_stage(&self, a: usize, b: usize) -> Option<usize> {
        (0..self.stages.len()).find(|&k| !self.stages[k].get(a, b))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.stages.iter().map(Matrix::count).collect()
    }
}

/// Union of all wa^n-bisimulations over `alphabet` (possibly empty).
pub fn greatest_bisim<'m>(
    left: &'m NModel,
    right: &'m NModel,
    alphabet: &BTreeSet<String>,
) -> Result<PairRelation<'m>> {
    Ok(Stratification::compute(left, right, alphabet)?.greatest())
}

/// The depth-k stage of the refinement: pairs that are k-wa^n-bisimilar.
pub fn k_bisim<'m>(
    left: &'m NModel,
    right: &'m NModel,
    alphabet: &BTreeSet<String>,
    k: usize,
) -> Result<PairRelation<'m>> {
    Ok(Stratification::compute(left, right, alphabet)?.stage(k))
}

/// A formula over `alphabet` true at `w` in `left` and false at `v` in
/// `right`, or `None` when the two are bisimilar. The result has modal depth
/// at most the refinement stage at which the pair is removed and has been
/// re-checked by the model checker.
pub fn distinguishing_formula(
    left: &NModel,
    w: &str,
    right: &NModel,
    v: &str,
    alphabet: &BTreeSet<String>,
) -> Result<Option<Formula>> {
    let a = left.world_index(w)?;
    let b = right.world_index(v)?;
    let strat = Stratification::compute(left, right, alphabet)?;
    let Some(stage) = strat.death_stage(a, b) else {
        return Ok(None);
    };
    let mut extractor = Extractor {
        strat: &strat,
        memo: HashMap::new(),
    };
    let raw = extractor.distinguish(a, b);
    let simplified = simplify(&raw);
    for candidate in [&simplified, &raw] {
        let ok = truth_set(left, candidate)[a] && !truth_set(right, candidate)[b];
        if ok && candidate.modal_depth() <= stage {
            return Ok(Some(candidate.clone()));
        }
    }
    Err(Error::Internal(format!(
        "extracted formula `{raw}` does not distinguish ({w}, {v})"
    )))
}

struct Extractor<'s, 'm> {
    strat: &'s Stratification<'m>,
    memo: HashMap<(usize, usize), Formula>,
}

impl Extractor<'_, '_> {
    /// Formula true at left world `a`, false at right world `b`; the pair
    /// must be outside the greatest bisimulation.
    fn distinguish(&mut self, a: usize, b: usize) -> Formula {
        if let Some(f) = self.memo.get(&(a, b)) {
            return f.clone();
        }
        let strat = self.strat;
        let (left, right) = (strat.left, strat.right);
        let stage = strat.death_stage(a, b).expect("pair is not bisimilar");
        let f = if stage == 0 {
            let p = strat
                .alphabet
                .iter()
                .find(|p| left.holds(a, p) != right.holds(b, p))
                .expect("valuations disagree");
            if left.holds(a, p) {
                Formula::letter(p.as_str())
            } else {
                Formula::not(Formula::letter(p.as_str()))
            }
        } else {
            let prev = stage - 1;
            let in_prev = |x: usize, y: usize| strat.in_stage(prev, x, y);
            let forth = left.successors(a).iter().find(|t| {
                !right
                    .successors(b)
                    .iter()
                    .any(|u| u.iter().all(|&y| t.iter().any(|&x| in_prev(x, y))))
            });
            if let Some(t) = forth {
                // Every answer tuple from b has a member unrelated to all of t.
                let mut bad: Vec<usize> = Vec::new();
                for u in right.successors(b) {
                    let y = *u
                        .iter()
                        .find(|&&y| t.iter().all(|&x| !in_prev(x, y)))
                        .expect("answer tuple fails");
                    if !bad.contains(&y) {
                        bad.push(y);
                    }
                }
                let disjuncts: Vec<Formula> = t
                    .iter()
                    .map(|&x| {
                        if bad.is_empty() {
                            literal_type(left, x, &strat.alphabet)
                        } else {
                            Formula::conj(bad.iter().map(|&y| self.distinguish(x, y)))
                        }
                    })
                    .collect();
                Formula::diamond(Formula::disj(disjuncts))
            } else {
                let u = right
                    .successors(b)
                    .iter()
                    .find(|u| {
                        !left
                            .successors(a)
                            .iter()
                            .any(|t| t.iter().all(|&x| u.iter().any(|&y| in_prev(x, y))))
                    })
                    .expect("pair failed forth or back");
                let mut bad: Vec<usize> = Vec::new();
                for t in left.successors(a) {
                    let x = *t
                        .iter()
                        .find(|&&x| u.iter().all(|&y| !in_prev(x, y)))
                        .expect("answer tuple fails");
                    if !bad.contains(&x) {
                        bad.push(x);
                    }
                }
                // Built on the right: true at b, false at a.
                let disjuncts: Vec<Formula> = u
                    .iter()
                    .map(|&y| {
                        if bad.is_empty() {
                            literal_type(right, y, &strat.alphabet)
                        } else {
                            Formula::conj(bad.iter().map(|&x| Formula::not(self.distinguish(x, y))))
                        }
                    })
                    .collect();
                Formula::not(Formula::diamond(Formula::disj(disjuncts)))
            }
        };
        self.memo.insert((a, b), f.clone());
        f
    }
}

/// Conjunction of the alphabet literals true at `w`. Used when the opposing
/// world has no tuples at all, where any satisfiable choice would do.
fn literal_type(m: &NModel, w: usize, alphabet: &BTreeSet<String>) -> Formula {
    Formula::conj(alphabet.iter().map(|p| {
        if m.holds(w, p) {
            Formula::letter(p.as_str())
        } else {
            Formula::not(Formula::letter(p.as_str()))
        }
    }))
}

/// Flattens nested conjunctions and disjunctions, drops duplicate operands
/// and double negations, and folds constants.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::Letter(_) | Formula::Top | Formula::Bottom => f.clone(),
        Formula::Not(a) => match simplify(a) {
            Formula::Not(inner) => *inner,
            Formula::Top => Formula::Bottom,
            Formula::Bottom => Formula::Top,
            other => Formula::not(other),
        },
        Formula::And(..) => {
            let mut items = Vec::new();
            flatten(f, true, &mut items);
            let mut out: Vec<Formula> = Vec::new();
            for item in items.iter().map(|g| simplify(g)) {
                match item {
                    Formula::Top => {}
                    Formula::Bottom => return Formula::Bottom,
                    other if !out.contains(&other) => out.push(other),
                    _ => {}
                }
            }
            Formula::conj(out)
        }
        Formula::Or(..) => {
            let mut items = Vec::new();
            flatten(f, false, &mut items);
            let mut out: Vec<Formula> = Vec::new();
            for item in items.iter().map(|g| simplify(g)) {
                match item {
                    Formula::Bottom => {}
                    Formula::Top => return Formula::Top,
                    other if !out.contains(&other) => out.push(other),
                    _ => {}
                }
            }
            Formula::disj(out)
        }
        Formula::Implies(a, b) => Formula::implies(simplify(a), simplify(b)),
        Formula::Iff(a, b) => Formula::iff(simplify(a), simplify(b)),
        Formula::Box(a) => Formula::boxed(simplify(a)),
        Formula::Diamond(a) => Formula::diamond(simplify(a)),
    }
}

fn flatten<'f>(f: &'f Formula, conj: bool, out: &mut Vec<&'f Formula>) {
    match (f, conj) {
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            flatten(a, conj, out);
            flatten(b, conj, out);
        }
        _ => out.push(f),
    }
}

/// Distance along the undirected graph linking `x` to `y` whenever some tuple
/// starts at `x` and has `y` among its successors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl std::ops::Add for Distance {
    type Output = Distance;

    fn add(self, rhs: Distance) -> Distance {
        match (self, rhs) {
            (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a + b),
            _ => Distance::Infinite,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "infinity"),
        }
    }
}

/// Undirected adjacency of the derived binary relation.
pub fn adjacency(m: &NModel) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); m.len()];
    for t in m.relation() {
        for &y in &t[1..] {
            if y != t[0] {
                adj[t[0]].insert(y);
                adj[y].insert(t[0]);
            }
        }
    }
    adj
}

pub fn distance(m: &NModel, s: &str, t: &str) -> Result<Distance> {
    let (s, t) = (m.world_index(s)?, m.world_index(t)?);
    Ok(distances_from(&adjacency(m), s)[t])
}

/// Breadth-first distances from `source` to every world.
pub fn distances_from(adj: &[BTreeSet<usize>], source: usize) -> Vec<Distance> {
    let mut dist = vec![Distance::Infinite; adj.len()];
    dist[source] = Distance::Finite(0);
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        let Distance::Finite(dx) = dist[x] else { unreachable!() };
        for &y in &adj[x] {
            if dist[y] == Distance::Infinite {
                dist[y] = Distance::Finite(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Relation-JSON: `{"pairs": [["w", "v"], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub pairs: Vec<(String, String)>,
}

impl RelationSpec {
    pub fn from_relation(z: &PairRelation<'_>) -> RelationSpec {
        RelationSpec { pairs: z.named_pairs() }
    }
}
