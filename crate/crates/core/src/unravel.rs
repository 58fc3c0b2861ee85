//! Bounded n-ary unraveling of a pointed model.
//!
//! A node is a path of steps `(v⃗, i)`: an n-vector of worlds with a 1-based
//! index marking the current world `r(s) = v⃗[i]`. The root is `(⟨w..w⟩, 1)`.
//! The children of `s` are `s + (v⃗, i)` for every tuple `(r(s), v⃗)` and every
//! index `i`, and `(s0, s1..sn)` is a tuple of the unraveling iff every `si`
//! is a child of `s0` and `(r(s0), r(s1)..r(sn))` is in the original relation.
//!
//! World ids render paths as `w#u,t:2#w,v:1`: the root world, then one
//! `#vector:index` segment per step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::NModel;

/// Default cap on the number of nodes plus tuples an unraveling may create.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub tuple: Vec<usize>,
    /// 1-based position of the current world in `tuple`.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnravelNode {
    pub path: Vec<Step>,
}

impl UnravelNode {
    pub fn root(w: usize, arity: usize) -> UnravelNode {
        UnravelNode {
            path: vec![Step {
                tuple: vec![w; arity],
                index: 1,
            }],
        }
    }

    /// The original world this node projects to.
    pub fn r(&self) -> usize {
        let last = self.path.last().expect("paths are nonempty");
        last.tuple[last.index - 1]
    }

    pub fn level(&self) -> usize {
        self.path.len() - 1
    }

    fn child(&self, tuple: &[usize], index: usize) -> UnravelNode {
        let mut path = self.path.clone();
        path.push(Step {
            tuple: tuple.to_vec(),
            index,
        });
        UnravelNode { path }
    }

    pub fn id(&self, m: &NModel) -> String {
        let mut out = m.world_name(self.path[0].tuple[0]).to_string();
        for step in &self.path[1..] {
            out.push('#');
            let names: Vec<&str> = step.tuple.iter().map(|&v| m.world_name(v)).collect();
            out.push_str(&names.join(","));
            out.push(':');
            out.push_str(&step.index.to_string());
        }
        out
    }
}

/// The bounded unraveling `M_w|_depth` with its projection map.
#[derive(Clone, Debug)]
pub struct Unraveling {
    pub model: NModel,
    pub root: String,
    /// Node id to original world id.
    pub rmap: BTreeMap<String, String>,
    pub depth: usize,
    /// Level of each node, indexed like `model.worlds()`.
    pub levels: Vec<usize>,
}

impl Unraveling {
    /// Node ids at level `depth`; these have no outgoing tuples by construction.
    pub fn frontier(&self) -> Vec<String> {
        self.model
            .worlds()
            .iter()
            .zip(&self.levels)
            .filter(|(_, &l)| l == self.depth)
            .map(|(w, _)| w.clone())
            .collect()
    }

    /// Parent of a node in the binary skeleton, `None` for the root.
    pub fn parent(node: &str) -> Option<&str> {
        node.rfind('#').map(|i| &node[..i])
    }
}

pub fn unravel(m: &NModel, w: &str, depth: usize) -> Result<Unraveling> {
    unravel_with_budget(m, w, depth, DEFAULT_NODE_BUDGET)
}

/// As [`unravel`], failing with [`Error::BudgetExceeded`] once more than
/// `budget` nodes and tuples would be created.
pub fn unravel_with_budget(m: &NModel, w: &str, depth: usize, budget: u64) -> Result<Unraveling> {
    let n = m.arity();
    let root = UnravelNode::root(m.world_index(w)?, n);
    let mut nodes = vec![root];
    let mut relation: Vec<Vec<usize>> = Vec::new();
    let mut used: u64 = 1;
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &s in &frontier {
            let rs = nodes[s].r();
            // children grouped by the world they project to
            let mut by_world: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for v in m.successors(rs) {
                for i in 1..=n {
                    used += 1;
                    if used > budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                    let c = nodes.len();
                    nodes.push(nodes[s].child(v, i));
                    by_world.entry(v[i - 1]).or_default().push(c);
                    next.push(c);
                }
            }
            for v in m.successors(rs) {
                let choices: Vec<&Vec<usize>> = v.iter().map(|x| &by_world[x]).collect();
                let mut pick = vec![0usize; n];
                loop {
                    used += 1;
                    if used > budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                    let mut t = Vec::with_capacity(n + 1);
                    t.push(s);
                    t.extend((0..n).map(|k| choices[k][pick[k]]));
                    relation.push(t);
                    if !advance(&mut pick, &choices) {
                        break;
                    }
                }
            }
        }
        frontier = next;
    }
    let ids: Vec<String> = nodes.iter().map(|s| s.id(m)).collect();
    let valuation: Vec<BTreeSet<String>> = nodes.iter().map(|s| m.valuation(s.r()).clone()).collect();
    let rmap = nodes
        .iter()
        .zip(&ids)
        .map(|(s, id)| (id.clone(), m.world_name(s.r()).to_string()))
        .collect();
    let levels = nodes.iter().map(UnravelNode::level).collect();
    Ok(Unraveling {
        root: ids[0].clone(),
        model: NModel::assemble(n, ids, relation, valuation),
        rmap,
        depth,
        levels,
    })
}

/// Odometer step over the cartesian product; false once it wraps around.
fn advance(pick: &mut [usize], choices: &[&Vec<usize>]) -> bool {
    for k in (0..pick.len()).rev() {
        pick[k] += 1;
        if pick[k] < choices[k].len() {
            return true;
        }
        pick[k] = 0;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmorphismCondition {
    Valuation,
    Forth,
    Back,
}

impl fmt::Display for PmorphismCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PmorphismCondition::Valuation => "valuation",
            PmorphismCondition::Forth => "forth",
            PmorphismCondition::Back => "back",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmorphismFailure {
    pub condition: PmorphismCondition,
    pub world: String,
    /// Source tuple for forth, target tuple for back, empty for valuation.
    pub tuple: Vec<String>,
}

impl fmt::Display for PmorphismFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at {}", self.condition, self.world)?;
        if !self.tuple.is_empty() {
            write!(f, " on tuple ({})", self.tuple.join(","))?;
        }
        Ok(())
    }
}

/// Checks that `f` is a p-morphism from `source` onto `target`: valuations
/// are preserved, source tuples map to target tuples, and every target tuple
/// from `f(s)` lifts to a source tuple from `s`.
pub fn check_pmorphism(
    source: &NModel,
    target: &NModel,
    f: &BTreeMap<String, String>,
) -> Result<Option<PmorphismFailure>> {
    source.check_same_arity(target)?;
    let mut map = Vec::with_capacity(source.len());
    for s in source.worlds() {
        let image = f
            .get(s)
            .ok_or_else(|| Error::InvalidArgument(format!("map is undefined on `{s}`")))?;
        map.push(target.world_index(image)?);
    }
    let names = |m: &NModel, t: &[usize]| -> Vec<String> { t.iter().map(|&x| m.world_name(x).to_string()).collect() };
    for (s, &fs) in map.iter().enumerate() {
        if source.valuation(s) != target.valuation(fs) {
            return Ok(Some(PmorphismFailure {
                condition: PmorphismCondition::Valuation,
                world: source.world_name(s).to_string(),
                tuple: Vec::new(),
            }));
        }
    }
    for t in source.relation() {
        let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
        if !target.contains_tuple(&image) {
            return Ok(Some(PmorphismFailure {
                condition: PmorphismCondition::Forth,
                world: source.world_name(t[0]).to_string(),
                tuple: names(source, t),
            }));
        }
    }
    for (s, &fs) in map.iter().enumerate() {
        let lifted: BTreeSet<Vec<usize>> = source
            .successors(s)
            .iter()
            .map(|v| v.iter().map(|&x| map[x]).collect())
            .collect();
        for u in target.successors(fs) {
            if !lifted.contains(u) {
                let mut tuple = vec![target.world_name(fs).to_string()];
                tuple.extend(names(target, u));
                return Ok(Some(PmorphismFailure {
                    condition: PmorphismCondition::Back,
                    world: source.world_name(s).to_string(),
                    tuple,
                }));
            }
        }
    }
    Ok(None)
}

/// Restriction of a model to the given worlds (tuples leaving the set are dropped).
pub fn restrict(m: &NModel, keep: &BTreeSet<String>) -> NModel {
    let kept: Vec<usize> = (0..m.len()).filter(|&w| keep.contains(m.world_name(w))).collect();
    let mut new_index = vec![usize::MAX; m.len()];
    for (i, &w) in kept.iter().enumerate() {
        new_index[w] = i;
    }
    let relation = m
        .relation()
        .iter()
        .filter(|t| t.iter().all(|&x| new_index[x] != usize::MAX))
        .map(|t| t.iter().map(|&x| new_index[x]).collect())
        .collect();
    NModel::assemble(
        m.arity(),
        kept.iter().map(|&w| m.world_name(w).to_string()).collect(),
        relation,
        kept.iter().map(|&w| m.valuation(w).clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn depth_zero_is_a_single_root() {
        let m = fixtures::cycle_model();
        let u = unravel(&m, "w", 0).unwrap();
        assert_eq!(u.model.worlds(), &["w".to_string()]);
        assert!(u.model.relation().is_empty());
        assert_eq!(u.rmap["w"], "w");
    }

    #[test]
    fn cycle_first_level() {
        let m = fixtures::cycle_model();
        let u = unravel(&m, "w", 1).unwrap();
        let level1: Vec<&String> = u
            .model
            .worlds()
            .iter()
            .zip(&u.levels)
            .filter(|(_, &l)| l == 1)
            .map(|(w, _)| w)
            .collect();
        assert_eq!(level1, vec!["w#u,t:1", "w#u,t:2"]);
        assert_eq!(u.rmap["w#u,t:1"], "u");
        assert_eq!(u.rmap["w#u,t:2"], "t");
        assert_eq!(u.model.relation().len(), 1);
    }

    #[test]
    fn cycle_second_level() {
        let m = fixtures::cycle_model();
        let u = unravel(&m, "w", 2).unwrap();
        let idx = |s: &str| u.model.world_index(s).unwrap();
        assert!(u
            .model
            .contains_tuple(&[idx("w#u,t:2"), idx("w#u,t:2#w,v:1"), idx("w#u,t:2#w,v:2")]));
        let kids: Vec<&String> = u
            .model
            .worlds()
            .iter()
            .filter(|w| Unraveling::parent(w) == Some("w#u,t:2"))
            .collect();
        assert_eq!(kids, vec!["w#u,t:2#w,v:1", "w#u,t:2#w,v:2"]);
        // (u,t,u) from the left node: its children are ⟨t,u⟩ with both indices
        assert!(u
            .model
            .contains_tuple(&[idx("w#u,t:1"), idx("w#u,t:1#t,u:1"), idx("w#u,t:1#t,u:2")]));
        assert_eq!(u.frontier().len(), 4);
    }

    #[test]
    fn repeated_worlds_give_product_tuples() {
        // (a, b, b): both children project to b, so all four combinations are tuples
        let m = NModel::build(2, &["a", "b"], &[&["a", "b", "b"]], &[]).unwrap();
        let u = unravel(&m, "a", 1).unwrap();
        assert_eq!(u.model.relation().len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let m = fixtures::cycle_model();
        assert_eq!(
            unravel_with_budget(&m, "w", 6, 20).unwrap_err(),
            Error::BudgetExceeded { budget: 20 }
        );
        assert!(unravel(&m, "nope", 1).is_err());
    }

    #[test]
    fn identity_is_a_pmorphism() {
        let m = fixtures::cycle_model();
        let id = m.worlds().iter().map(|w| (w.clone(), w.clone())).collect();
        assert_eq!(check_pmorphism(&m, &m, &id).unwrap(), None);
    }

    #[test]
    fn acyclic_unraveling_projects_by_pmorphism() {
        let m = NModel::build(
            2,
            &["a", "b", "c", "d"],
            &[&["a", "b", "c"], &["a", "c", "c"], &["b", "d", "d"]],
            &[("b", &["p"]), ("d", &["p", "q"])],
        )
        .unwrap();
        let u = unravel(&m, "a", 3).unwrap();
        assert!(u.frontier().is_empty());
        let reach: BTreeSet<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let target = restrict(&m, &reach);
        assert_eq!(check_pmorphism(&u.model, &target, &u.rmap).unwrap(), None);
    }

    #[test]
    fn truncated_cycle_fails_back_at_the_frontier() {
        let m = fixtures::cycle_model();
        let u = unravel(&m, "w", 2).unwrap();
        let cex = check_pmorphism(&u.model, &m, &u.rmap).unwrap().unwrap();
        assert_eq!(cex.condition, PmorphismCondition::Back);
        assert!(u.frontier().contains(&cex.world));
    }

    #[test]
    fn unmapped_world_is_an_error() {
        let m = fixtures::cycle_model();
        assert!(check_pmorphism(&m, &m, &BTreeMap::new()).is_err());
    }
}
