//! Model checking under the diagonal n-semantics, validity on a model, and
//! a bounded model finder.
//!
//! `box f` holds at `w` iff every tuple `(w, v1..vn)` has some `vi` with `f`;
//! `dia f` holds at `w` iff some tuple `(w, v1..vn)` has `f` at every `vi`.
//! Letters missing from a valuation are false.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{decode_tuple, NModel, PointedModel};
use crate::sat::{Lit, SolveResult, Solver, Var};
use crate::syntax::Formula;

/// Truth value of `f` at every world, indexed like `m.worlds()`.
pub fn truth_set(m: &NModel, f: &Formula) -> Vec<bool> {
    let k = m.len();
    match f {
        Formula::Letter(p) => (0..k).map(|w| m.holds(w, p)).collect(),
        Formula::Top => vec![true; k],
        Formula::Bottom => vec![false; k],
        Formula::Not(a) => truth_set(m, a).into_iter().map(|x| !x).collect(),
        Formula::And(a, b) => zip_with(truth_set(m, a), truth_set(m, b), |x, y| x && y),
        Formula::Or(a, b) => zip_with(truth_set(m, a), truth_set(m, b), |x, y| x || y),
        Formula::Implies(a, b) => zip_with(truth_set(m, a), truth_set(m, b), |x, y| !x || y),
        Formula::Iff(a, b) => zip_with(truth_set(m, a), truth_set(m, b), |x, y| x == y),
        Formula::Box(a) => box_step(m, &truth_set(m, a)),
        Formula::Diamond(a) => diamond_step(m, &truth_set(m, a)),
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

pub(crate) fn box_step(m: &NModel, inner: &[bool]) -> Vec<bool> {
    (0..m.len())
        .map(|w| m.successors(w).iter().all(|vs| vs.iter().any(|&v| inner[v])))
        .collect()
}

pub(crate) fn diamond_step(m: &NModel, inner: &[bool]) -> Vec<bool> {
    (0..m.len())
        .map(|w| m.successors(w).iter().any(|vs| vs.iter().all(|&v| inner[v])))
        .collect()
}

pub fn check(m: &NModel, w: &str, f: &Formula) -> Result<bool> {
    let i = m.world_index(w)?;
    Ok(truth_set(m, f)[i])
}

pub fn valid_on_model(m: &NModel, f: &Formula) -> bool {
    truth_set(m, f).into_iter().all(|x| x)
}

/// Memoizing evaluator for sweeping many formulas that share subformulas.
pub struct Evaluator<'m> {
    model: &'m NModel,
    cache: HashMap<Formula, Vec<bool>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m NModel) -> Evaluator<'m> {
        Evaluator {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn eval(&mut self, f: &Formula) -> Vec<bool> {
        if let Some(v) = self.cache.get(f) {
            return v.clone();
        }
        let m = self.model;
        let v = match f {
            Formula::Letter(_) | Formula::Top | Formula::Bottom => truth_set(m, f),
            Formula::Not(a) => self.eval(a).into_iter().map(|x| !x).collect(),
            Formula::And(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| x && y),
            Formula::Or(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| x || y),
            Formula::Implies(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| !x || y),
            Formula::Iff(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| x == y),
            Formula::Box(a) => {
                let inner = self.eval(a);
                box_step(m, &inner)
            }
            Formula::Diamond(a) => {
                let inner = self.eval(a);
                diamond_step(m, &inner)
            }
        };
        self.cache.insert(f.clone(), v.clone());
        v
    }

    pub fn holds(&mut self, w: usize, f: &Formula) -> bool {
        self.eval(f)[w]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    /// Least satisfying model in canonical order, pointed at its least
    /// satisfying world.
    Witness(Box<PointedModel>),
    /// No model with at most `max_worlds` worlds satisfies the formula.
    UnsatUpToBound { max_worlds: usize },
}

/// Searches models with `1..=max_worlds` worlds (worlds `w0, w1, ...`) and
/// valuations over `letters(f)` for one that satisfies `f` somewhere.
///
/// Canonical order: fewer worlds first; for a fixed world count, models are
/// compared as bit vectors (one bit per candidate tuple in lexicographic
/// order, then one bit per world and letter, world-major) with `0 < 1`.
/// The search is a complete SAT encoding per world count, with the least
/// model extracted bit by bit, so it covers exactly the space a plain
/// enumeration would.
///
/// `budget` caps the number of steps (generated clauses plus solver
/// conflicts); exceeding it is an error, never an unsat answer.
pub fn bounded_sat(f: &Formula, arity: usize, max_worlds: usize, budget: Option<u64>) -> Result<SatOutcome> {
    if arity == 0 {
        return Err(Error::InvalidArgument("arity must be >= 1".into()));
    }
    if max_worlds == 0 {
        return Err(Error::InvalidArgument("max_worlds must be >= 1".into()));
    }
    let letters: Vec<String> = f.letters().into_iter().collect();
    let mut steps = Steps { used: 0, budget };
    for k in 1..=max_worlds {
        if let Some(witness) = search_size(f, arity, k, &letters, &mut steps)? {
            return Ok(SatOutcome::Witness(Box::new(witness)));
        }
    }
    Ok(SatOutcome::UnsatUpToBound { max_worlds })
}

struct Steps {
    used: u64,
    budget: Option<u64>,
}

impl Steps {
    fn charge(&mut self, n: u64) -> Result<()> {
        self.used = self.used.saturating_add(n);
        match self.budget {
            Some(b) if self.used > b => Err(Error::BudgetExceeded { budget: b }),
            _ => Ok(()),
        }
    }

    fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.used))
    }
}

struct Encoding {
    solver: Solver,
    // Model bits in canonical order: relation tuples, then valuation.
    bits: Vec<Var>,
    tuples: Vec<Vec<usize>>,
}

fn search_size(
    f: &Formula,
    arity: usize,
    k: usize,
    letters: &[String],
    steps: &mut Steps,
) -> Result<Option<PointedModel>> {
    let tuple_count = (k as u64).checked_pow(arity as u32 + 1).ok_or(Error::BudgetExceeded {
        budget: steps.budget.unwrap_or(u64::MAX),
    })?;
    steps.charge(tuple_count)?;
    let mut enc = encode(f, arity, k, letters);
    steps.charge(enc.solver.num_clauses() as u64)?;

    let mut result = enc.solver.solve_with(&[], steps.remaining());
    steps.charge(enc.solver.conflicts())?;
    let mut seen_conflicts = enc.solver.conflicts();
    match result {
        SolveResult::Unsat => return Ok(None),
        SolveResult::Unknown => return Err(budget_error(steps)),
        SolveResult::Sat => {}
    }
    let mut current: Vec<bool> = enc.bits.iter().map(|&v| enc.solver.model_value(v)).collect();
    let mut assumptions: Vec<Lit> = Vec::with_capacity(enc.bits.len());
    for (i, &bit) in enc.bits.iter().enumerate() {
        if !current[i] {
            assumptions.push(Lit::negative(bit));
            continue;
        }
        assumptions.push(Lit::negative(bit));
        result = enc.solver.solve_with(&assumptions, steps.remaining());
        steps.charge(enc.solver.conflicts() - seen_conflicts)?;
        seen_conflicts = enc.solver.conflicts();
        match result {
            SolveResult::Sat => {
                current = enc.bits.iter().map(|&v| enc.solver.model_value(v)).collect();
            }
            SolveResult::Unsat => {
                assumptions.pop();
                assumptions.push(Lit::positive(bit));
            }
            SolveResult::Unknown => return Err(budget_error(steps)),
        }
    }

    let relation: Vec<Vec<usize>> = enc
        .tuples
        .iter()
        .zip(&current)
        .filter(|(_, &on)| on)
        .map(|(t, _)| t.clone())
        .collect();
    let offset = enc.tuples.len();
    let valuation: Vec<BTreeSet<String>> = (0..k)
        .map(|w| {
            letters
                .iter()
                .enumerate()
                .filter(|(j, _)| current[offset + w * letters.len() + j])
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect();
    let worlds: Vec<String> = (0..k).map(|i| format!("w{i}")).collect();
    let model = NModel::assemble(arity, worlds, relation, valuation);
    let truth = truth_set(&model, f);
    let point = truth
        .iter()
        .position(|&x| x)
        .ok_or_else(|| Error::Internal("SAT witness does not satisfy the formula".into()))?;
    let name = model.world_name(point).to_string();
    Ok(Some(PointedModel::new(model, name)?))
}

fn budget_error(steps: &Steps) -> Error {
    Error::BudgetExceeded {
        budget: steps.budget.unwrap_or(u64::MAX),
    }
}

/// Tseitin encoding of "some world of some k-world model satisfies f".
///
/// Box and diamond only depend on which worlds occur in a successor tuple,
/// so each world gets one variable per nonempty set of at most `arity`
/// worlds, true iff some tuple from that world has exactly that member set.
fn encode(f: &Formula, arity: usize, k: usize, letters: &[String]) -> Encoding {
    let mut solver = Solver::new();
    let tuple_count = k.pow(arity as u32 + 1);
    let mut tuples = Vec::with_capacity(tuple_count);
    let mut rel_vars = Vec::with_capacity(tuple_count);
    for code in 0..tuple_count {
        tuples.push(decode_tuple(code, k, arity + 1));
        rel_vars.push(solver.new_var());
    }
    let valuation_vars: Vec<Vec<Var>> = (0..k)
        .map(|_| letters.iter().map(|_| solver.new_var()).collect())
        .collect();
    let mut bits = rel_vars.clone();
    bits.extend(valuation_vars.iter().flatten().copied());

    // member-set groups per source world
    let mut groups: Vec<BTreeMap<u64, Vec<Var>>> = vec![BTreeMap::new(); k];
    for (t, &r) in tuples.iter().zip(&rel_vars) {
        let mask = t[1..].iter().fold(0u64, |acc, &v| acc | (1 << v));
        groups[t[0]].entry(mask).or_default().push(r);
    }
    let mut set_vars: Vec<Vec<(Vec<usize>, Lit)>> = Vec::with_capacity(k);
    for group in &groups {
        let mut per_world = Vec::new();
        for (&mask, members) in group {
            let s = solver.new_var();
            let mut big = vec![Lit::negative(s)];
            for &r in members {
                big.push(Lit::positive(r));
                solver.add_clause(&[Lit::negative(r), Lit::positive(s)]);
            }
            solver.add_clause(&big);
            let worlds = (0..k).filter(|v| mask >> v & 1 == 1).collect();
            per_world.push((worlds, Lit::positive(s)));
        }
        set_vars.push(per_world);
    }

    let truth = solver.new_var();
    solver.add_clause(&[Lit::positive(truth)]);
    let mut ctx = EncodeCtx {
        solver,
        k,
        letters,
        valuation_vars: &valuation_vars,
        set_vars: &set_vars,
        truth: Lit::positive(truth),
        memo: HashMap::new(),
    };
    let root_lits = ctx.encode(f);
    ctx.solver.add_clause(&root_lits);
    Encoding {
        solver: ctx.solver,
        bits,
        tuples,
    }
}

struct EncodeCtx<'a> {
    solver: Solver,
    k: usize,
    letters: &'a [String],
    valuation_vars: &'a [Vec<Var>],
    set_vars: &'a [Vec<(Vec<usize>, Lit)>],
    truth: Lit,
    memo: HashMap<Formula, Vec<Lit>>,
}

impl EncodeCtx<'_> {
    fn fresh(&mut self) -> Lit {
        Lit::positive(self.solver.new_var())
    }

    fn encode(&mut self, f: &Formula) -> Vec<Lit> {
        if let Some(v) = self.memo.get(f) {
            return v.clone();
        }
        let k = self.k;
        let out: Vec<Lit> = match f {
            Formula::Letter(p) => {
                let j = self.letters.iter().position(|l| l == p).expect("letter collected");
                (0..k).map(|w| Lit::positive(self.valuation_vars[w][j])).collect()
            }
            Formula::Top => vec![self.truth; k],
            Formula::Bottom => vec![!self.truth; k],
            Formula::Not(a) => self.encode(a).into_iter().map(|l| !l).collect(),
            Formula::And(a, b) => {
                let (xa, xb) = (self.encode(a), self.encode(b));
                (0..k).map(|w| self.and_gate(&[xa[w], xb[w]])).collect()
            }
            Formula::Or(a, b) => {
                let (xa, xb) = (self.encode(a), self.encode(b));
                (0..k).map(|w| !self.and_gate(&[!xa[w], !xb[w]])).collect()
            }
            Formula::Implies(a, b) => {
                let (xa, xb) = (self.encode(a), self.encode(b));
                (0..k).map(|w| !self.and_gate(&[xa[w], !xb[w]])).collect()
            }
            Formula::Iff(a, b) => {
                let (xa, xb) = (self.encode(a), self.encode(b));
                (0..k)
                    .map(|w| {
                        let fwd = !self.and_gate(&[xa[w], !xb[w]]);
                        let bwd = !self.and_gate(&[xb[w], !xa[w]]);
                        self.and_gate(&[fwd, bwd])
                    })
                    .collect()
            }
            Formula::Box(a) => {
                // box a at w  iff  no present member set avoids a entirely
                let xa = self.encode(a);
                (0..k)
                    .map(|w| {
                        let bad: Vec<Lit> = self.set_vars[w]
                            .iter()
                            .map(|(members, s)| {
                                let mut conj = vec![*s];
                                conj.extend(members.iter().map(|&u| !xa[u]));
                                conj
                            })
                            .collect::<Vec<_>>()
                            .into_iter()
                            .map(|conj| self.and_gate(&conj))
                            .collect();
                        let bad: Vec<Lit> = bad.into_iter().map(|l| !l).collect();
                        self.and_gate(&bad)
                    })
                    .collect()
            }
            Formula::Diamond(a) => {
                let xa = self.encode(a);
                (0..k)
                    .map(|w| {
                        let good: Vec<Lit> = self.set_vars[w]
                            .iter()
                            .map(|(members, s)| {
                                let mut conj = vec![*s];
                                conj.extend(members.iter().map(|&u| xa[u]));
                                conj
                            })
                            .collect::<Vec<_>>()
                            .into_iter()
                            .map(|conj| self.and_gate(&conj))
                            .collect();
                        let none: Vec<Lit> = good.into_iter().map(|l| !l).collect();
                        !self.and_gate(&none)
                    })
                    .collect()
            }
        };
        self.memo.insert(f.clone(), out.clone());
        out
    }

    /// Literal equivalent to the conjunction of `inputs`.
    fn and_gate(&mut self, inputs: &[Lit]) -> Lit {
        match inputs {
            [] => self.truth,
            [single] => *single,
            _ => {
                let x = self.fresh();
                let mut back = vec![x];
                for &i in inputs {
                    self.solver.add_clause(&[!x, i]);
                    back.push(!i);
                }
                self.solver.add_clause(&back);
                x
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn vacuous_box_and_diamond() {
        let m = NModel::build(2, &["a"], &[], &[]).unwrap();
        assert!(check(&m, "a", &f("box false")).unwrap());
        assert!(!check(&m, "a", &f("dia true")).unwrap());
    }

    #[test]
    fn diagonal_clauses() {
        // a -> (b, c) with p only at b
        let m = NModel::build(2, &["a", "b", "c"], &[&["a", "b", "c"]], &[("b", &["p"])]).unwrap();
        assert!(check(&m, "a", &f("box p")).unwrap());
        assert!(!check(&m, "a", &f("dia p")).unwrap());
        assert!(check(&m, "a", &f("box ~p")).unwrap());
        assert!(!check(&m, "a", &f("box (p & ~p)")).unwrap());
        assert!(!check(&m, "b", &f("q")).unwrap());
    }

    #[test]
    fn unknown_world_is_an_error() {
        let m = NModel::build(1, &["a"], &[], &[]).unwrap();
        assert_eq!(check(&m, "zz", &f("p")), Err(Error::UnknownWorld("zz".into())));
    }

    #[test]
    fn validity_on_a_model() {
        let m = NModel::build(1, &["a", "b"], &[&["a", "b"]], &[("a", &["p"])]).unwrap();
        assert!(valid_on_model(&m, &Formula::Top));
        assert!(!valid_on_model(&m, &f("p")));
    }

    #[test]
    fn evaluator_matches_direct_evaluation() {
        let alpha: BTreeSet<String> = ["p".to_string(), "q".to_string()].into();
        let m = crate::model::random_model(2, 4, 0.2, &alpha, 5);
        let mut ev = Evaluator::new(&m);
        for g in crate::syntax::enumerate_formulas(&alpha, 2, 5) {
            assert_eq!(ev.eval(&g), truth_set(&m, &g), "{g}");
        }
    }

    #[test]
    fn contradiction_is_unsat() {
        assert_eq!(
            bounded_sat(&f("p & ~p"), 1, 3, None).unwrap(),
            SatOutcome::UnsatUpToBound { max_worlds: 3 }
        );
    }

    #[test]
    fn aggregation_fails_on_two_models() {
        let out = bounded_sat(&f("box p & box q & ~box(p & q)"), 2, 5, None).unwrap();
        let SatOutcome::Witness(pm) = out else {
            panic!("expected witness")
        };
        assert_eq!(pm.model.len(), 2);
        assert!(check(&pm.model, &pm.point, &f("box p & box q & ~box(p & q)")).unwrap());
    }

    #[test]
    fn budget_exceeded_is_distinguishable() {
        let err = bounded_sat(&f("box p & box q & ~box(p & q)"), 2, 3, Some(3)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 3 }));
    }
}
