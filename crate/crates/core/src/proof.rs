//! Line-by-line checking of Hilbert-style derivations in K_n.
//!
//! Propositional reasoning is decided by truth tables after abstraction:
//! `dia g` is first rewritten to `~box~g`, then every maximal boxed
//! subformula becomes an atom (structurally equal boxes share one atom).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::syntax::{parse, Formula};

/// Upper bound on distinct abstracted atoms in one truth-table check.
pub const MAX_ATOMS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Justification {
    /// Propositional tautology.
    Taut,
    /// Instance of K_n with `subst` defined on exactly `p0..pn`.
    KnAxiom { subst: BTreeMap<String, Formula> },
    /// From line `premise` (φ) and line `implication` (φ → ψ), infer ψ.
    MP { premise: usize, implication: usize },
    /// From φ infer `box φ`.
    Nec { line: usize },
    /// From φ → ψ infer `box φ → box ψ`.
    RM { line: usize },
    /// From φ ↔ ψ (an earlier line, or a tautology given inline) infer `box φ ↔ box ψ`.
    RE(ReSource),
    /// Tautological consequence of the cited lines. Each `re` pair (a, b)
    /// must be a tautological equivalence and contributes `box a ↔ box b` as
    /// an extra premise; each `rm` pair must be a tautological implication
    /// and contributes `box a → box b`.
    PLFrom {
        from: Vec<usize>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        re: Vec<(Formula, Formula)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rm: Vec<(Formula, Formula)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReSource {
    Line { line: usize },
    Pair { pair: (Formula, Formula) },
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match self {
            Justification::Taut => write!(f, "Taut"),
            Justification::KnAxiom { .. } => write!(f, "K_n"),
            Justification::MP { premise, implication } => write!(f, "MP {premise},{implication}"),
            Justification::Nec { line } => write!(f, "Nec {line}"),
            Justification::RM { line } => write!(f, "RM {line}"),
            Justification::RE(ReSource::Line { line }) => write!(f, "RE {line}"),
            Justification::RE(ReSource::Pair { .. }) => write!(f, "RE"),
            Justification::PLFrom { from, re, rm } => {
                write!(f, "PL {}", list(from))?;
                if !re.is_empty() {
                    write!(f, ", RE")?;
                }
                if !rm.is_empty() {
                    write!(f, ", RM")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofLine {
    pub formula: Formula,
    pub just: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofScript {
    pub arity: usize,
    pub lines: Vec<ProofLine>,
}

impl ProofScript {
    pub fn new(arity: usize) -> ProofScript {
        ProofScript {
            arity,
            lines: Vec::new(),
        }
    }

    /// Appends a line and returns its 1-based number.
    pub fn push(&mut self, formula: Formula, just: Justification) -> usize {
        self.lines.push(ProofLine { formula, just });
        self.lines.len()
    }

    pub fn theorem(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    pub fn from_json(text: &[u8]) -> Result<ProofScript> {
        crate::model::from_json_bytes(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scripts serialize") + "\n"
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, line) in self.lines.iter().enumerate() {
            writeln!(f, "{:>3}. {}    [{}]", i + 1, line.formula, line.just)?;
        }
        Ok(())
    }
}

/// First line that fails to validate, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvalidLine {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for InvalidLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// The K_n instance `box p0 & ... & box pn -> box OR_{i<j} (p_i & p_j)` with
/// the disjuncts in lexicographic (i, j) order.
pub fn kn_axiom(arity: usize, subst: &BTreeMap<String, Formula>) -> Result<Formula> {
    let args: Vec<Formula> = (0..=arity)
        .map(|i| {
            let key = format!("p{i}");
            subst.get(&key).cloned().ok_or(Error::IncompleteSubstitution(key))
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for i in 0..=arity {
        for j in i + 1..=arity {
            pairs.push(Formula::and(args[i].clone(), args[j].clone()));
        }
    }
    Ok(Formula::implies(
        Formula::conj(args.iter().cloned().map(Formula::boxed)),
        Formula::boxed(Formula::disj(pairs)),
    ))
}

pub fn identity_substitution(arity: usize) -> BTreeMap<String, Formula> {
    (0..=arity)
        .map(|i| (format!("p{i}"), Formula::letter(format!("p{i}"))))
        .collect()
}

/// Validates every line in order. `Ok(None)` means the script is a proof.
pub fn check_script(s: &ProofScript) -> Result<Option<InvalidLine>> {
    for (k, line) in s.lines.iter().enumerate() {
        let number = k + 1;
        if let Some(reason) = check_line(s, k, line)? {
            return Ok(Some(InvalidLine { line: number, reason }));
        }
    }
    Ok(None)
}

fn check_line(s: &ProofScript, k: usize, line: &ProofLine) -> Result<Option<String>> {
    macro_rules! fail {
        ($($arg:tt)*) => {
            return Ok(Some(format!($($arg)*)))
        };
    }
    macro_rules! earlier {
        ($i:expr) => {{
            let i: usize = $i;
            if i == 0 || i > k {
                fail!("reference to line {i}, which is not an earlier line");
            }
            &s.lines[i - 1].formula
        }};
    }
    let target = &line.formula;
    let boxed_pair = |a: &Formula, b: &Formula, iff: bool| {
        let (x, y) = (Formula::boxed(a.clone()), Formula::boxed(b.clone()));
        if iff {
            Formula::iff(x, y)
        } else {
            Formula::implies(x, y)
        }
    };
    match &line.just {
        Justification::Taut => {
            if !is_tautology(target)? {
                fail!("not a propositional tautology");
            }
        }
        Justification::KnAxiom { subst } => {
            let expected: Vec<String> = (0..=s.arity).map(|i| format!("p{i}")).collect();
            let mut wanted: Vec<&String> = expected.iter().collect();
            wanted.sort();
            if subst.keys().collect::<Vec<_>>() != wanted {
                fail!("substitution must be defined on exactly {}", expected.join(", "));
            }
            if kn_axiom(s.arity, subst)? != *target {
                fail!("not the K_{} instance under the given substitution", s.arity);
            }
        }
        Justification::MP { premise, implication } => {
            let a = earlier!(*premise);
            match earlier!(*implication) {
                Formula::Implies(x, y) if **x == *a && **y == *target => {}
                _ => fail!("line {implication} is not line {premise} implying this line"),
            }
        }
        Justification::Nec { line: i } => {
            if Formula::boxed(earlier!(*i).clone()) != *target {
                fail!("not the necessitation of line {i}");
            }
        }
        Justification::RM { line: i } => match earlier!(*i) {
            Formula::Implies(a, b) if boxed_pair(a, b, false) == *target => {}
            _ => fail!("not box-monotonicity applied to line {i}"),
        },
        Justification::RE(source) => {
            let (a, b) = match source {
                ReSource::Line { line: i } => match earlier!(*i) {
                    Formula::Iff(a, b) => ((**a).clone(), (**b).clone()),
                    _ => fail!("line {i} is not a biconditional"),
                },
                ReSource::Pair { pair: (a, b) } => {
                    if !is_tautology(&Formula::iff(a.clone(), b.clone()))? {
                        fail!("`{a}` and `{b}` are not tautologically equivalent");
                    }
                    (a.clone(), b.clone())
                }
            };
            if boxed_pair(&a, &b, true) != *target {
                fail!("not the boxed form of the cited equivalence");
            }
        }
        Justification::PLFrom { from, re, rm } => {
            let mut premises = Vec::new();
            for &i in from {
                premises.push(earlier!(i).clone());
            }
            for (a, b) in re {
                if !is_tautology(&Formula::iff(a.clone(), b.clone()))? {
                    fail!("`{a}` and `{b}` are not tautologically equivalent");
                }
                premises.push(boxed_pair(a, b, true));
            }
            for (a, b) in rm {
                if !is_tautology(&Formula::implies(a.clone(), b.clone()))? {
                    fail!("`{a}` does not tautologically imply `{b}`");
                }
                premises.push(boxed_pair(a, b, false));
            }
            if !entails(&premises, target)? {
                fail!("not a tautological consequence of the cited premises");
            }
        }
    }
    Ok(None)
}

/// True iff `f` is a tautology after modal abstraction.
pub fn is_tautology(f: &Formula) -> Result<bool> {
    entails(&[], f)
}

/// True iff `goal` holds under every valuation of the abstracted atoms that
/// makes all `premises` true.
pub fn entails(premises: &[Formula], goal: &Formula) -> Result<bool> {
    let mut abs = Abstraction::default();
    let ps: Vec<Prop> = premises.iter().map(|p| abs.prop(&normalize(p))).collect();
    let g = abs.prop(&normalize(goal));
    let n = abs.atoms.len();
    if n > MAX_ATOMS {
        return Err(Error::TooManyAtoms {
            found: n,
            limit: MAX_ATOMS,
        });
    }
    for bits in 0u32..(1u32 << n) {
        if ps.iter().all(|p| p.eval(bits)) && !g.eval(bits) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rewrites every `dia g` as `~box~g`, recursively.
pub fn normalize(f: &Formula) -> Formula {
    match f {
        Formula::Letter(_) | Formula::Top | Formula::Bottom => f.clone(),
        Formula::Not(a) => Formula::not(normalize(a)),
        Formula::And(a, b) => Formula::and(normalize(a), normalize(b)),
        Formula::Or(a, b) => Formula::or(normalize(a), normalize(b)),
        Formula::Implies(a, b) => Formula::implies(normalize(a), normalize(b)),
        Formula::Iff(a, b) => Formula::iff(normalize(a), normalize(b)),
        Formula::Box(a) => Formula::boxed(normalize(a)),
        Formula::Diamond(a) => Formula::not(Formula::boxed(Formula::not(normalize(a)))),
    }
}

#[derive(Clone, Debug)]
enum Prop {
    Atom(usize),
    Const(bool),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Iff(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn eval(&self, bits: u32) -> bool {
        match self {
            Prop::Atom(i) => bits >> i & 1 == 1,
            Prop::Const(b) => *b,
            Prop::Not(a) => !a.eval(bits),
            Prop::And(a, b) => a.eval(bits) && b.eval(bits),
            Prop::Or(a, b) => a.eval(bits) || b.eval(bits),
            Prop::Implies(a, b) => !a.eval(bits) || b.eval(bits),
            Prop::Iff(a, b) => a.eval(bits) == b.eval(bits),
        }
    }
}

/// Atoms are letters and maximal boxed subformulas, keyed structurally.
#[derive(Default)]
struct Abstraction {
    atoms: HashMap<Formula, usize>,
}

impl Abstraction {
    fn atom(&mut self, f: &Formula) -> Prop {
        let next = self.atoms.len();
        Prop::Atom(*self.atoms.entry(f.clone()).or_insert(next))
    }

    fn prop(&mut self, f: &Formula) -> Prop {
        let bin = |a: &Formula, b: &Formula, s: &mut Self| (Box::new(s.prop(a)), Box::new(s.prop(b)));
        match f {
            Formula::Letter(_) | Formula::Box(_) => self.atom(f),
            Formula::Diamond(_) => unreachable!("normalized away"),
            Formula::Top => Prop::Const(true),
            Formula::Bottom => Prop::Const(false),
            Formula::Not(a) => Prop::Not(Box::new(self.prop(a))),
            Formula::And(a, b) => {
                let (x, y) = bin(a, b, self);
                Prop::And(x, y)
            }
            Formula::Or(a, b) => {
                let (x, y) = bin(a, b, self);
                Prop::Or(x, y)
            }
            Formula::Implies(a, b) => {
                let (x, y) = bin(a, b, self);
                Prop::Implies(x, y)
            }
            Formula::Iff(a, b) => {
                let (x, y) = bin(a, b, self);
                Prop::Iff(x, y)
            }
        }
    }
}

fn f(text: &str) -> Formula {
    parse(text).expect("built-in formula parses")
}

fn subst(items: Vec<Formula>) -> BTreeMap<String, Formula> {
    items
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("p{i}"), g))
        .collect()
}

fn pl(from: &[usize]) -> Justification {
    Justification::PLFrom {
        from: from.to_vec(),
        re: Vec::new(),
        rm: Vec::new(),
    }
}

/// Derivation of `phi_n -> ~psi_n` for the counterexample at arity `n`.
/// For n = 2 the K_2 disjunction collapses to `p & ~q` and the script has five
/// lines; for n = 3 it collapses to `p & ~p`, and for larger n to `false`.
pub fn generate_interp_refutation(n: usize) -> Result<ProofScript> {
    let phi = fixtures::phi(n)?;
    let psi = fixtures::psi(n)?;
    let both = Formula::and(phi.clone(), psi.clone());
    let goal = Formula::implies(phi, Formula::not(psi));
    let mut s = ProofScript::new(n);
    match n {
        2 => {
            let args = vec![f("~p | ~q"), f("p & r"), f("p & ~r")];
            let sub = subst(args.clone());
            let k2 = kn_axiom(2, &sub)?;
            let Formula::Implies(ante, cons) = &k2 else {
                unreachable!()
            };
            let Formula::Box(disjunction) = &**cons else {
                unreachable!()
            };
            let l1 = s.push(k2.clone(), Justification::KnAxiom { subst: sub });
            let l2 = s.push(
                Formula::implies((**ante).clone(), f("box (p & ~q)")),
                Justification::PLFrom {
                    from: vec![l1],
                    re: vec![((**disjunction).clone(), f("p & ~q"))],
                    rm: Vec::new(),
                },
            );
            let l3 = s.push(Formula::implies(both.clone(), f("box (p & ~q) & dia q")), pl(&[l2]));
            let l4 = s.push(
                Formula::implies(both, f("box ~q & ~box ~q")),
                Justification::PLFrom {
                    from: vec![l3],
                    re: Vec::new(),
                    rm: vec![(f("p & ~q"), f("~q"))],
                },
            );
            s.push(goal, pl(&[l4]));
        }
        3 => {
            let sub = subst(vec![f("p & ~q"), f("p & q"), f("~p & r"), f("~p & ~r")]);
            let k3 = kn_axiom(3, &sub)?;
            let Formula::Implies(ante, cons) = &k3 else {
                unreachable!()
            };
            let Formula::Box(disjunction) = &**cons else {
                unreachable!()
            };
            let l1 = s.push(k3.clone(), Justification::KnAxiom { subst: sub });
            let l2 = s.push(
                Formula::implies((**ante).clone(), f("box (p & ~p)")),
                Justification::PLFrom {
                    from: vec![l1],
                    re: vec![((**disjunction).clone(), f("p & ~p"))],
                    rm: Vec::new(),
                },
            );
            let l3 = s.push(Formula::implies(both, f("box (p & ~p) & dia (p | ~p)")), pl(&[l2]));
            s.push(
                goal,
                Justification::PLFrom {
                    from: vec![l3],
                    re: Vec::new(),
                    rm: vec![(f("p & ~p"), f("~(p | ~p)"))],
                },
            );
        }
        _ => {
            let mut args = vec![f("p & ~q"), f("p & q")];
            args.extend((1..n).map(|i| Formula::and(f("~p"), fixtures::rho(n, i))));
            let sub = subst(args);
            let kn = kn_axiom(n, &sub)?;
            let Formula::Implies(ante, cons) = &kn else {
                unreachable!()
            };
            let Formula::Box(disjunction) = &**cons else {
                unreachable!()
            };
            let l1 = s.push(kn.clone(), Justification::KnAxiom { subst: sub });
            let l2 = s.push(
                Formula::implies((**ante).clone(), f("box false")),
                Justification::PLFrom {
                    from: vec![l1],
                    re: vec![((**disjunction).clone(), Formula::Bottom)],
                    rm: Vec::new(),
                },
            );
            let l3 = s.push(Formula::implies(both, f("box false & dia true")), pl(&[l2]));
            s.push(
                goal,
                Justification::PLFrom {
                    from: vec![l3],
                    re: Vec::new(),
                    rm: vec![(Formula::Bottom, f("~true"))],
                },
            );
        }
    }
    Ok(s)
}
