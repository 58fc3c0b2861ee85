//! Standard translation into first-order logic over the signature with one
//! (n+1)-ary relation `R` and a unary predicate per letter, a finite
//! evaluator for the result, and TPTP `fof` export.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::NModel;
use crate::syntax::Formula;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FolFormula {
    LetterPred(String, String),
    Rel(Vec<String>),
    Top,
    Bottom,
    Not(Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Or(Box<FolFormula>, Box<FolFormula>),
    Implies(Box<FolFormula>, Box<FolFormula>),
    Iff(Box<FolFormula>, Box<FolFormula>),
    Forall(String, Box<FolFormula>),
    Exists(String, Box<FolFormula>),
}

impl FolFormula {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            FolFormula::LetterPred(_, v) => note(v, bound),
            FolFormula::Rel(vs) => vs.iter().for_each(|v| note(v, bound)),
            FolFormula::Top | FolFormula::Bottom => {}
            FolFormula::Not(a) => a.collect_free(bound, out),
            FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FolFormula::Forall(v, a) | FolFormula::Exists(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }
}

fn bx(f: FolFormula) -> Box<FolFormula> {
    Box::new(f)
}

/// `ST_x(f)` for n-models. Bound variables are `y{i}_{k}` where `k` counts
/// modal operators in translation order, so no variable is bound twice.
pub fn st(f: &Formula, arity: usize, free_var: &str) -> FolFormula {
    let mut counter = 0;
    st_inner(f, arity, free_var, &mut counter)
}

fn st_inner(f: &Formula, n: usize, x: &str, counter: &mut usize) -> FolFormula {
    let go = |g: &Formula, v: &str, c: &mut usize| st_inner(g, n, v, c);
    match f {
        Formula::Letter(p) => FolFormula::LetterPred(p.clone(), x.to_string()),
        Formula::Top => FolFormula::Top,
        Formula::Bottom => FolFormula::Bottom,
        Formula::Not(a) => FolFormula::Not(bx(go(a, x, counter))),
        Formula::And(a, b) => FolFormula::And(bx(go(a, x, counter)), bx(go(b, x, counter))),
        Formula::Or(a, b) => FolFormula::Or(bx(go(a, x, counter)), bx(go(b, x, counter))),
        Formula::Implies(a, b) => FolFormula::Implies(bx(go(a, x, counter)), bx(go(b, x, counter))),
        Formula::Iff(a, b) => FolFormula::Iff(bx(go(a, x, counter)), bx(go(b, x, counter))),
        Formula::Box(a) | Formula::Diamond(a) => {
            let k = *counter;
            *counter += 1;
            let ys: Vec<String> = (1..=n).map(|i| format!("y{i}_{k}")).collect();
            let mut args = vec![x.to_string()];
            args.extend(ys.iter().cloned());
            let rel = FolFormula::Rel(args);
            let parts: Vec<FolFormula> = ys.iter().map(|y| go(a, y, counter)).collect();
            let is_box = matches!(f, Formula::Box(_));
            let combined = parts
                .into_iter()
                .reduce(|l, r| {
                    if is_box {
                        FolFormula::Or(bx(l), bx(r))
                    } else {
                        FolFormula::And(bx(l), bx(r))
                    }
                })
                .expect("arity >= 1");
            let mut body = if is_box {
                FolFormula::Implies(bx(rel), bx(combined))
            } else {
                FolFormula::And(bx(rel), bx(combined))
            };
            for y in ys.into_iter().rev() {
                body = if is_box {
                    FolFormula::Forall(y, bx(body))
                } else {
                    FolFormula::Exists(y, bx(body))
                };
            }
            body
        }
    }
}

/// Tarskian satisfaction on the model read as a first-order structure.
pub fn fol_eval(m: &NModel, assignment: &BTreeMap<String, String>, g: &FolFormula) -> Result<bool> {
    let mut env: HashMap<String, usize> = HashMap::new();
    for v in g.free_vars() {
        let w = assignment.get(&v).ok_or_else(|| Error::UnassignedVariable(v.clone()))?;
        env.insert(v, m.world_index(w)?);
    }
    check_rel_arity(m, g)?;
    Ok(eval(m, &mut env, g))
}

fn check_rel_arity(m: &NModel, g: &FolFormula) -> Result<()> {
    match g {
        FolFormula::Rel(vs) if vs.len() != m.arity() + 1 => Err(Error::RelationArity {
            expected: m.arity() + 1,
            found: vs.len(),
        }),
        FolFormula::Not(a) | FolFormula::Forall(_, a) | FolFormula::Exists(_, a) => check_rel_arity(m, a),
        FolFormula::And(a, b) | FolFormula::Or(a, b) | FolFormula::Implies(a, b) | FolFormula::Iff(a, b) => {
            check_rel_arity(m, a)?;
            check_rel_arity(m, b)
        }
        _ => Ok(()),
    }
}

fn eval(m: &NModel, env: &mut HashMap<String, usize>, g: &FolFormula) -> bool {
    match g {
        FolFormula::LetterPred(p, v) => m.holds(env[v], p),
        FolFormula::Rel(vs) => {
            let t: Vec<usize> = vs.iter().map(|v| env[v]).collect();
            m.contains_tuple(&t)
        }
        FolFormula::Top => true,
        FolFormula::Bottom => false,
        FolFormula::Not(a) => !eval(m, env, a),
        FolFormula::And(a, b) => eval(m, env, a) && eval(m, env, b),
        FolFormula::Or(a, b) => eval(m, env, a) || eval(m, env, b),
        FolFormula::Implies(a, b) => !eval(m, env, a) || eval(m, env, b),
        FolFormula::Iff(a, b) => eval(m, env, a) == eval(m, env, b),
        FolFormula::Forall(v, a) | FolFormula::Exists(v, a) => {
            let universal = matches!(g, FolFormula::Forall(..));
            let saved = env.get(v).copied();
            let mut result = universal;
            for w in 0..m.len() {
                env.insert(v.clone(), w);
                if eval(m, env, a) != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(w) => env.insert(v.clone(), w),
                None => env.remove(v),
            };
            result
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Axiom,
    Conjecture,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Axiom => "axiom",
            Role::Conjecture => "conjecture",
        })
    }
}

/// TPTP lower word: a lowercase letter followed by alphanumerics or `_`.
pub fn is_tptp_lower_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Renders `g` as one `fof` line. Free variables become the constants given
/// by `grounding`; bound variables are renamed `Y1, Y2, ...` in binding order.
pub fn tptp_export(g: &FolFormula, role: Role, name: &str, grounding: &BTreeMap<String, String>) -> Result<String> {
    if !is_tptp_lower_word(name) {
        return Err(Error::InvalidIdentifier(name.to_string()));
    }
    for v in g.free_vars() {
        let c = grounding.get(&v).ok_or_else(|| Error::UnassignedVariable(v.clone()))?;
        if !is_tptp_lower_word(c) {
            return Err(Error::InvalidIdentifier(c.clone()));
        }
    }
    let mut printer = TptpPrinter {
        names: grounding.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        next: 0,
    };
    let body = printer.formula(g);
    Ok(format!("fof({name}, {role}, {body})."))
}

struct TptpPrinter {
    names: HashMap<String, String>,
    next: usize,
}

impl TptpPrinter {
    fn var(&self, v: &str) -> String {
        self.names[v].clone()
    }

    fn bind(&mut self, v: &str) -> Option<String> {
        self.next += 1;
        self.names.insert(v.to_string(), format!("Y{}", self.next))
    }

    fn unbind(&mut self, v: &str, saved: Option<String>) {
        match saved {
            Some(s) => self.names.insert(v.to_string(), s),
            None => self.names.remove(v),
        };
    }

    fn formula(&mut self, g: &FolFormula) -> String {
        match g {
            FolFormula::LetterPred(p, v) => format!("p_{p}({})", self.var(v)),
            FolFormula::Rel(vs) => {
                let args: Vec<String> = vs.iter().map(|v| self.var(v)).collect();
                format!("r({})", args.join(","))
            }
            FolFormula::Top => "$true".into(),
            FolFormula::Bottom => "$false".into(),
            FolFormula::Not(a) => format!("~ {}", self.operand(a, None)),
            FolFormula::And(a, b) => self.binary(a, b, "&", Some("&")),
            FolFormula::Or(a, b) => self.binary(a, b, "|", Some("|")),
            FolFormula::Implies(a, b) => self.binary(a, b, "=>", None),
            FolFormula::Iff(a, b) => self.binary(a, b, "<=>", None),
            FolFormula::Forall(..) | FolFormula::Exists(..) => {
                let universal = matches!(g, FolFormula::Forall(..));
                let mut vars = Vec::new();
                let mut saved = Vec::new();
                let mut cur = g;
                while let (FolFormula::Forall(v, a), true) | (FolFormula::Exists(v, a), false) = (cur, universal) {
                    saved.push((v.clone(), self.bind(v)));
                    vars.push(self.var(v));
                    cur = a;
                }
                let body = match cur {
                    FolFormula::And(..) | FolFormula::Or(..) | FolFormula::Implies(..) | FolFormula::Iff(..) => {
                        format!("({})", self.formula(cur))
                    }
                    _ => self.formula(cur),
                };
                for (v, s) in saved.into_iter().rev() {
                    self.unbind(&v, s);
                }
                let q = if universal { "!" } else { "?" };
                format!("{q} [{}] : {body}", vars.join(","))
            }
        }
    }

    fn binary(&mut self, a: &FolFormula, b: &FolFormula, op: &str, assoc: Option<&str>) -> String {
        let l = self.operand(a, assoc);
        let r = self.operand(b, assoc);
        format!("{l} {op} {r}")
    }

    /// Operand of a connective; `assoc` names the enclosing associative
    /// operator whose chains are printed without parentheses.
    fn operand(&mut self, g: &FolFormula, assoc: Option<&str>) -> String {
        match (g, assoc) {
            (FolFormula::And(..), Some("&")) | (FolFormula::Or(..), Some("|")) => self.formula(g),
            (
                FolFormula::And(..)
                | FolFormula::Or(..)
                | FolFormula::Implies(..)
                | FolFormula::Iff(..)
                | FolFormula::Forall(..)
                | FolFormula::Exists(..),
                _,
            ) => format!("({})", self.formula(g)),
            _ => self.formula(g),
        }
    }
}

impl fmt::Display for FolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FolFormula::LetterPred(p, v) => write!(f, "P_{p}({v})"),
            FolFormula::Rel(vs) => write!(f, "R({})", vs.join(", ")),
            FolFormula::Top => f.write_str("true"),
            FolFormula::Bottom => f.write_str("false"),
            FolFormula::Not(a) => write!(f, "~{}", Paren(a)),
            FolFormula::And(a, b) => write!(f, "{} & {}", Paren(a), Paren(b)),
            FolFormula::Or(a, b) => write!(f, "{} | {}", Paren(a), Paren(b)),
            FolFormula::Implies(a, b) => write!(f, "{} -> {}", Paren(a), Paren(b)),
            FolFormula::Iff(a, b) => write!(f, "{} <-> {}", Paren(a), Paren(b)),
            FolFormula::Forall(v, a) => write!(f, "forall {v}. {}", Paren(a)),
            FolFormula::Exists(v, a) => write!(f, "exists {v}. {}", Paren(a)),
        }
    }
}

/// Parenthesizes everything but atoms, negations and quantifier chains.
struct Paren<'a>(&'a FolFormula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FolFormula::LetterPred(..)
            | FolFormula::Rel(_)
            | FolFormula::Top
            | FolFormula::Bottom
            | FolFormula::Not(_) => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}
