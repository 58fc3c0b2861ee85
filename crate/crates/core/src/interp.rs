//! Interpolation counterexamples: pointed models `M, w` and `N, v`, formulas
//! `phi`, `psi` with `K_n ⊢ phi → ¬psi`, and a bisimulation over the common
//! vocabulary linking `w` and `v`. Any interpolant would have to be true at
//! `w`, false at `v`, and use only common letters, which the bisimulation rules out.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::bisim::{check_bisim, distinguishing_formula, PairRelation};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::PointedModel;
use crate::proof::{check_script, generate_interp_refutation, ProofScript};
use crate::semantics::{bounded_sat, check, valid_on_model, Evaluator, SatOutcome};
use crate::syntax::{enumerate_formulas, parse, Formula};

/// Modal depth and size of the common-vocabulary formula sweep.
pub const SWEEP_DEPTH: usize = 2;
pub const SWEEP_SIZE: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleBundle {
    pub n: usize,
    pub model_m: PointedModel,
    pub model_n: PointedModel,
    pub phi: Formula,
    pub psi: Formula,
    /// Pairs of world ids (left in `model_m`, right in `model_n`).
    pub z: Vec<(String, String)>,
    pub refutation: ProofScript,
}

impl CounterexampleBundle {
    /// Letters shared by `phi` and `psi`.
    pub fn common_alphabet(&self) -> BTreeSet<String> {
        self.phi.letters().intersection(&self.psi.letters()).cloned().collect()
    }

    pub fn relation(&self) -> Result<PairRelation<'_>> {
        PairRelation::from_names(
            &self.model_m.model,
            &self.model_n.model,
            &self.z,
            self.common_alphabet(),
        )
    }
}

pub fn build_counterexample(n: usize) -> Result<CounterexampleBundle> {
    let (m, k) = fixtures::counterexample_models(n)?;
    Ok(CounterexampleBundle {
        n,
        model_m: PointedModel::new(m, "w")?,
        model_n: PointedModel::new(k, "v")?,
        phi: fixtures::phi(n)?,
        psi: fixtures::psi(n)?,
        z: fixtures::z_pairs(n)?,
        refutation: generate_interp_refutation(n)?,
    })
}

/// Default world bound for the corroborating satisfiability search.
pub fn default_sat_bound(n: usize) -> usize {
    match n {
        0..=2 => 5,
        _ => 4,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub pass: bool,
    pub claim: String,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma1Report {
    pub n: usize,
    pub truth: Condition,
    pub derivation: Condition,
    pub indistinguishable: Condition,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl fmt::Display for Lemma1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "interpolation counterexample, n = {}", self.n)?;
        for (i, c) in [&self.truth, &self.derivation, &self.indistinguishable]
            .iter()
            .enumerate()
        {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "  ({}) {tag}  {}", i + 1, c.claim)?;
            for d in &c.details {
                writeln!(f, "        {d}")?;
            }
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        write!(f, "verdict: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Checks the three counterexample conditions. `sat_bound = 0` skips the
/// corroborating search; `sat_budget` caps it.
pub fn verify_lemma1(b: &CounterexampleBundle, sat_bound: usize, sat_budget: Option<u64>) -> Result<Lemma1Report> {
    let n = b.n;
    let (m, w) = (&b.model_m.model, b.model_m.point.as_str());
    let (k, v) = (&b.model_n.model, b.model_n.point.as_str());
    if m.arity() != n || k.arity() != n || b.refutation.arity != n {
        return Err(Error::ArityMismatch {
            left: n,
            right: if m.arity() != n { m.arity() } else { k.arity() },
        });
    }

    let phi_holds = check(m, w, &b.phi)?;
    let psi_holds = check(k, v, &b.psi)?;
    let truth = Condition {
        pass: phi_holds && psi_holds,
        claim: format!("M, {w} |= {} and N, {v} |= {}", b.phi, b.psi),
        details: vec![
            format!("M, {w} |= phi: {phi_holds}"),
            format!("N, {v} |= psi: {psi_holds}"),
        ],
    };

    let goal = Formula::implies(b.phi.clone(), Formula::not(b.psi.clone()));
    let mut details = Vec::new();
    let mut pass = true;
    match check_script(&b.refutation)? {
        None => details.push(format!("derivation of {} lines checked", b.refutation.lines.len())),
        Some(bad) => {
            pass = false;
            details.push(format!("derivation rejected at {bad}"));
        }
    }
    if b.refutation.theorem() != Some(&goal) {
        pass = false;
        details.push("derivation does not end in phi -> ~psi".into());
    }
    if sat_bound > 0 {
        let both = Formula::and(b.phi.clone(), b.psi.clone());
        match bounded_sat(&both, n, sat_bound, sat_budget) {
            Ok(SatOutcome::UnsatUpToBound { max_worlds }) => details.push(format!(
                "corroborated: phi & psi has no model with at most {max_worlds} worlds"
            )),
            Ok(SatOutcome::Witness(pm)) => {
                pass = false;
                details.push(format!(
                    "phi & psi is satisfiable at {} of a {}-world model, contradicting soundness",
                    pm.point,
                    pm.model.len()
                ));
            }
            Err(Error::BudgetExceeded { budget }) => details.push(format!(
                "satisfiability search inconclusive: budget of {budget} steps exceeded"
            )),
            Err(e) => return Err(e),
        }
    }
    let derivation = Condition {
        pass,
        claim: format!("K_{n} |- phi -> ~psi"),
        details,
    };

    let alphabet = b.common_alphabet();
    let letters: Vec<&str> = alphabet.iter().map(String::as_str).collect();
    let mut details = Vec::new();
    let mut pass = true;
    let z = b.relation()?;
    if !z.contains(w, v) {
        pass = false;
        details.push(format!("Z does not contain ({w}, {v})"));
    }
    match check_bisim(&z)? {
        None => details.push(format!("Z ({} pairs) verified", z.len())),
        Some(cex) => {
            pass = false;
            details.push(format!("Z is not a bisimulation: {cex}"));
            if let Some(d) = distinguishing_formula(m, w, k, v, &alphabet)? {
                details.push(format!("{w} and {v} are distinguished by {d}"));
            }
        }
    }
    let mut left = Evaluator::new(m);
    let mut right = Evaluator::new(k);
    let (wi, vi) = (m.world_index(w)?, k.world_index(v)?);
    let mut swept = 0usize;
    let mut separator = None;
    for f in enumerate_formulas(&alphabet, SWEEP_DEPTH, SWEEP_SIZE) {
        swept += 1;
        if left.holds(wi, &f) != right.holds(vi, &f) {
            separator = Some(f);
            break;
        }
    }
    match separator {
        None => details.push(format!(
            "{swept} formulas over {{{}}} (depth <= {SWEEP_DEPTH}, size <= {SWEEP_SIZE}) agree at the roots",
            letters.join(",")
        )),
        Some(f) => {
            pass = false;
            details.push(format!("{f} separates {w} and {v}"));
        }
    }
    let indistinguishable = Condition {
        pass,
        claim: format!(
            "Z is a wa^{n}-bisimulation over {{{}}} linking {w} and {v}",
            letters.join(",")
        ),
        details,
    };

    let four = parse("box p -> box box p")?;
    let notes = vec![format!(
        "axiom 4 ({four}) valid on M: {}, on N: {}; only soundness is used, so extensions valid on both frames inherit the counterexample",
        valid_on_model(m, &four),
        valid_on_model(k, &four)
    )];

    let pass = truth.pass && derivation.pass && indistinguishable.pass;
    Ok(Lemma1Report {
        n,
        truth,
        derivation,
        indistinguishable,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn fixtures_for_two_and_three() {
        let b = build_counterexample(2).unwrap();
        assert_eq!(b.phi, parse("box (~p | ~q) & dia q").unwrap());
        assert_eq!(b.psi, parse("box (p & r) & box (p & ~r)").unwrap());
        assert_eq!(b.z.len(), 5);
        let b = build_counterexample(3).unwrap();
        assert!(b.z.contains(&("w1".into(), "v3".into())));
        assert!(build_counterexample(1).is_err());
    }

    #[test]
    fn common_vocabulary_is_p() {
        for n in 2..=6 {
            let b = build_counterexample(n).unwrap();
            assert_eq!(b.common_alphabet(), BTreeSet::from(["p".to_string()]));
        }
    }

    #[test]
    fn report_passes_without_search() {
        for n in 2..=4 {
            let r = verify_lemma1(&build_counterexample(n).unwrap(), 0, None).unwrap();
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn mutation_is_caught_with_a_witness() {
        let mut b = build_counterexample(2).unwrap();
        let m = b.model_m.model.with_valuation("w1", BTreeSet::new()).unwrap();
        b.model_m = PointedModel::new(m, "w").unwrap();
        let r = verify_lemma1(&b, 0, None).unwrap();
        assert!(!r.pass);
        assert!(!r.indistinguishable.pass);
        let text = r.to_string();
        assert!(text.contains("distinguished by"), "{text}");
    }
}
