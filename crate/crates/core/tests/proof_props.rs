mod common;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use waml::model::random_model;
use waml::proof::{
    check_script, entails, generate_interp_refutation, identity_substitution, is_tautology, kn_axiom, Justification,
    ProofScript,
};
use waml::semantics::{bounded_sat, valid_on_model, SatOutcome};
use waml::syntax::parse;
use waml::Formula;

use common::{random_formula, rng};

const LETTERS: &[&str] = &["p", "q", "r"];

fn assert_sound(script: &ProofScript, seed: u64) {
    assert_eq!(check_script(script).unwrap(), None, "script rejected:\n{script}");
    let letters: Vec<String> = script.lines.iter().flat_map(|l| l.formula.letters()).collect();
    let alpha = letters.into_iter().collect();
    let mut r = rng(seed);
    for i in 0..100 {
        let worlds = 1 + i % 4;
        let m = random_model(script.arity, worlds, r.random_range(0.1..0.5), &alpha, r.random());
        for (n, line) in script.lines.iter().enumerate() {
            assert!(
                valid_on_model(&m, &line.formula),
                "line {} of\n{script}fails on {m:?}",
                n + 1
            );
        }
    }
}

/// A random accepted script mixing every rule.
fn random_script(r: &mut ChaCha8Rng, arity: usize) -> ProofScript {
    let mut s = ProofScript::new(arity);
    let subst: BTreeMap<String, Formula> = (0..=arity)
        .map(|i| (format!("p{i}"), random_formula(r, LETTERS, 1, 2)))
        .collect();
    let axiom = kn_axiom(arity, &subst).unwrap();
    let ax = s.push(axiom.clone(), Justification::KnAxiom { subst });
    let a = random_formula(r, LETTERS, 1, 2);
    let a_or_b = Formula::or(a.clone(), random_formula(r, LETTERS, 1, 2));
    let weak = Formula::implies(a.clone(), a_or_b.clone());
    let t = s.push(weak.clone(), Justification::Taut);
    let (boxed_a, boxed_ab) = (Formula::boxed(a), Formula::boxed(a_or_b));
    let rm = s.push(
        Formula::implies(boxed_a.clone(), boxed_ab.clone()),
        Justification::RM { line: t },
    );
    let nec = s.push(Formula::boxed(weak.clone()), Justification::Nec { line: t });
    s.push(
        Formula::and(axiom, Formula::boxed(weak.clone())),
        Justification::PLFrom {
            from: vec![ax, nec],
            re: Vec::new(),
            rm: Vec::new(),
        },
    );
    s.push(
        Formula::implies(boxed_a.clone(), Formula::or(boxed_ab, boxed_a.clone())),
        Justification::PLFrom {
            from: vec![rm],
            re: Vec::new(),
            rm: Vec::new(),
        },
    );
    let weaker = Formula::or(Formula::boxed(weak), boxed_a);
    let bridge = s.push(
        Formula::implies(s.lines[nec - 1].formula.clone(), weaker.clone()),
        Justification::Taut,
    );
    s.push(
        weaker,
        Justification::MP {
            premise: nec,
            implication: bridge,
        },
    );
    s
}

#[test]
fn random_scripts_are_sound() {
    let mut r = rng(404);
    for case in 0..40 {
        let arity = 1 + case % 3;
        let s = random_script(&mut r, arity);
        assert_sound(&s, case as u64);
    }
}

#[test]
fn counterexample_refutations_are_sound() {
    for n in 2..=5 {
        assert_sound(&generate_interp_refutation(n).unwrap(), n as u64);
    }
}

#[test]
fn shipped_scripts_are_sound() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    for name in ["proof2.json", "proof3.json"] {
        let text = std::fs::read(format!("{root}/{name}")).unwrap();
        assert_sound(&ProofScript::from_json(&text).unwrap(), 9);
    }
}

#[test]
fn smaller_axiom_shapes_fail_on_wider_frames() {
    for (m, n) in [(1, 2), (1, 3), (2, 3)] {
        let shape = kn_axiom(m, &identity_substitution(m)).unwrap();
        let refuted = bounded_sat(&Formula::not(shape.clone()), n, 3, None).unwrap();
        match refuted {
            SatOutcome::Witness(pm) => assert!(!valid_on_model(&pm.model, &shape)),
            other => panic!("K_{m} shape not refuted at arity {n}: {other:?}"),
        }
        let own = bounded_sat(&Formula::not(shape), m, 3, None).unwrap();
        assert!(matches!(own, SatOutcome::UnsatUpToBound { .. }), "m={m}");
    }
}

#[test]
fn abstraction_only_identifies_identical_boxes() {
    let p = |s: &str| parse(s).unwrap();
    assert!(is_tautology(&p("box (p & q) -> box (p & q)")).unwrap());
    assert!(!is_tautology(&p("box (p & q) -> box (q & p)")).unwrap());
    assert!(!entails(&[p("box (p & q)")], &p("box (q & p)")).unwrap());
    assert!(entails(&[p("box p"), p("box p -> box q")], &p("box q")).unwrap());
    assert!(is_tautology(&p("dia p <-> ~box ~p")).unwrap());
    assert!(!is_tautology(&p("dia p <-> ~box p")).unwrap());
}

#[test]
fn tampered_scripts_are_rejected() {
    let good = generate_interp_refutation(3).unwrap();
    let last = good.lines.len() - 1;
    let mut bad = good.clone();
    bad.lines[last].formula = parse("box (p & ~q) -> false").unwrap();
    assert!(check_script(&bad).unwrap().is_some());
    let mut bad = good.clone();
    bad.lines[0].formula = Formula::boxed(bad.lines[0].formula.clone());
    assert_eq!(check_script(&bad).unwrap().map(|l| l.line), Some(1));
    let mut bad = good;
    bad.arity = 2;
    assert!(check_script(&bad).unwrap().is_some());
}
