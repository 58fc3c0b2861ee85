//! Reference models and formulas: a bisimilar pair of 2-models, a small
//! cyclic 2-model for unraveling, and the interpolation counterexamples for
//! every n >= 2. Root worlds of the counterexamples carry empty valuations.

use crate::error::{Error, Result};
use crate::model::NModel;
use crate::syntax::{parse, Formula};

/// Two 2-models whose roots are bisimilar over {p} via [`BISIMILAR_PAIR_Z`],
/// although the left root has two tuples and the right root one.
pub fn bisimilar_pair() -> (NModel, NModel) {
    let left = NModel::build(
        2,
        &["w", "w1", "w2", "w3"],
        &[&["w", "w1", "w2"], &["w", "w2", "w3"]],
        &[("w", &["p"]), ("w1", &["p"]), ("w2", &["p"])],
    )
    .expect("bisimilar pair, left");
    let right = NModel::build(
        2,
        &["v", "v1", "v2"],
        &[&["v", "v1", "v2"]],
        &[("v", &["p"]), ("v1", &["p"]), ("v2", &["p"])],
    )
    .expect("bisimilar pair, right");
    (left, right)
}

pub const BISIMILAR_PAIR_Z: &[(&str, &str)] = &[("w", "v"), ("w1", "v1"), ("w2", "v2"), ("w2", "v1")];

/// Four worlds, relation {(w,u,t), (u,t,u), (t,w,v)}, empty valuation.
pub fn cycle_model() -> NModel {
    NModel::build(
        2,
        &["w", "v", "u", "t"],
        &[&["w", "u", "t"], &["u", "t", "u"], &["t", "w", "v"]],
        &[],
    )
    .expect("cycle model")
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "counterexamples exist for n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Number of `r` letters used by the general construction: least m with 2^m >= n-1.
pub fn rho_width(n: usize) -> usize {
    let mut m = 0;
    while (1usize << m) < n - 1 {
        m += 1;
    }
    m
}

/// Positive `r` letters of rho_i (1-based i): bit b of i-1 set makes r_{b+1} positive.
fn rho_positive(n: usize, i: usize) -> Vec<String> {
    (0..rho_width(n))
        .filter(|b| (i - 1) >> b & 1 == 1)
        .map(|b| format!("r{}", b + 1))
        .collect()
}

/// The conjunction of literals over r1..rm encoding i-1 in binary.
pub fn rho(n: usize, i: usize) -> Formula {
    let pos = rho_positive(n, i);
    Formula::conj((1..=rho_width(n)).map(|j| {
        let r = format!("r{j}");
        if pos.contains(&r) {
            Formula::letter(r)
        } else {
            Formula::not(Formula::letter(r))
        }
    }))
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    std::iter::once(prefix.to_string())
        .chain((1..=n).map(|i| format!("{prefix}{i}")))
        .collect()
}

fn model(n: usize, worlds: &[String], relation: &[&[&str]], val: Vec<(String, Vec<String>)>) -> NModel {
    let ws: Vec<&str> = worlds.iter().map(String::as_str).collect();
    let val_refs: Vec<(&str, Vec<&str>)> = val
        .iter()
        .map(|(w, ls)| (w.as_str(), ls.iter().map(String::as_str).collect()))
        .collect();
    let val_slices: Vec<(&str, &[&str])> = val_refs.iter().map(|(w, ls)| (*w, ls.as_slice())).collect();
    NModel::build(n, &ws, relation, &val_slices).expect("counterexample model")
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// The pair (M_n, N_n), pointed at `w` and `v` respectively.
pub fn counterexample_models(n: usize) -> Result<(NModel, NModel)> {
    check_n(n)?;
    Ok(match n {
        2 => (
            model(
                2,
                &names("w", 4),
                &[&["w", "w1", "w2"], &["w", "w3", "w4"]],
                vec![
                    ("w1".into(), strs(&["p"])),
                    ("w2".into(), strs(&["p"])),
                    ("w3".into(), strs(&["p", "q"])),
                    ("w4".into(), strs(&["q"])),
                ],
            ),
            model(
                2,
                &names("v", 2),
                &[&["v", "v1", "v2"]],
                vec![("v1".into(), strs(&["p"])), ("v2".into(), strs(&["p", "r"]))],
            ),
        ),
        3 => (
            model(
                3,
                &names("w", 3),
                &[&["w", "w1", "w2", "w3"]],
                vec![
                    ("w1".into(), strs(&["p"])),
                    ("w2".into(), strs(&["p", "q"])),
                    ("w3".into(), strs(&["q"])),
                ],
            ),
            model(
                3,
                &names("v", 3),
                &[&["v", "v1", "v2", "v3"]],
                vec![
                    ("v1".into(), strs(&["r"])),
                    ("v2".into(), Vec::new()),
                    ("v3".into(), strs(&["p", "r"])),
                ],
            ),
        ),
        _ => {
            let ws = names("w", n);
            let vs = names("v", n);
            let wt: Vec<&str> = ws.iter().map(String::as_str).collect();
            let vt: Vec<&str> = vs.iter().map(String::as_str).collect();
            let mut left_val = vec![("w1".to_string(), strs(&["p"])), ("w2".to_string(), strs(&["p", "q"]))];
            left_val.extend((3..=n).map(|i| (format!("w{i}"), Vec::new())));
            let mut right_val = vec![("v1".to_string(), strs(&["p"]))];
            right_val.extend((1..n).map(|i| (format!("v{}", i + 1), rho_positive(n, i))));
            (model(n, &ws, &[&wt], left_val), model(n, &vs, &[&vt], right_val))
        }
    })
}

/// The left formula phi_n.
pub fn phi(n: usize) -> Result<Formula> {
    check_n(n)?;
    Ok(match n {
        2 => parse("box (~p | ~q) & dia q")?,
        3 => parse("box (p & ~q) & box (p & q) & dia (p | ~p)")?,
        _ => parse("box (p & ~q) & box (p & q) & dia true")?,
    })
}

/// The right formula psi_n.
pub fn psi(n: usize) -> Result<Formula> {
    check_n(n)?;
    Ok(match n {
        2 => parse("box (p & r) & box (p & ~r)")?,
        3 => parse("box (~p & r) & box (~p & ~r) & dia (p | ~p)")?,
        _ => Formula::conj(
            (1..n)
                .map(|i| Formula::boxed(Formula::and(Formula::not(Formula::letter("p")), rho(n, i))))
                .chain(std::iter::once(Formula::diamond(Formula::Top))),
        ),
    })
}

/// The bisimulation over {p} linking the two roots.
pub fn z_pairs(n: usize) -> Result<Vec<(String, String)>> {
    check_n(n)?;
    let pairs: Vec<(String, String)> = match n {
        2 => [("w", "v"), ("w1", "v1"), ("w2", "v2"), ("w3", "v1"), ("w3", "v2")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        3 => [("w", "v"), ("w1", "v3"), ("w2", "v3"), ("w3", "v1"), ("w3", "v2")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        _ => {
            let mut z = vec![
                ("w".to_string(), "v".to_string()),
                ("w1".to_string(), "v1".to_string()),
                ("w2".to_string(), "v1".to_string()),
            ];
            for i in 3..=n {
                for j in 2..=n {
                    z.push((format!("w{i}"), format!("v{j}")));
                }
            }
            z
        }
    };
    Ok(pairs)
}
