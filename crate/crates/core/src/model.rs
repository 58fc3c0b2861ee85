//! Finite n-models: a nonempty world set, an (n+1)-ary relation and a
//! valuation. Worlds are identified by strings; the order of the `worlds`
//! array is the iteration order for every algorithm in the crate.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::is_letter_id;

/// The serialized (model-JSON) shape of a model. Not necessarily well formed;
/// see [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub arity: usize,
    pub worlds: Vec<String>,
    pub relation: Vec<Vec<String>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn violation(message: impl Into<String>) -> Violation {
    Violation {
        message: message.into(),
    }
}

/// Checks the well-formedness conditions of an n-model. An empty list means
/// the description denotes a valid [`NModel`].
pub fn validate(spec: &ModelSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.arity == 0 {
        out.push(violation("arity 0 is not allowed (arity >= 1 required)"));
    }
    if spec.worlds.is_empty() {
        out.push(violation("world set is empty"));
    }
    let mut seen = HashSet::new();
    for w in &spec.worlds {
        if w.is_empty() {
            out.push(violation("empty world id"));
        }
        if !seen.insert(w.as_str()) {
            out.push(violation(format!("duplicate world `{w}`")));
        }
    }
    for tuple in &spec.relation {
        if tuple.len() != spec.arity + 1 {
            out.push(violation(format!(
                "tuple [{}]: tuple length {} \u{2260} {}",
                tuple.join(","),
                tuple.len(),
                spec.arity + 1
            )));
        }
        for w in tuple {
            if !seen.contains(w.as_str()) {
                out.push(violation(format!(
                    "tuple [{}] mentions undeclared world `{w}`",
                    tuple.join(",")
                )));
            }
        }
    }
    for (w, letters) in &spec.valuation {
        if !seen.contains(w.as_str()) {
            out.push(violation(format!("valuation mentions undeclared world `{w}`")));
        }
        for p in letters {
            if !is_letter_id(p) {
                out.push(violation(format!("world `{w}`: `{p}` is not a letter id")));
            }
        }
    }
    out
}

/// A validated finite n-model.
#[derive(Clone, Debug)]
pub struct NModel {
    arity: usize,
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    // Sorted by world index, deduplicated; each tuple has arity + 1 entries.
    relation: Vec<Vec<usize>>,
    relation_set: HashSet<Vec<usize>>,
    // successors[w] lists the successor n-vectors of tuples starting at w.
    successors: Vec<Vec<Vec<usize>>>,
    valuation: Vec<BTreeSet<String>>,
}

impl PartialEq for NModel {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.worlds == other.worlds
            && self.relation == other.relation
            && self.valuation == other.valuation
    }
}

impl Eq for NModel {}

impl NModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<NModel> {
        let violations = validate(spec);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.message.clone()).collect();
            return Err(Error::InvalidModel(msgs.join("; ")));
        }
        let index: HashMap<String, usize> = spec.worlds.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let tuples = spec
            .relation
            .iter()
            .map(|t| t.iter().map(|w| index[w]).collect())
            .collect();
        let mut valuation = vec![BTreeSet::new(); spec.worlds.len()];
        for (w, letters) in &spec.valuation {
            valuation[index[w]].extend(letters.iter().cloned());
        }
        Ok(Self::assemble(spec.arity, spec.worlds.clone(), tuples, valuation))
    }

    /// Builds a model from indexed parts. Callers guarantee well-formedness.
    pub(crate) fn assemble(
        arity: usize,
        worlds: Vec<String>,
        mut relation: Vec<Vec<usize>>,
        valuation: Vec<BTreeSet<String>>,
    ) -> NModel {
        relation.sort();
        relation.dedup();
        let index = worlds.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut successors = vec![Vec::new(); worlds.len()];
        for t in &relation {
            successors[t[0]].push(t[1..].to_vec());
        }
        let relation_set = relation.iter().cloned().collect();
        NModel {
            arity,
            worlds,
            index,
            relation,
            relation_set,
            successors,
            valuation,
        }
    }

    /// Convenience constructor from borrowed names, used by fixtures and tests.
    pub fn build(arity: usize, worlds: &[&str], relation: &[&[&str]], valuation: &[(&str, &[&str])]) -> Result<NModel> {
        let spec = ModelSpec {
            arity,
            worlds: worlds.iter().map(|w| w.to_string()).collect(),
            relation: relation
                .iter()
                .map(|t| t.iter().map(|w| w.to_string()).collect())
                .collect(),
            valuation: valuation
                .iter()
                .map(|(w, ls)| (w.to_string(), ls.iter().map(|p| p.to_string()).collect()))
                .collect(),
        };
        NModel::from_spec(&spec)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, w: usize) -> &str {
        &self.worlds[w]
    }

    pub fn world_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    /// All relation tuples `(w, v1, ..., vn)` as world indices, sorted.
    pub fn relation(&self) -> &[Vec<usize>] {
        &self.relation
    }

    pub fn contains_tuple(&self, tuple: &[usize]) -> bool {
        self.relation_set.contains(tuple)
    }

    /// Successor n-vectors of the tuples starting at `w`.
    pub fn successors(&self, w: usize) -> &[Vec<usize>] {
        &self.successors[w]
    }

    pub fn valuation(&self, w: usize) -> &BTreeSet<String> {
        &self.valuation[w]
    }

    pub fn holds(&self, w: usize, letter: &str) -> bool {
        self.valuation[w].contains(letter)
    }

    /// Letters true at some world.
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.valuation.iter().flatten().cloned().collect()
    }

    pub fn check_same_arity(&self, other: &NModel) -> Result<()> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            })
        }
    }

    /// Canonical serialized form: worlds, letters and tuples sorted.
    pub fn to_spec(&self) -> ModelSpec {
        let mut worlds = self.worlds.clone();
        worlds.sort();
        let mut relation: Vec<Vec<String>> = self
            .relation
            .iter()
            .map(|t| t.iter().map(|&w| self.worlds[w].clone()).collect())
            .collect();
        relation.sort();
        let valuation = self
            .worlds
            .iter()
            .zip(&self.valuation)
            .map(|(w, ls)| (w.clone(), ls.iter().cloned().collect()))
            .collect();
        ModelSpec {
            arity: self.arity,
            worlds,
            relation,
            valuation,
        }
    }

    pub fn restrict_valuation(&self, alphabet: &BTreeSet<String>) -> NModel {
        let valuation = self
            .valuation
            .iter()
            .map(|ls| ls.intersection(alphabet).cloned().collect())
            .collect();
        NModel::assemble(self.arity, self.worlds.clone(), self.relation.clone(), valuation)
    }

    /// Same model with one world's letters replaced.
    pub fn with_valuation(&self, world: &str, letters: BTreeSet<String>) -> Result<NModel> {
        let w = self.world_index(world)?;
        let mut valuation = self.valuation.clone();
        valuation[w] = letters;
        Ok(NModel::assemble(
            self.arity,
            self.worlds.clone(),
            self.relation.clone(),
            valuation,
        ))
    }
}

/// A model together with a designated world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: NModel,
    pub point: String,
}

impl PointedModel {
    pub fn new(model: NModel, point: impl Into<String>) -> Result<PointedModel> {
        let point = point.into();
        model.world_index(&point)?;
        Ok(PointedModel { model, point })
    }

    pub fn point_index(&self) -> usize {
        self.model.world_index(&self.point).expect("point is a world")
    }
}

pub fn load(text: &[u8]) -> Result<NModel> {
    let spec: ModelSpec = from_json_bytes(text)?;
    NModel::from_spec(&spec)
}

pub fn save(m: &NModel) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&m.to_spec()).expect("model spec serializes");
    out.push(b'\n');
    out
}

/// Deserializes JSON, reporting the path of the offending element.
pub fn from_json_bytes<T: serde::de::DeserializeOwned>(text: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Seeded random n-model with worlds `w0 .. w{k-1}`. Every candidate tuple is
/// included independently with probability `relation_density`, every letter
/// holds at every world with probability 1/2.
pub fn random_model(
    arity: usize,
    num_worlds: usize,
    relation_density: f64,
    alphabet: &BTreeSet<String>,
    seed: u64,
) -> NModel {
    assert!(arity >= 1 && num_worlds >= 1, "arity and world count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = relation_density.clamp(0.0, 1.0);
    let mut relation = Vec::new();
    for code in 0..num_worlds.pow(arity as u32 + 1) {
        if rng.random_bool(density) {
            relation.push(decode_tuple(code, num_worlds, arity + 1));
        }
    }
    let valuation = (0..num_worlds)
        .map(|_| alphabet.iter().filter(|_| rng.random_bool(0.5)).cloned().collect())
        .collect();
    let worlds = (0..num_worlds).map(|i| format!("w{i}")).collect();
    NModel::assemble(arity, worlds, relation, valuation)
}

/// The `code`-th tuple of length `len` over `0..base` in lexicographic order.
pub(crate) fn decode_tuple(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % base;
        code /= base;
    }
    out
}
