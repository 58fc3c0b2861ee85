//! A small conflict-driven clause-learning SAT solver with assumptions.
//!
//! Two watched literals, first-UIP learning, VSIDS branching with phase
//! saving and Luby restarts. Learnt clauses are never deleted; the problems
//! the model finder produces are small. Fully deterministic.

use std::ops::Not;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// A literal: variable index times two, plus one when negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn positive(v: Var) -> Lit {
        Lit(v.0 << 1)
    }

    pub fn negative(v: Var) -> Lit {
        Lit((v.0 << 1) | 1)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// The conflict limit was reached.
    Unknown,
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

fn lit_value(assigns: &[i8], lit: Lit) -> i8 {
    let v = assigns[lit.var().0 as usize];
    if lit.is_negated() {
        -v
    } else {
        v
    }
}

#[derive(Default)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    inconsistent: bool,
    model: Vec<bool>,
    conflicts: u64,
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            var_inc: 1.0,
            ..Default::default()
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.phase.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v.0, &self.activity);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Total conflicts over the solver's lifetime.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Adds a clause at decision level zero. Returns false once the clause
    /// set is known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if self.inconsistent {
            return false;
        }
        debug_assert!(self.trail_lim.is_empty());
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if c.iter().any(|&l| lit_value(&self.assigns, l) == TRUE) {
            return true;
        }
        c.retain(|&l| lit_value(&self.assigns, l) == UNDEF);
        match c.len() {
            0 => {
                self.inconsistent = true;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.inconsistent = true;
                }
                !self.inconsistent
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0].index()].push(ci);
        self.watches[c[1].index()].push(ci);
        self.clauses.push(c);
        ci
    }

    /// Value of `v` in the last satisfying assignment.
    pub fn model_value(&self, v: Var) -> bool {
        self.model[v.0 as usize]
    }

    pub fn solve(&mut self) -> SolveResult {
        self.solve_with(&[], None)
    }

    /// Solves under `assumptions`, giving up after `max_conflicts` further
    /// conflicts. The solver returns to decision level zero afterwards.
    pub fn solve_with(&mut self, assumptions: &[Lit], max_conflicts: Option<u64>) -> SolveResult {
        if self.inconsistent {
            return SolveResult::Unsat;
        }
        let start = self.conflicts;
        let mut restart_index = 0u32;
        let mut restart_budget = 100 * luby(restart_index);
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.trail_lim.is_empty() {
                    self.inconsistent = true;
                    return SolveResult::Unsat;
                }
                let (learnt, back_level) = self.analyze(confl);
                self.cancel_until(back_level);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                self.var_inc /= 0.95;
                continue;
            }
            if let Some(limit) = max_conflicts {
                if self.conflicts - start >= limit {
                    self.cancel_until(0);
                    return SolveResult::Unknown;
                }
            }
            if since_restart >= restart_budget {
                restart_index += 1;
                restart_budget = 100 * luby(restart_index);
                since_restart = 0;
                self.cancel_until(0);
            }
            let mut next = None;
            while self.trail_lim.len() < assumptions.len() {
                let a = assumptions[self.trail_lim.len()];
                match lit_value(&self.assigns, a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        self.cancel_until(0);
                        return SolveResult::Unsat;
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next.or_else(|| self.pick_branch()) {
                Some(l) => l,
                None => {
                    self.model = self.assigns.iter().map(|&v| v == TRUE).collect();
                    self.cancel_until(0);
                    return SolveResult::Sat;
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF {
                let var = Var(v);
                return Some(if self.phase[v as usize] {
                    Lit::positive(var)
                } else {
                    Lit::negative(var)
                });
            }
        }
        None
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<usize>) {
        let v = lit.var().0 as usize;
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if lit.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, level: usize) {
        if self.trail_lim.len() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for i in (keep..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().0 as usize;
            self.phase[v] = !lit.is_negated();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(keep);
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let falsified = !self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified.index()]);
            let mut kept = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                if lit_value(&self.assigns, clause[0]) == TRUE {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    if lit_value(&self.assigns, clause[k]) != FALSE {
                        clause.swap(1, k);
                        self.watches[clause[1].index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[kept] = ci;
                kept += 1;
                let first = clause[0];
                if lit_value(&self.assigns, first) == FALSE {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(kept);
            self.watches[falsified.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v as u32, &self.activity);
    }

    fn analyze(&mut self, conflict: usize) -> (Vec<Lit>, usize) {
        let current = self.trail_lim.len() as u32;
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut clause_idx = conflict;
        let mut skip_first = false;
        let mut idx = self.trail.len();
        let asserting;
        loop {
            let lits = self.clauses[clause_idx].clone();
            for &q in lits.iter().skip(usize::from(skip_first)) {
                let v = q.var().0 as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().0 as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            let v = p.var().0 as usize;
            self.seen[v] = false;
            pending -= 1;
            if pending == 0 {
                asserting = !p;
                break;
            }
            clause_idx = self.reason[v].expect("implied literal has a reason");
            skip_first = true;
        }
        learnt[0] = asserting;
        for l in &learnt[1..] {
            self.seen[l.var().0 as usize] = false;
        }
        let mut back_level = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().0 as usize] > self.level[learnt[best].var().0 as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back_level = self.level[learnt[1].var().0 as usize] as usize;
        }
        (learnt, back_level)
    }
}

fn luby(i: u32) -> u64 {
    // 1 1 2 1 1 2 4 1 1 2 ...
    let mut x = u64::from(i);
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Binary max-heap of variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn insert(&mut self, v: u32, act: &[f64]) {
        let vi = v as usize;
        if self.pos.len() <= vi {
            self.pos.resize(vi + 1, None);
        }
        if self.pos[vi].is_some() {
            return;
        }
        self.heap.push(v);
        self.pos[vi] = Some(self.heap.len() - 1);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v as usize) {
            self.sift_up(*i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    // Ties broken towards the lower variable index.
    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && Self::better(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::better(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = Some(i);
        self.pos[self.heap[j] as usize] = Some(j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(num_vars: usize, clauses: &[Vec<i32>]) -> bool {
        (0u32..1 << num_vars).any(|bits| {
            clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let v = l.unsigned_abs() as usize - 1;
                    let val = bits >> v & 1 == 1;
                    if l > 0 {
                        val
                    } else {
                        !val
                    }
                })
            })
        })
    }

    fn load(num_vars: usize, clauses: &[Vec<i32>]) -> (Solver, Vec<Var>) {
        let mut s = Solver::new();
        let vars: Vec<Var> = (0..num_vars).map(|_| s.new_var()).collect();
        for c in clauses {
            let lits: Vec<Lit> = c
                .iter()
                .map(|&l| {
                    let v = vars[l.unsigned_abs() as usize - 1];
                    if l > 0 {
                        Lit::positive(v)
                    } else {
                        Lit::negative(v)
                    }
                })
                .collect();
            s.add_clause(&lits);
        }
        (s, vars)
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_four_into_three_is_unsat() {
        // p[i][h]: pigeon i sits in hole h
        let mut clauses = Vec::new();
        let var = |i: i32, h: i32| i * 3 + h + 1;
        for i in 0..4 {
            clauses.push((0..3).map(|h| var(i, h)).collect());
        }
        for h in 0..3 {
            for i in 0..4 {
                for j in i + 1..4 {
                    clauses.push(vec![-var(i, h), -var(j, h)]);
                }
            }
        }
        let (mut s, _) = load(12, &clauses);
        assert_eq!(s.solve(), SolveResult::Unsat);
    }

    #[test]
    fn assumptions_are_respected() {
        let (mut s, v) = load(2, &[vec![1, 2]]);
        assert_eq!(s.solve_with(&[Lit::negative(v[0])], None), SolveResult::Sat);
        assert!(s.model_value(v[1]));
        assert_eq!(
            s.solve_with(&[Lit::negative(v[0]), Lit::negative(v[1])], None),
            SolveResult::Unsat
        );
        // Unsat under assumptions does not poison the solver.
        assert_eq!(s.solve(), SolveResult::Sat);
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables(
            num_vars in 1usize..9,
            raw in prop::collection::vec(prop::collection::vec((0u8..8, any::<bool>()), 1..4), 0..40),
        ) {
            let clauses: Vec<Vec<i32>> = raw
                .iter()
                .map(|c| c.iter().map(|&(v, pos)| {
                    let v = (v as usize % num_vars) as i32 + 1;
                    if pos { v } else { -v }
                }).collect())
                .collect();
            let expected = brute_force(num_vars, &clauses);
            let (mut s, vars) = load(num_vars, &clauses);
            let got = s.solve();
            prop_assert_eq!(got == SolveResult::Sat, expected);
            if got == SolveResult::Sat {
                for c in &clauses {
                    let satisfied = c.iter().any(|&l| {
                        let val = s.model_value(vars[l.unsigned_abs() as usize - 1]);
                        if l > 0 { val } else { !val }
                    });
                    prop_assert!(satisfied);
                }
            }
        }
    }
}
