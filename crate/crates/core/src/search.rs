//! Exhaustive small-structure search with constraint propagation.
//!
//! Structures are enumerated by assigning table cells depth-first in a fixed
//! order (constants, relation bits, function cells, each sorted by symbol
//! name; the domain is {0..N-1} and cell values increase). After every
//! assignment the filter sentences are re-evaluated three-valuedly on the
//! partial tables; a definitely-false filter prunes the whole subtree. The
//! yielded order is therefore deterministic: lexicographic on the flattened
//! cell vector.
//!
//! Symmetry reduction: by default the constant 0 (when present) is pinned to
//! element 0. Every structure is isomorphic to one of that shape, so a model
//! exists iff one is yielded.

use crate::cert::cert_formula;
use crate::formula::Formula;
use crate::model::Structure;
use crate::nat::Nat;
use crate::signature::{Signature, ZERO};
use crate::term::{Term, Var};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("size {0} exceeds the configured search budget {1}")]
    SizeTooLarge(usize, usize),
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Largest domain size the enumerator accepts.
    pub max_size: usize,
    /// Pin the constant 0 to element 0 (isomorphism-sound reduction).
    pub fix_zero: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_size: 3, fix_zero: true }
    }
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Const(usize),
    /// (relation index, flat table index)
    Rel(usize, usize),
    /// (function index, flat table index)
    Fun(usize, usize),
}

/// A filter: a formula plus a fixed element assignment for its free
/// variables (empty for sentences).
#[derive(Debug, Clone)]
pub struct Filter {
    pub formula: Formula,
    pub assignment: Vec<(Var, usize)>,
}

impl Filter {
    pub fn sentence(f: Formula) -> Filter {
        Filter { formula: f, assignment: Vec::new() }
    }
}

/// Enumerates all structures of exactly `size` over `sig` satisfying every
/// filter, in deterministic order.
pub fn enumerate_structures(
    sig: &Signature,
    size: usize,
    filters: Vec<Formula>,
    config: &SearchConfig,
) -> Result<StructureIter, SearchError> {
    enumerate_with_filters(
        sig,
        size,
        filters.into_iter().map(Filter::sentence).collect(),
        config,
    )
}

pub fn enumerate_with_filters(
    sig: &Signature,
    size: usize,
    filters: Vec<Filter>,
    config: &SearchConfig,
) -> Result<StructureIter, SearchError> {
    if size == 0 || size > config.max_size {
        return Err(SearchError::SizeTooLarge(size, config.max_size));
    }
    Ok(StructureIter::new(sig.clone(), size, filters, config.fix_zero))
}

pub struct StructureIter {
    st: Structure,
    size: usize,
    cells: Vec<Cell>,
    rel_names: Vec<String>,
    fun_names: Vec<String>,
    const_names: Vec<String>,
    /// assignment masks parallel to the tables
    const_set: Vec<bool>,
    rel_set: Vec<Vec<bool>>,
    fun_set: Vec<Vec<bool>>,
    filters: Vec<Filter>,
    /// current choice at each depth; usize::MAX = not yet started
    choice: Vec<usize>,
    depth: usize,
    done: bool,
    started: bool,
}

impl StructureIter {
    fn new(sig: Signature, size: usize, filters: Vec<Filter>, fix_zero: bool) -> StructureIter {
        let st = Structure::new(sig.clone(), size);
        let const_names: Vec<String> = st.constants.keys().cloned().collect();
        let rel_names: Vec<String> = st.relations.keys().cloned().collect();
        let fun_names: Vec<String> = st.functions.keys().cloned().collect();
        let mut cells = Vec::new();
        for (i, name) in const_names.iter().enumerate() {
            if fix_zero && name == ZERO {
                continue; // pinned to element 0 by Structure::new
            }
            cells.push(Cell::Const(i));
        }
        for (i, name) in rel_names.iter().enumerate() {
            let len = st.relations[name].1.len();
            for j in 0..len {
                cells.push(Cell::Rel(i, j));
            }
        }
        for (i, name) in fun_names.iter().enumerate() {
            let len = st.functions[name].1.len();
            for j in 0..len {
                cells.push(Cell::Fun(i, j));
            }
        }
        let const_set = const_names.iter().map(|n| fix_zero && n == ZERO).collect();
        let rel_set = rel_names.iter().map(|n| vec![false; st.relations[n].1.len()]).collect();
        let fun_set = fun_names.iter().map(|n| vec![false; st.functions[n].1.len()]).collect();
        let choice = vec![usize::MAX; cells.len()];
        StructureIter {
            st,
            size,
            cells,
            rel_names,
            fun_names,
            const_names,
            const_set,
            rel_set,
            fun_set,
            filters,
            choice,
            depth: 0,
            done: false,
            started: false,
        }
    }

    fn cell_arity(&self, cell: Cell) -> usize {
        match cell {
            Cell::Const(_) => self.size,
            Cell::Rel(..) => 2,
            Cell::Fun(..) => self.size,
        }
    }

    fn set_cell(&mut self, cell: Cell, value: usize) {
        match cell {
            Cell::Const(i) => {
                *self.st.constants.get_mut(&self.const_names[i]).unwrap() = value;
                self.const_set[i] = true;
            }
            Cell::Rel(i, j) => {
                self.st.relations.get_mut(&self.rel_names[i]).unwrap().1[j] = value == 1;
                self.rel_set[i][j] = true;
            }
            Cell::Fun(i, j) => {
                self.st.functions.get_mut(&self.fun_names[i]).unwrap().1[j] = value;
                self.fun_set[i][j] = true;
            }
        }
    }

    fn clear_cell(&mut self, cell: Cell) {
        match cell {
            Cell::Const(i) => self.const_set[i] = false,
            Cell::Rel(i, j) => self.rel_set[i][j] = false,
            Cell::Fun(i, j) => self.fun_set[i][j] = false,
        }
    }

    fn filters_possible(&self) -> bool {
        let p = PartialView { it: self };
        self.filters.iter().all(|f| {
            let mut env = vec![None; 1 + max_var(&f.formula) as usize];
            for (v, e) in &f.assignment {
                let idx = v.0 as usize;
                if idx < env.len() {
                    env[idx] = Some(*e);
                }
            }
            p.eval(&f.formula, &mut env) != Some(false)
        })
    }

    fn filters_hold(&self) -> bool {
        let p = PartialView { it: self };
        self.filters.iter().all(|f| {
            let mut env = vec![None; 1 + max_var(&f.formula) as usize];
            for (v, e) in &f.assignment {
                let idx = v.0 as usize;
                if idx < env.len() {
                    env[idx] = Some(*e);
                }
            }
            p.eval(&f.formula, &mut env) == Some(true)
        })
    }
}

fn max_var(f: &Formula) -> u32 {
    f.all_vars().iter().next_back().map(|v| v.0).unwrap_or(0)
}

impl Iterator for StructureIter {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            // empty cell list (identity-only signatures)
            if self.cells.is_empty() {
                self.done = true;
                return if self.filters_hold() { Some(self.st.clone()) } else { None };
            }
        } else {
            // resume: back up from the last yielded full assignment
            self.depth = self.cells.len();
        }
        loop {
            if self.depth == self.cells.len() {
                // backtrack to find the next candidate
                loop {
                    if self.depth == 0 {
                        self.done = true;
                        return None;
                    }
                    self.depth -= 1;
                    let cell = self.cells[self.depth];
                    let next = self.choice[self.depth] + 1;
                    if next < self.cell_arity(cell) {
                        self.choice[self.depth] = next;
                        self.set_cell(cell, next);
                        if self.filters_possible() {
                            self.depth += 1;
                            break;
                        }
                        // stay at this depth, try the following value
                        self.depth += 1;
                    } else {
                        self.clear_cell(cell);
                        self.choice[self.depth] = usize::MAX;
                    }
                }
            } else {
                // descend with value 0
                let cell = self.cells[self.depth];
                self.choice[self.depth] = 0;
                self.set_cell(cell, 0);
                if self.filters_possible() {
                    self.depth += 1;
                }
                // if pruned, the backtrack loop above will advance the value:
                // force entry into it by marking this depth as complete
                else {
                    self.depth += 1;
                    continue;
                }
            }
            if self.depth == self.cells.len() && self.filters_hold() {
                return Some(self.st.clone());
            }
        }
    }
}

/// Read-only three-valued view of the partially assigned structure.
struct PartialView<'a> {
    it: &'a StructureIter,
}

impl<'a> PartialView<'a> {
    fn constant(&self, name: &str) -> Option<usize> {
        let i = self.it.const_names.iter().position(|n| n == name)?;
        if self.it.const_set[i] {
            Some(self.it.st.constants[name])
        } else {
            None
        }
    }

    fn fun_at(&self, name: &str, args: &[usize]) -> Option<usize> {
        let i = self.it.fun_names.iter().position(|n| n == name)?;
        let (arity, table) = &self.it.st.functions[name];
        if *arity != args.len() {
            return None;
        }
        let mut idx = 0;
        for a in args {
            idx = idx * self.it.size + a;
        }
        if self.it.fun_set[i][idx] {
            Some(table[idx])
        } else {
            None
        }
    }

    fn rel_at(&self, name: &str, args: &[usize]) -> Option<bool> {
        let i = self.it.rel_names.iter().position(|n| n == name)?;
        let (arity, table) = &self.it.st.relations[name];
        if *arity != args.len() {
            return None;
        }
        let mut idx = 0;
        for a in args {
            idx = idx * self.it.size + a;
        }
        if self.it.rel_set[i][idx] {
            Some(table[idx])
        } else {
            None
        }
    }

    fn term(&self, t: &Term, env: &[Option<usize>]) -> Option<usize> {
        match t {
            Term::Var(v) => env.get(v.0 as usize).copied().flatten(),
            Term::Num(n) => self.numeral(n),
            Term::Const(c) => self.constant(c),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.term(a, env)?);
                }
                self.fun_at(f, &vals)
            }
        }
    }

    fn numeral(&self, n: &Nat) -> Option<usize> {
        let mut val = self.constant(ZERO)?;
        let mut remaining = n.clone();
        let mut seen = vec![usize::MAX; self.it.size];
        let mut steps = 0usize;
        while !remaining.is_zero() {
            if seen[val] != usize::MAX {
                let cycle_len = (steps - seen[val]) as u64;
                let rem = match remaining.as_u64() {
                    Some(r) => r % cycle_len,
                    None => {
                        use num_traits::ToPrimitive;
                        (remaining.to_big() % cycle_len).to_u64().unwrap()
                    }
                };
                for _ in 0..rem {
                    val = self.fun_at(crate::signature::SUCC, &[val])?;
                }
                return Some(val);
            }
            seen[val] = steps;
            val = self.fun_at(crate::signature::SUCC, &[val])?;
            remaining = remaining.pred().unwrap();
            steps += 1;
        }
        Some(val)
    }

    fn eval(&self, f: &Formula, env: &mut Vec<Option<usize>>) -> Option<bool> {
        use Formula::*;
        match f {
            Atom(r, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.term(a, env)?);
                }
                self.rel_at(r, &vals)
            }
            Eq(a, b) => Some(self.term(a, env)? == self.term(b, env)?),
            Not(g) => self.eval(g, env).map(|b| !b),
            And(a, b) => kleene_and(self.eval(a, env), self.eval(b, env)),
            Or(a, b) => kleene_or(self.eval(a, env), self.eval(b, env)),
            Implies(a, b) => kleene_or(self.eval(a, env).map(|x| !x), self.eval(b, env)),
            Iff(a, b) => match (self.eval(a, env), self.eval(b, env)) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            },
            Forall(v, g) => self.sweep(*v, None, g, env, false),
            Exists(v, g) => self.sweep(*v, None, g, env, true),
            BForall(v, t, g) => self.sweep(*v, Some(t), g, env, false),
            BExists(v, t, g) => self.sweep(*v, Some(t), g, env, true),
        }
    }

    fn sweep(
        &self,
        v: Var,
        bound: Option<&Term>,
        body: &Formula,
        env: &mut Vec<Option<usize>>,
        exists: bool,
    ) -> Option<bool> {
        let idx = v.0 as usize;
        if env.len() <= idx {
            env.resize(idx + 1, None);
        }
        let saved = env[idx];
        let mut unknown = false;
        let mut decided = false;
        for d in 0..self.it.size {
            env[idx] = Some(d);
            let in_range = match bound {
                None => Some(true),
                Some(t) => match self.term(t, env) {
                    Some(b) => self.rel_at(crate::signature::LEQ, &[d, b]),
                    None => None,
                },
            };
            let contribution = match in_range {
                Some(false) => Some(!exists), // out of range: neutral element
                Some(true) => self.eval(body, env),
                None => None,
            };
            match contribution {
                Some(x) if x == exists => {
                    decided = true;
                    break;
                }
                Some(_) => {}
                None => unknown = true,
            }
        }
        env[idx] = saved;
        if decided {
            Some(exists)
        } else if unknown {
            None
        } else {
            Some(!exists)
        }
    }
}

fn kleene_and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn kleene_or(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

/// A structure with a designated certified element and the largest k for
/// which no numeral below k denotes that element.
#[derive(Debug, Clone)]
pub struct DaggerWitness {
    pub structure: Structure,
    pub element: usize,
    pub k: u64,
}

/// True iff `m` satisfies cert(v) at the given element and the numerals
/// 0..k-1 all denote elements different from it.
pub fn check_dagger(m: &Structure, element: usize, k: u64) -> bool {
    let v = Var(0);
    let a = crate::model::Assignment::of(&[(v, element)]);
    match m.eval(&cert_formula(v), &a) {
        Ok(true) => {}
        _ => return false,
    }
    for i in 0..k {
        match m.numeral_value(i) {
            Ok(e) if e != element => {}
            _ => return false,
        }
    }
    true
}

/// Harvests dagger witnesses from all structures of size <= `max_size`
/// having a certified element, taking for each certified element the largest
/// k <= max_k satisfying the side condition.
pub fn harvest_daggers(
    max_size: usize,
    max_k: u64,
    config: &SearchConfig,
) -> Result<Vec<DaggerWitness>, SearchError> {
    let sig = Signature::l_a();
    let mut out = Vec::new();
    for size in 1..=max_size {
        for element in 0..size {
            let filter = Filter { formula: cert_formula(Var(0)), assignment: vec![(Var(0), element)] };
            let iter = enumerate_with_filters(&sig, size, vec![filter], config)?;
            for st in iter {
                let mut k = 0;
                while k < max_k && st.numeral_value(k).map(|e| e != element).unwrap_or(false) {
                    k += 1;
                }
                out.push(DaggerWitness { structure: st, element, k });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn size_one_structures_over_la() {
        // with every table forced on a single element, only the <= bit varies
        let iter = enumerate_structures(
            &Signature::l_a(),
            1,
            vec![parse("0 = 0").unwrap()],
            &SearchConfig::default(),
        )
        .unwrap();
        let found: Vec<Structure> = iter.collect();
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn identity_only_size_two_distinct_elements() {
        let iter = enumerate_structures(
            &Signature::identity_only(),
            2,
            vec![parse("exists x exists y ~(x = y)").unwrap()],
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(iter.count(), 1);
    }

    #[test]
    fn size_budget_enforced() {
        let r = enumerate_structures(&Signature::l_a(), 4, vec![], &SearchConfig::default());
        assert!(matches!(r, Err(SearchError::SizeTooLarge(4, 3))));
    }

    #[test]
    fn filters_prune_soundly() {
        // forall x (x = x) holds everywhere; exists x ~(x = x) nowhere
        let all = enumerate_structures(
            &Signature::identity_only(),
            2,
            vec![parse("forall x x = x").unwrap()],
            &SearchConfig::default(),
        )
        .unwrap()
        .count();
        assert_eq!(all, 1);
        let none = enumerate_structures(
            &Signature::identity_only(),
            2,
            vec![parse("exists x ~(x = x)").unwrap()],
            &SearchConfig::default(),
        )
        .unwrap()
        .count();
        assert_eq!(none, 0);
    }

    #[test]
    fn deterministic_order() {
        let collect = || -> Vec<String> {
            enumerate_structures(
                &Signature::l_a(),
                1,
                vec![],
                &SearchConfig::default(),
            )
            .unwrap()
            .map(|s| s.to_string())
            .collect()
        };
        assert_eq!(collect(), collect());
    }

    #[test]
    fn dagger_on_clipped_models() {
        let m = crate::model::clipped_model(50);
        assert!(check_dagger(&m, 6, 6));
        assert!(!check_dagger(&m, 6, 7)); // numeral 6 denotes the element
        // k = 0 reduces to certification alone
        assert!(check_dagger(&m, 6, 0));
        assert!(!check_dagger(&m, 50, 0)); // 50*50 clips: cert fails at the top
    }

    #[test]
    fn size_two_dagger_harvest_is_nonempty() {
        let witnesses = harvest_daggers(2, 3, &SearchConfig::default()).unwrap();
        assert!(!witnesses.is_empty());
        for w in &witnesses {
            assert!(check_dagger(&w.structure, w.element, w.k));
        }
    }
}
