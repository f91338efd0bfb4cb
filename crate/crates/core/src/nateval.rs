//! Bounded evaluation over the standard model of arithmetic.
//!
//! Delta0 formulas are decided exactly; a leading block of unbounded
//! existentials is searched up to a witness cap, returning `Unknown` when no
//! witness is found. Anything else is rejected.
//!
//! Quantified variables whose value is forced by an equational conjunct
//! (`v = t`, `S v = t`, `v + a = t`, `a * v = t`, ...) are bound directly
//! instead of being swept. Blocks of existentials (unbounded or bounded) are
//! solved jointly: all forced variables are bound first, with bound checks
//! deferred until their bounds become evaluable, and only the leftover
//! variables are swept. This is what makes certificate-sized bounded blocks
//! and purified numeral chains evaluable in practice.

use crate::formula::Formula;
use crate::nat::Nat;
use crate::signature::{LEQ, PLUS, SUCC, TIMES};
use crate::term::{Term, Var};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

impl std::fmt::Display for Tri {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tri::True => "true",
            Tri::False => "false",
            Tri::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NatEvalError {
    #[error("formula is not decidable by bounded search: {0}")]
    NotDecidable(String),
    #[error("unassigned free variable v{0}")]
    Unassigned(u32),
    #[error("symbol {0} has no standard interpretation")]
    UnknownSymbol(String),
    #[error("bounded range {0} exceeds the scan budget {1}; no forcing conjunct found")]
    ScanBudget(Nat, u64),
}

/// Default witness-search cap for leading existentials.
pub const DEFAULT_WITNESS_CAP: u64 = 10_000;
/// Default largest bounded range the evaluator will sweep element by element.
pub const DEFAULT_SCAN_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Default)]
pub struct NatAssignment {
    map: BTreeMap<Var, Nat>,
}

impl NatAssignment {
    pub fn new() -> NatAssignment {
        NatAssignment { map: BTreeMap::new() }
    }

    pub fn of(pairs: &[(Var, Nat)]) -> NatAssignment {
        NatAssignment { map: pairs.iter().cloned().collect() }
    }

    pub fn set(&mut self, v: Var, n: Nat) {
        self.map.insert(v, n);
    }

    pub fn get(&self, v: Var) -> Option<&Nat> {
        self.map.get(&v)
    }
}

struct Evaluator {
    env: BTreeMap<Var, Nat>,
    scan_budget: u64,
    witness_cap: Nat,
}

#[derive(Debug)]
enum Forced {
    Value(Nat),
    NoSolution,
    Undetermined,
}

/// One variable of an existential block: `bound` is `None` for a leading
/// unbounded existential (capped by the witness cap) and `Some(t)` for a
/// bounded one.
#[derive(Clone)]
struct BlockVar {
    v: Var,
    bound: Option<Term>,
}

/// Three-valued evaluation of `f` over the standard model.
pub fn nat_evaluate(f: &Formula, a: &NatAssignment, witness_cap: u64) -> Result<Tri, NatEvalError> {
    nat_evaluate_budgeted(f, a, witness_cap, DEFAULT_SCAN_BUDGET)
}

pub fn nat_evaluate_budgeted(
    f: &Formula,
    a: &NatAssignment,
    witness_cap: u64,
    scan_budget: u64,
) -> Result<Tri, NatEvalError> {
    let (prefix, matrix) = f.strip_exists_prefix();
    if !crate::classify::is_delta0(matrix) {
        return Err(NatEvalError::NotDecidable(
            "matrix under the existential prefix is not Delta0".to_string(),
        ));
    }
    let mut ev = Evaluator {
        env: a.map.clone(),
        scan_budget,
        witness_cap: Nat::from(witness_cap),
    };
    if prefix.is_empty() {
        return ev.delta0(matrix).map(Tri::from_bool);
    }
    let mut vars: Vec<BlockVar> =
        prefix.into_iter().map(|v| BlockVar { v, bound: None }).collect();
    let matrix = strip_bexists_chain(matrix, &mut vars);
    let found = ev.block(&vars, matrix)?;
    Ok(if found { Tri::True } else { Tri::Unknown })
}

/// Convenience wrapper for sentences.
pub fn nat_truth(f: &Formula, witness_cap: u64) -> Result<Tri, NatEvalError> {
    nat_evaluate(f, &NatAssignment::new(), witness_cap)
}

/// Least witness of the leading existential of a 1-Sigma1-shaped sentence,
/// if one exists below the cap.
pub fn least_witness(f: &Formula, witness_cap: u64) -> Result<Option<Nat>, NatEvalError> {
    let (prefix, matrix) = f.strip_exists_prefix();
    if prefix.is_empty() {
        return Err(NatEvalError::NotDecidable("no leading existential".to_string()));
    }
    if !crate::classify::is_delta0(matrix) {
        return Err(NatEvalError::NotDecidable("matrix is not Delta0".to_string()));
    }
    let head = prefix[0];
    let rest: Vec<BlockVar> =
        prefix[1..].iter().map(|v| BlockVar { v: *v, bound: None }).collect();
    let mut ev = Evaluator {
        env: BTreeMap::new(),
        scan_budget: DEFAULT_SCAN_BUDGET,
        witness_cap: Nat::from(witness_cap),
    };
    let mut w = Nat::ZERO;
    let cap = Nat::from(witness_cap);
    while w <= cap {
        ev.env.insert(head, w.clone());
        let ok = if rest.is_empty() {
            ev.delta0(matrix)?
        } else {
            ev.block(&rest, matrix)?
        };
        ev.env.remove(&head);
        if ok {
            return Ok(Some(w));
        }
        w = w.succ();
    }
    Ok(None)
}

/// Extends `vars` with a maximal chain of bounded existentials, returning the
/// remaining matrix. Stops at shadowing.
fn strip_bexists_chain<'f>(mut f: &'f Formula, vars: &mut Vec<BlockVar>) -> &'f Formula {
    while let Formula::BExists(v, t, body) = f {
        if vars.iter().any(|bv| bv.v == *v) {
            break;
        }
        vars.push(BlockVar { v: *v, bound: Some(t.clone()) });
        f = body;
    }
    f
}

impl Evaluator {
    fn term(&self, t: &Term) -> Result<Nat, NatEvalError> {
        match t {
            Term::Var(v) => self.env.get(v).cloned().ok_or(NatEvalError::Unassigned(v.0)),
            Term::Num(n) => Ok(n.clone()),
            Term::Const(c) => Err(NatEvalError::UnknownSymbol(c.clone())),
            Term::App(f, args) => {
                let vals: Result<Vec<Nat>, _> = args.iter().map(|a| self.term(a)).collect();
                let vals = vals?;
                match (f.as_str(), vals.as_slice()) {
                    (SUCC, [x]) => Ok(x.succ()),
                    (PLUS, [x, y]) => Ok(x.add(y)),
                    (TIMES, [x, y]) => Ok(x.mul(y)),
                    _ => Err(NatEvalError::UnknownSymbol(f.clone())),
                }
            }
        }
    }

    /// Term evaluation that tolerates unassigned variables (returns None).
    fn term_opt(&self, t: &Term) -> Result<Option<Nat>, NatEvalError> {
        match t {
            Term::Var(v) => Ok(self.env.get(v).cloned()),
            Term::Num(n) => Ok(Some(n.clone())),
            Term::Const(c) => Err(NatEvalError::UnknownSymbol(c.clone())),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    match self.term_opt(a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(None),
                    }
                }
                match (f.as_str(), vals.as_slice()) {
                    (SUCC, [x]) => Ok(Some(x.succ())),
                    (PLUS, [x, y]) => Ok(Some(x.add(y))),
                    (TIMES, [x, y]) => Ok(Some(x.mul(y))),
                    _ => Err(NatEvalError::UnknownSymbol(f.clone())),
                }
            }
        }
    }

    fn delta0(&mut self, f: &Formula) -> Result<bool, NatEvalError> {
        use Formula::*;
        match f {
            Eq(a, b) => Ok(self.term(a)? == self.term(b)?),
            Atom(r, args) if r == LEQ && args.len() == 2 => {
                Ok(self.term(&args[0])? <= self.term(&args[1])?)
            }
            Atom(r, args) if r == crate::signature::PRED_P && args.len() == 1 => {
                // R0p's P holds of every standard number.
                let _ = self.term(&args[0])?;
                Ok(true)
            }
            Atom(r, _) => Err(NatEvalError::UnknownSymbol(r.clone())),
            Not(g) => Ok(!self.delta0(g)?),
            And(a, b) => Ok(self.delta0(a)? && self.delta0(b)?),
            Or(a, b) => Ok(self.delta0(a)? || self.delta0(b)?),
            Implies(a, b) => Ok(!self.delta0(a)? || self.delta0(b)?),
            Iff(a, b) => Ok(self.delta0(a)? == self.delta0(b)?),
            Forall(..) | Exists(..) => Err(NatEvalError::NotDecidable(
                "unbounded quantifier inside a Delta0 context".to_string(),
            )),
            BExists(..) => {
                let mut vars = Vec::new();
                let matrix = strip_bexists_chain(f, &mut vars);
                self.block(&vars, matrix)
            }
            BForall(v, t, body) => {
                let bound = self.term(t)?;
                // A forcing conjunct in the antecedent of an implication
                // makes every other value satisfy the implication vacuously.
                if let Implies(ant, _) = &**body {
                    match self.forced_value(*v, ant)? {
                        Forced::Value(val) => {
                            if val > bound {
                                return Ok(true);
                            }
                            let saved = self.env.insert(*v, val);
                            let r = self.delta0(body);
                            restore(&mut self.env, *v, saved);
                            return r;
                        }
                        Forced::NoSolution => return Ok(true),
                        Forced::Undetermined => {}
                    }
                }
                let limit = bound
                    .as_u64()
                    .filter(|b| *b <= self.scan_budget)
                    .ok_or_else(|| NatEvalError::ScanBudget(bound.clone(), self.scan_budget))?;
                let saved = self.env.get(v).cloned();
                let mut result = true;
                for w in 0..=limit {
                    self.env.insert(*v, Nat::from(w));
                    if !self.delta0(body)? {
                        result = false;
                        break;
                    }
                }
                restore(&mut self.env, *v, saved);
                Ok(result)
            }
        }
    }

    /// Solves an existential block: binds every forced variable (deferring
    /// bound checks until their bounds evaluate), then sweeps the first truly
    /// undetermined variable.
    fn block(&mut self, vars: &[BlockVar], matrix: &Formula) -> Result<bool, NatEvalError> {
        let mut bound_here: Vec<Var> = Vec::new();
        let result = self.block_inner(vars, matrix, &mut bound_here);
        for v in bound_here {
            self.env.remove(&v);
        }
        result
    }

    fn block_inner(
        &mut self,
        vars: &[BlockVar],
        matrix: &Formula,
        bound_here: &mut Vec<Var>,
    ) -> Result<bool, NatEvalError> {
        // Propagation rounds: bind forced variables. Bound checks on values
        // whose bound is not yet evaluable are deferred to the final
        // verification pass.
        loop {
            let mut progress = false;
            for bv in vars {
                if self.env.contains_key(&bv.v) {
                    continue;
                }
                match self.forced_value(bv.v, matrix)? {
                    Forced::Value(val) => {
                        // fast-fail when the constraint is already checkable
                        match &bv.bound {
                            None => {
                                if val > self.witness_cap {
                                    return Ok(false);
                                }
                            }
                            Some(t) => {
                                if let Some(b) = self.term_opt(t)? {
                                    if val > b {
                                        return Ok(false);
                                    }
                                }
                            }
                        }
                        self.env.insert(bv.v, val);
                        bound_here.push(bv.v);
                        progress = true;
                    }
                    Forced::NoSolution => return Ok(false),
                    Forced::Undetermined => {}
                }
            }
            if !progress {
                break;
            }
        }
        // Find a variable to sweep: prefer one whose range is known.
        let next = vars.iter().find(|bv| {
            !self.env.contains_key(&bv.v)
                && match &bv.bound {
                    None => true,
                    Some(t) => matches!(self.term_opt(t), Ok(Some(_))),
                }
        });
        let Some(bv) = next else {
            if let Some(bv) = vars.iter().find(|bv| !self.env.contains_key(&bv.v)) {
                return Err(NatEvalError::NotDecidable(format!(
                    "cannot order the existential block around v{}",
                    bv.v.0
                )));
            }
            // Everything bound: verify every bound constraint (including the
            // ones deferred above), then the matrix.
            for bv in vars {
                if let Some(t) = &bv.bound {
                    if self.env[&bv.v] > self.term(t)? {
                        return Ok(false);
                    }
                }
            }
            return self.delta0(matrix);
        };
        let limit_nat = match &bv.bound {
            None => self.witness_cap.clone(),
            Some(t) => self.term(t)?,
        };
        let limit = limit_nat
            .as_u64()
            .filter(|b| *b <= self.scan_budget)
            .ok_or_else(|| NatEvalError::ScanBudget(limit_nat.clone(), self.scan_budget))?;
        for w in 0..=limit {
            self.env.insert(bv.v, Nat::from(w));
            let mut inner_bound: Vec<Var> = Vec::new();
            let r = self.block_inner(vars, matrix, &mut inner_bound);
            match r {
                Ok(true) => {
                    bound_here.push(bv.v);
                    bound_here.extend(inner_bound);
                    return Ok(true);
                }
                Ok(false) => {
                    for v in inner_bound {
                        self.env.remove(&v);
                    }
                }
                Err(e) => {
                    for v in inner_bound {
                        self.env.remove(&v);
                    }
                    self.env.remove(&bv.v);
                    return Err(e);
                }
            }
        }
        self.env.remove(&bv.v);
        Ok(false)
    }

    /// Scans the conjuncts of `f` for an atom that forces the value of `v`.
    fn forced_value(&self, v: Var, f: &Formula) -> Result<Forced, NatEvalError> {
        for c in f.conjuncts() {
            if let Formula::Eq(lhs, rhs) = c {
                match self.solve_eq(v, lhs, rhs)? {
                    Forced::Undetermined => match self.solve_eq(v, rhs, lhs)? {
                        Forced::Undetermined => continue,
                        other => return Ok(other),
                    },
                    other => return Ok(other),
                }
            }
        }
        Ok(Forced::Undetermined)
    }

    /// Tries to solve `pat = target` for `v`, where `target` must evaluate.
    fn solve_eq(&self, v: Var, pat: &Term, target: &Term) -> Result<Forced, NatEvalError> {
        if pat.contains_var(v) && !target.contains_var(v) {
            let Some(t) = self.term_opt(target)? else {
                return Ok(Forced::Undetermined);
            };
            return self.solve_pattern(v, pat, t);
        }
        Ok(Forced::Undetermined)
    }

    /// Solves `pat = value` for `v` where `pat` contains `v`.
    fn solve_pattern(&self, v: Var, pat: &Term, value: Nat) -> Result<Forced, NatEvalError> {
        match pat {
            Term::Var(w) if *w == v => Ok(Forced::Value(value)),
            Term::App(f, args) => match (f.as_str(), args.as_slice()) {
                (SUCC, [inner]) => match value.pred() {
                    Some(p) => self.solve_pattern(v, inner, p),
                    None => Ok(Forced::NoSolution),
                },
                (PLUS, [a, b]) => {
                    let (vpart, rest) = if a.contains_var(v) { (a, b) } else { (b, a) };
                    if rest.contains_var(v) {
                        return Ok(Forced::Undetermined);
                    }
                    let Some(r) = self.term_opt(rest)? else {
                        return Ok(Forced::Undetermined);
                    };
                    match value.checked_sub(&r) {
                        Some(d) => self.solve_pattern(v, vpart, d),
                        None => Ok(Forced::NoSolution),
                    }
                }
                (TIMES, [a, b]) => {
                    let (vpart, rest) = if a.contains_var(v) { (a, b) } else { (b, a) };
                    if rest.contains_var(v) {
                        return Ok(Forced::Undetermined);
                    }
                    let Some(r) = self.term_opt(rest)? else {
                        return Ok(Forced::Undetermined);
                    };
                    if r.is_zero() {
                        return if value.is_zero() {
                            Ok(Forced::Undetermined)
                        } else {
                            Ok(Forced::NoSolution)
                        };
                    }
                    match value.checked_div_exact(&r) {
                        Some(q) => self.solve_pattern(v, vpart, q),
                        None => Ok(Forced::NoSolution),
                    }
                }
                _ => Ok(Forced::Undetermined),
            },
            _ => Ok(Forced::Undetermined),
        }
    }
}

fn restore(env: &mut BTreeMap<Var, Nat>, v: Var, saved: Option<Nat>) {
    match saved {
        Some(x) => {
            env.insert(v, x);
        }
        None => {
            env.remove(&v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn truth(src: &str, cap: u64) -> Tri {
        nat_truth(&parse(src).unwrap(), cap).unwrap()
    }

    #[test]
    fn square_witness_found() {
        assert_eq!(truth("exists x x * x = 49", 100), Tri::True);
    }

    #[test]
    fn no_predecessor_of_zero() {
        assert_eq!(truth("exists x S x = 0", 1000), Tri::Unknown);
    }

    #[test]
    fn delta0_decided_exactly() {
        assert_eq!(truth("forall x <= 10 exists y <= x (y + y = x | y + y = S x)", 0), Tri::True);
        assert_eq!(truth("2 + 2 = 5", 0), Tri::False);
        assert_eq!(truth("~(2 + 2 = 5)", 0), Tri::True);
    }

    #[test]
    fn negation_of_delta0_exact() {
        assert_eq!(truth("~(forall x <= 4 x <= 3)", 0), Tri::True);
    }

    #[test]
    fn universal_rejected() {
        let f = parse("forall x x = x").unwrap();
        assert!(nat_truth(&f, 10).is_err());
    }

    #[test]
    fn forced_values_beyond_cap_are_unknown() {
        let f = parse("exists a (a = 1267650600228229401496703205376 & a <= a)").unwrap();
        assert_eq!(nat_truth(&f, 10).unwrap(), Tri::Unknown);
    }

    #[test]
    fn solver_inverts_arithmetic() {
        // y forced by S y = 10, x forced by x + y = 12
        let f = parse("exists x exists y (S y = 10 & x + y = 12 & x = 3)").unwrap();
        assert_eq!(nat_truth(&f, 10_000).unwrap(), Tri::True);
        let g = parse("exists x (x * 3 = 13)").unwrap();
        assert_eq!(nat_truth(&g, 10_000).unwrap(), Tri::Unknown);
        let h = parse("exists x (3 * x = 12 & x = 4)").unwrap();
        assert_eq!(nat_truth(&h, 10_000).unwrap(), Tri::True);
    }

    #[test]
    fn bounded_chain_propagates_without_sweeping() {
        // z and a are forced through the chain; x has no solution, so the
        // whole block fails fast even with a generous cap
        let f =
            parse("exists w exists x <= w exists a <= w exists z <= w (S x = a & 0 = z & a = z)")
                .unwrap();
        assert_eq!(nat_truth(&f, 1_000_000).unwrap(), Tri::Unknown);
    }

    #[test]
    fn bounded_forall_with_forcing_antecedent() {
        // only w = 9 satisfies the antecedent
        let f = parse("forall w <= 100 (S w = 10 -> w + w = 18)").unwrap();
        assert_eq!(nat_truth(&f, 0).unwrap(), Tri::True);
    }

    #[test]
    fn least_witness_search() {
        let f = parse("exists x (x * x = 49)").unwrap();
        assert_eq!(least_witness(&f, 100).unwrap(), Some(Nat::from(7u64)));
        let g = parse("exists x (S x = 0)").unwrap();
        assert_eq!(least_witness(&g, 100).unwrap(), None);
    }

    #[test]
    fn assignment_respected() {
        let f = parse("x + x = y").unwrap();
        let a = NatAssignment::of(&[(Var(0), Nat::from(3u64)), (Var(1), Nat::from(6u64))]);
        assert_eq!(nat_evaluate(&f, &a, 0).unwrap(), Tri::True);
    }
}
