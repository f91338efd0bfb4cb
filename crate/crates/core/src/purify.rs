//! Purification: rewriting Sigma1 formulas into pure Sigma1 form, and the
//! collapse of a pure Sigma1 sentence to a single leading existential.
//!
//! The output contains only the atom shapes `x0 = x1`, `0 = x0`, `S x0 = x1`,
//! `x0 + x1 = x2`, `x0 * x1 = x2`, `x0 <= x1` (and `P(x0)` over the extended
//! signature), with every bounded-quantifier bound a variable. Two contracts
//! hold by construction: the output is equivalent to the input over the
//! standard model, and output -> input is logically valid (each introduced
//! cell carries a defining atom that entails the original term equation).
//!
//! Compound subterms are flattened bottom-up into fresh existential "cells".
//! Cells inside the matrix are bounded by a single variable `B` defined in
//! the prefix as the sum of monotone closures of all flattened subterms
//! (every bound variable replaced by its bound, recursively), which keeps the
//! matrix Delta0. Numerals expand to successor chains `0 = a0, S a0 = a1, ...`;
//! numerals above 64 use doubling chains so code-sized numerals stay small.

use crate::classify::{classify, is_pure_delta0, SyntacticClass};
use crate::formula::Formula;
use crate::nat::Nat;
use crate::signature::{LEQ, PLUS, PRED_P, SUCC, TIMES};
use crate::term::{Term, Var};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PurifyError {
    #[error("input is not Sigma1 (classified {0})")]
    NotSigma1(SyntacticClass),
    #[error("input is not a sentence; free variables remain")]
    NotSentence,
    #[error("atom over symbol {0} cannot be purified")]
    UnsupportedAtom(String),
}

/// Threshold above which numerals flatten via doubling instead of unary
/// successor chains.
const UNARY_NUMERAL_MAX: u64 = 64;

/// Rewrites a Sigma1 (or Delta0) formula, possibly open, into an equivalent
/// pure Sigma1 formula.
pub fn purify(f: &Formula) -> Result<Formula, PurifyError> {
    let class = classify(f);
    if !class.is_sigma1() {
        return Err(PurifyError::NotSigma1(class));
    }
    if class.is_pure_sigma1() {
        return Ok(f.clone());
    }
    let (prefix, matrix) = f.strip_exists_prefix();
    let matrix = nnf(matrix, true);

    let base = f.all_vars().iter().next_back().map(|v| v.0 + 1).unwrap_or(0);
    let bound_var = Var(base);
    let mut fl = Flattener {
        next: base + 1,
        closures: Vec::new(),
        bound_var,
        lifted: Cells::default(),
    };
    let mut env = BTreeMap::new();
    let matrix2 = fl.tx(&matrix, &mut env, true)?;

    let mut parts = std::mem::take(&mut fl.lifted.defs);
    let mut all_prefix = prefix;
    all_prefix.extend(fl.lifted.vars.iter().copied());

    if !fl.closures.is_empty() {
        // Cells under bounded quantifiers need the global bound B, defined in
        // the prefix as the sum of all monotone closures.
        let total = fl
            .closures
            .clone()
            .into_iter()
            .reduce(Term::plus)
            .expect("nonempty closure list");
        let mut bcells = Cells::default();
        let root = fl.reduce(&total, &BTreeMap::new(), &mut bcells)?;
        all_prefix.extend(bcells.vars.iter().copied());
        all_prefix.push(bound_var);
        parts.extend(bcells.defs);
        parts.push(Formula::eq(Term::Var(root), Term::Var(bound_var)));
    }

    parts.push(matrix2);
    let out = Formula::exists_block(&all_prefix, Formula::big_and(parts));
    debug_assert!(classify(&out).is_pure_sigma1(), "impure output: {out}");
    Ok(out)
}

/// Collapses a Sigma1 sentence to a pure 1-Sigma1 sentence: with
/// `purify(f) = exists v... m`, the result is `exists x exists v... <= x m`.
pub fn collapse_to_one(f: &Formula) -> Result<Formula, PurifyError> {
    if !f.is_closed() {
        return Err(PurifyError::NotSentence);
    }
    let pure = purify(f)?;
    let (prefix, matrix) = pure.strip_exists_prefix();
    assert!(!prefix.is_empty(), "closed pure Delta0 formulas cannot exist");
    let x = Var(pure.all_vars().iter().next_back().map(|v| v.0 + 1).unwrap_or(0));
    let body = prefix
        .iter()
        .rev()
        .fold(matrix.clone(), |acc, v| Formula::bexists(*v, Term::Var(x), acc));
    let out = Formula::exists(x, body);
    debug_assert_eq!(classify(&out), SyntacticClass::PureOneSigma1, "collapse failed: {out}");
    Ok(out)
}

/// Negation normal form over a Delta0 formula: negations pushed to atoms,
/// implications and equivalences expanded.
pub fn nnf(f: &Formula, positive: bool) -> Formula {
    use Formula::*;
    match f {
        Atom(..) | Eq(..) => {
            if positive {
                f.clone()
            } else {
                Formula::not(f.clone())
            }
        }
        Not(g) => nnf(g, !positive),
        And(a, b) => {
            if positive {
                Formula::and(nnf(a, true), nnf(b, true))
            } else {
                Formula::or(nnf(a, false), nnf(b, false))
            }
        }
        Or(a, b) => {
            if positive {
                Formula::or(nnf(a, true), nnf(b, true))
            } else {
                Formula::and(nnf(a, false), nnf(b, false))
            }
        }
        Implies(a, b) => {
            if positive {
                Formula::or(nnf(a, false), nnf(b, true))
            } else {
                Formula::and(nnf(a, true), nnf(b, false))
            }
        }
        Iff(a, b) => {
            if positive {
                Formula::and(
                    Formula::or(nnf(a, false), nnf(b, true)),
                    Formula::or(nnf(b, false), nnf(a, true)),
                )
            } else {
                Formula::or(
                    Formula::and(nnf(a, true), nnf(b, false)),
                    Formula::and(nnf(b, true), nnf(a, false)),
                )
            }
        }
        BForall(v, t, g) => {
            if positive {
                Formula::BForall(*v, t.clone(), Box::new(nnf(g, true)))
            } else {
                Formula::BExists(*v, t.clone(), Box::new(nnf(g, false)))
            }
        }
        BExists(v, t, g) => {
            if positive {
                Formula::BExists(*v, t.clone(), Box::new(nnf(g, true)))
            } else {
                Formula::BForall(*v, t.clone(), Box::new(nnf(g, false)))
            }
        }
        Forall(..) | Exists(..) => {
            // callers guarantee a Delta0 matrix
            unreachable!("nnf applied to a non-Delta0 formula")
        }
    }
}

/// Cell accumulator for one flattening site.
#[derive(Default)]
struct Cells {
    vars: Vec<Var>,
    defs: Vec<Formula>,
    closures: Vec<Term>,
}

struct Flattener {
    next: u32,
    /// Monotone closure of every cell left inside the matrix (bounded by B).
    closures: Vec<Term>,
    bound_var: Var,
    /// Cells hoisted into the unbounded prefix; their defining atoms become
    /// top-level conjuncts, which keeps them visible to equation solvers.
    lifted: Cells,
}

type BoundEnv = BTreeMap<Var, Term>;

impl Flattener {
    fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        v
    }

    /// Monotone closure: every bound variable replaced by the closure of its
    /// bound; free and prefix variables stay.
    fn close(&self, t: &Term, env: &BoundEnv) -> Term {
        match t {
            Term::Var(v) => env.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Num(_) | Term::Const(_) => t.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.close(a, env)).collect())
            }
        }
    }

    fn push_cell(&mut self, cells: &mut Cells, def_lhs: Term, closure: Term) -> Var {
        let v = self.fresh();
        cells.vars.push(v);
        cells.defs.push(Formula::eq(def_lhs, Term::Var(v)));
        cells.closures.push(closure);
        v
    }

    /// Reduces a term to a variable, pushing defining cells.
    fn reduce(&mut self, t: &Term, env: &BoundEnv, cells: &mut Cells) -> Result<Var, PurifyError> {
        match t {
            Term::Var(v) => Ok(*v),
            Term::Num(n) => Ok(self.numeral_cells(n, env, cells)),
            Term::Const(c) => Err(PurifyError::UnsupportedAtom(c.clone())),
            Term::App(f, args) => {
                let mut arg_vars = Vec::with_capacity(args.len());
                for a in args {
                    arg_vars.push(Term::Var(self.reduce(a, env, cells)?));
                }
                if !matches!(f.as_str(), SUCC | PLUS | TIMES) {
                    return Err(PurifyError::UnsupportedAtom(f.clone()));
                }
                let closure = self.close(t, env);
                Ok(self.push_cell(cells, Term::App(f.clone(), arg_vars), closure))
            }
        }
    }

    /// Cells computing the value of a numeral; unary successor chains for
    /// small values, doubling chains for large ones.
    fn numeral_cells(&mut self, n: &Nat, env: &BoundEnv, cells: &mut Cells) -> Var {
        let _ = env;
        let zero = self.push_cell(cells, Term::num(0u64), Term::num(0u64));
        if n.is_zero() {
            return zero;
        }
        match n.as_u64() {
            Some(k) if k <= UNARY_NUMERAL_MAX => {
                let mut prev = zero;
                for i in 1..=k {
                    prev = self.push_cell(
                        cells,
                        Term::App(SUCC.to_string(), vec![Term::Var(prev)]),
                        Term::num(i),
                    );
                }
                prev
            }
            _ => {
                // most-significant-bit-first doubling chain
                let big = n.to_big();
                let bits: Vec<bool> = (0..big.bits()).rev().map(|i| big.bit(i)).collect();
                let mut acc = self.push_cell(
                    cells,
                    Term::App(SUCC.to_string(), vec![Term::Var(zero)]),
                    Term::num(1u64),
                );
                let mut val = Nat::ONE;
                for bit in bits.into_iter().skip(1) {
                    val = val.add(&val);
                    acc = self.push_cell(
                        cells,
                        Term::App(PLUS.to_string(), vec![Term::Var(acc), Term::Var(acc)]),
                        Term::Num(val.clone()),
                    );
                    if bit {
                        val = val.succ();
                        acc = self.push_cell(
                            cells,
                            Term::App(SUCC.to_string(), vec![Term::Var(acc)]),
                            Term::Num(val.clone()),
                        );
                    }
                }
                acc
            }
        }
    }

    /// Packages the cells produced at one site: hoisted into the prefix when
    /// the site is in liftable position, otherwise kept as a local block of
    /// existentials bounded by B.
    fn package(&mut self, cells: Cells, core: Formula, liftable: bool) -> Formula {
        if cells.vars.is_empty() {
            return core;
        }
        if liftable {
            self.lifted.vars.extend(cells.vars);
            self.lifted.defs.extend(cells.defs);
            return core;
        }
        self.closures.extend(cells.closures);
        let mut body_parts = cells.defs;
        body_parts.push(core);
        let body = Formula::big_and(body_parts);
        cells
            .vars
            .into_iter()
            .rev()
            .fold(body, |acc, v| Formula::BExists(v, Term::Var(self.bound_var), Box::new(acc)))
    }

    /// Reduces an atom; introduced cells go through `package`.
    fn flatten_atom(
        &mut self,
        f: &Formula,
        negated: bool,
        env: &BoundEnv,
        liftable: bool,
    ) -> Result<Formula, PurifyError> {
        let mut cells = Cells::default();
        let core = match f {
            Formula::Eq(lhs, rhs) => {
                // root fusion: App(f, args) = var and S-chain = var keep the
                // last defining atom as the core
                match (lhs, rhs) {
                    (Term::App(g, args), Term::Var(_)) if matches!(g.as_str(), SUCC | PLUS | TIMES) => {
                        let mut arg_vars = Vec::with_capacity(args.len());
                        for a in args {
                            arg_vars.push(Term::Var(self.reduce(a, env, &mut cells)?));
                        }
                        Formula::eq(Term::App(g.clone(), arg_vars), rhs.clone())
                    }
                    (Term::Num(n), Term::Var(_)) if !n.is_zero() => {
                        let a = self.numeral_cells(&n.pred().unwrap(), env, &mut cells);
                        Formula::eq(Term::App(SUCC.to_string(), vec![Term::Var(a)]), rhs.clone())
                    }
                    _ => {
                        let a = self.reduce(lhs, env, &mut cells)?;
                        let b = self.reduce(rhs, env, &mut cells)?;
                        Formula::eq(Term::Var(a), Term::Var(b))
                    }
                }
            }
            Formula::Atom(r, args) if r == LEQ && args.len() == 2 => {
                let a = self.reduce(&args[0], env, &mut cells)?;
                let b = self.reduce(&args[1], env, &mut cells)?;
                Formula::leq(Term::Var(a), Term::Var(b))
            }
            Formula::Atom(r, args) if r == PRED_P && args.len() == 1 => {
                let a = self.reduce(&args[0], env, &mut cells)?;
                Formula::atom(PRED_P, vec![Term::Var(a)])
            }
            Formula::Atom(r, _) => return Err(PurifyError::UnsupportedAtom(r.clone())),
            _ => unreachable!("flatten_atom on a non-atom"),
        };
        let core = if negated { Formula::not(core) } else { core };
        Ok(self.package(cells, core, liftable))
    }

    /// Transforms an NNF Delta0 matrix. `liftable` is true while the current
    /// position sits under conjunctions/disjunctions only; bounded
    /// quantifiers switch it off, since their cells must stay bounded.
    fn tx(&mut self, f: &Formula, env: &mut BoundEnv, liftable: bool) -> Result<Formula, PurifyError> {
        use Formula::*;
        match f {
            Atom(..) | Eq(..) => {
                if is_pure_delta0(f) {
                    Ok(f.clone())
                } else {
                    self.flatten_atom(f, false, env, liftable)
                }
            }
            Not(g) => {
                debug_assert!(matches!(**g, Atom(..) | Eq(..)), "matrix not in NNF");
                if is_pure_delta0(f) {
                    Ok(f.clone())
                } else {
                    self.flatten_atom(g, true, env, liftable)
                }
            }
            And(a, b) => Ok(Formula::and(self.tx(a, env, liftable)?, self.tx(b, env, liftable)?)),
            Or(a, b) => Ok(Formula::or(self.tx(a, env, liftable)?, self.tx(b, env, liftable)?)),
            BForall(v, t, g) | BExists(v, t, g) => {
                let closure_t = self.close(t, env);
                let universal = matches!(f, BForall(..));
                if let Term::Var(u) = t {
                    env.insert(*v, env.get(u).cloned().unwrap_or_else(|| t.clone()));
                    let g2 = self.tx(g, env, false)?;
                    env.remove(v);
                    Ok(if universal {
                        Formula::BForall(*v, t.clone(), Box::new(g2))
                    } else {
                        Formula::BExists(*v, t.clone(), Box::new(g2))
                    })
                } else {
                    // compound bound: define it as a cell, then quantify below
                    // the cell variable
                    let mut cells = Cells::default();
                    let b = self.reduce(t, env, &mut cells)?;
                    env.insert(*v, closure_t);
                    let g2 = self.tx(g, env, false)?;
                    env.remove(v);
                    let inner = if universal {
                        Formula::BForall(*v, Term::Var(b), Box::new(g2))
                    } else {
                        Formula::BExists(*v, Term::Var(b), Box::new(g2))
                    };
                    Ok(self.package(cells, inner, liftable))
                }
            }
            Implies(..) | Iff(..) => unreachable!("matrix not in NNF"),
            Forall(..) | Exists(..) => unreachable!("matrix not Delta0"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nateval::{nat_truth, nat_evaluate, NatAssignment, Tri};
    use crate::parse::parse;

    #[test]
    fn pure_input_is_a_fixpoint() {
        let f = parse("x0 + x1 = x2").unwrap();
        assert_eq!(purify(&f).unwrap(), f);
        let g = parse("exists x exists y <= x y * y = x").unwrap();
        assert_eq!(purify(&g).unwrap(), g);
    }

    #[test]
    fn nested_successor_flattens() {
        // S(S 0) = x agrees with its purification over x <= 100
        let f = parse("S S 0 = x").unwrap();
        let p = purify(&f).unwrap();
        assert!(classify(&p).is_pure_sigma1());
        for x in 0..=100u64 {
            let a = NatAssignment::of(&[(Var(0), Nat::from(x))]);
            assert_eq!(
                nat_evaluate(&f, &a, 1000).unwrap().is_true(),
                nat_evaluate(&p, &a, 1000).unwrap().is_true(),
                "disagreement at {x}"
            );
        }
    }

    #[test]
    fn numeral_leq_flattens_to_variable_comparison() {
        let f = parse("2 <= y").unwrap();
        let p = purify(&f).unwrap();
        assert!(classify(&p).is_pure_sigma1());
        // no <= atom with a non-variable argument anywhere
        fn check(f: &Formula) {
            match f {
                Formula::Atom(r, args) if r == LEQ => {
                    assert!(args.iter().all(Term::is_var), "impure <= atom: {f}")
                }
                Formula::Not(g) => check(g),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    check(a);
                    check(b);
                }
                Formula::BForall(_, t, g) | Formula::BExists(_, t, g) => {
                    assert!(t.is_var());
                    check(g);
                }
                Formula::Exists(_, g) | Formula::Forall(_, g) => check(g),
                _ => {}
            }
        }
        check(&p);
        for y in 0..=10u64 {
            let a = NatAssignment::of(&[(Var(0), Nat::from(y))]);
            assert_eq!(
                nat_evaluate(&f, &a, 100).unwrap().is_true(),
                nat_evaluate(&p, &a, 100).unwrap().is_true()
            );
        }
    }

    #[test]
    fn negated_atoms_purify() {
        let f = parse("~(S x = 2) & ~(x + 1 = 4)").unwrap();
        let p = purify(&f).unwrap();
        assert!(classify(&p).is_pure_sigma1());
        for x in 0..=10u64 {
            let a = NatAssignment::of(&[(Var(0), Nat::from(x))]);
            assert_eq!(
                nat_evaluate(&f, &a, 100).unwrap().is_true(),
                nat_evaluate(&p, &a, 100).unwrap().is_true(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn bounded_quantifier_with_compound_bound() {
        let f = parse("forall y <= S S 0 y <= 2").unwrap();
        let p = purify(&f).unwrap();
        assert!(classify(&p).is_pure_sigma1());
        assert_eq!(nat_truth(&p, 100).unwrap(), Tri::True);
        let g = parse("exists y <= v0 + v0 (y = v0 + v0 & ~(y <= v0))").unwrap();
        let pg = purify(&g).unwrap();
        assert!(classify(&pg).is_pure_sigma1());
        for x in 0..=8u64 {
            let a = NatAssignment::of(&[(Var(0), Nat::from(x))]);
            assert_eq!(
                nat_evaluate(&g, &a, 100).unwrap().is_true(),
                nat_evaluate(&pg, &a, 100).unwrap().is_true(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn collapse_shape_and_truth() {
        let f = parse("exists x x * x = 4").unwrap();
        let c = collapse_to_one(&f).unwrap();
        assert_eq!(classify(&c), SyntacticClass::PureOneSigma1);
        assert_eq!(nat_truth(&c, 100).unwrap(), Tri::True);
        // false sentences stay false (unknown) at every cap
        let g = parse("exists x S x = 0").unwrap();
        let cg = collapse_to_one(&g).unwrap();
        assert_eq!(nat_truth(&cg, 100).unwrap(), Tri::Unknown);
        assert_eq!(nat_truth(&cg, 2000).unwrap(), Tri::Unknown);
        // closed Delta0 truth gets an existential wrapper that is true
        let h = parse("0 = 0").unwrap();
        let ch = collapse_to_one(&h).unwrap();
        assert_eq!(classify(&ch), SyntacticClass::PureOneSigma1);
        assert_eq!(nat_truth(&ch, 100).unwrap(), Tri::True);
    }

    #[test]
    fn collapse_requires_sentence() {
        let f = parse("x = x").unwrap();
        assert_eq!(collapse_to_one(&f), Err(PurifyError::NotSentence));
    }

    #[test]
    fn large_numerals_use_doubling() {
        let f = parse("exists x x = 1000000").unwrap();
        let p = purify(&f).unwrap();
        assert!(classify(&p).is_pure_sigma1());
        // far fewer cells than a unary chain
        let mut count = 0usize;
        fn walk(f: &Formula, count: &mut usize) {
            if let Formula::Exists(_, g) = f {
                *count += 1;
                walk(g, count);
            } else if let Formula::BExists(_, _, g) = f {
                *count += 1;
                walk(g, count);
            } else if let Formula::And(a, b) = f {
                walk(a, count);
                walk(b, count);
            }
        }
        walk(&p, &mut count);
        assert!(count < 200, "doubling chain expected, got {count} quantifiers");
        assert_eq!(nat_truth(&p, 10).unwrap(), Tri::Unknown); // witness 10^6 > cap 10
        // the solver binds forced cells, so a cap above the value finds it
        assert_eq!(nat_truth(&p, 2_000_000).unwrap(), Tri::True);
    }

    #[test]
    fn purify_rejects_non_sigma1() {
        let f = parse("forall x x = x").unwrap();
        assert!(matches!(purify(&f), Err(PurifyError::NotSigma1(_))));
    }
}
