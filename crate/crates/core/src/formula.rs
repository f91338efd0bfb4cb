//! First-order formulas with first-class bounded quantifiers.
//!
//! Bounded quantifiers carry their own constructors so the Delta0 classifier
//! stays structural; `desugar` defines their meaning. There are no primitive
//! truth constants; `0 = 0` is the canonical truth.

use crate::signature::LEQ;
use crate::term::{Term, Var};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// Relation atom; equality has its own constructor.
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    /// forall x <= t body; the bound never mentions the bound variable.
    BForall(Var, Term, Box<Formula>),
    /// exists x <= t body.
    BExists(Var, Term, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(name: &str, args: Vec<Term>) -> Formula {
        Atom(name.to_string(), args)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Eq(a, b))
    }

    pub fn leq(a: Term, b: Term) -> Formula {
        Atom(LEQ.to_string(), vec![a, b])
    }

    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Exists(v, Box::new(body))
    }

    /// `forall v <= bound body`; renames `v` if the bound mentions it.
    pub fn bforall(v: Var, bound: Term, body: Formula) -> Formula {
        if bound.contains_var(v) {
            let fresh = fresh_var_avoiding(&[&bound.vars(), &body.vars()]);
            let body = body.substitute(v, &Term::Var(fresh));
            BForall(fresh, bound, Box::new(body))
        } else {
            BForall(v, bound, Box::new(body))
        }
    }

    /// `exists v <= bound body`.
    pub fn bexists(v: Var, bound: Term, body: Formula) -> Formula {
        if bound.contains_var(v) {
            let fresh = fresh_var_avoiding(&[&bound.vars(), &body.vars()]);
            let body = body.substitute(v, &Term::Var(fresh));
            BExists(fresh, bound, Box::new(body))
        } else {
            BExists(v, bound, Box::new(body))
        }
    }

    /// `forall v < bound body`, with `x < y` spelled out as `x <= y /\ x /= y`:
    /// `forall v <= bound (v /= bound -> body)`.
    pub fn bforall_lt(v: Var, bound: Term, body: Formula) -> Formula {
        Formula::bforall(
            v,
            bound.clone(),
            Formula::implies(Formula::neq(Term::Var(v), bound), body),
        )
    }

    /// `exists v < bound body` as `exists v <= bound (v /= bound /\ body)`.
    pub fn bexists_lt(v: Var, bound: Term, body: Formula) -> Formula {
        Formula::bexists(
            v,
            bound.clone(),
            Formula::and(Formula::neq(Term::Var(v), bound), body),
        )
    }

    /// `a < b` as a formula: `a <= b /\ a /= b`.
    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::and(Formula::leq(a.clone(), b.clone()), Formula::neq(a, b))
    }

    /// Right-nested conjunction of a nonempty list.
    pub fn big_and(mut parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty(), "big_and of empty list has no truth constant");
        let last = parts.pop().unwrap();
        parts.into_iter().rev().fold(last, |acc, f| Formula::and(f, acc))
    }

    /// Right-nested disjunction of a nonempty list.
    pub fn big_or(mut parts: Vec<Formula>) -> Formula {
        assert!(!parts.is_empty(), "big_or of empty list has no falsity constant");
        let last = parts.pop().unwrap();
        parts.into_iter().rev().fold(last, |acc, f| Formula::or(f, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<Var>, out: &mut BTreeSet<Var>) {
        match self {
            Atom(_, ts) => {
                for t in ts {
                    for v in t.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Eq(a, b) => {
                for t in [a, b] {
                    for v in t.vars() {
                        if !bound.contains(&v) {
                            out.insert(v);
                        }
                    }
                }
            }
            Not(f) => f.collect_free(bound, out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Forall(v, f) | Exists(v, f) => {
                let fresh = !bound.contains(v);
                if fresh {
                    bound.insert(*v);
                }
                f.collect_free(bound, out);
                if fresh {
                    bound.remove(v);
                }
            }
            BForall(v, t, f) | BExists(v, t, f) => {
                for w in t.vars() {
                    if !bound.contains(&w) {
                        out.insert(w);
                    }
                }
                let fresh = !bound.contains(v);
                if fresh {
                    bound.insert(*v);
                }
                f.collect_free(bound, out);
                if fresh {
                    bound.remove(v);
                }
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Atom(_, ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Not(f) => f.collect_all_vars(out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_all_vars(out);
                b.collect_all_vars(out);
            }
            Forall(v, f) | Exists(v, f) => {
                out.insert(*v);
                f.collect_all_vars(out);
            }
            BForall(v, t, f) | BExists(v, t, f) => {
                out.insert(*v);
                t.collect_vars(out);
                f.collect_all_vars(out);
            }
        }
    }

    fn vars(&self) -> BTreeSet<Var> {
        self.all_vars()
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `t` for free occurrences of `v`.
    pub fn substitute(&self, v: Var, t: &Term) -> Formula {
        match self {
            Atom(r, ts) => Atom(r.clone(), ts.iter().map(|s| s.substitute(v, t)).collect()),
            Eq(a, b) => Eq(a.substitute(v, t), b.substitute(v, t)),
            Not(f) => Formula::not(f.substitute(v, t)),
            And(a, b) => Formula::and(a.substitute(v, t), b.substitute(v, t)),
            Or(a, b) => Formula::or(a.substitute(v, t), b.substitute(v, t)),
            Implies(a, b) => Formula::implies(a.substitute(v, t), b.substitute(v, t)),
            Iff(a, b) => Formula::iff(a.substitute(v, t), b.substitute(v, t)),
            Forall(w, f) => {
                if *w == v {
                    return self.clone();
                }
                let (w2, f2) = rebind_if_needed(*w, f, v, t);
                Forall(w2, Box::new(f2.substitute(v, t)))
            }
            Exists(w, f) => {
                if *w == v {
                    return self.clone();
                }
                let (w2, f2) = rebind_if_needed(*w, f, v, t);
                Exists(w2, Box::new(f2.substitute(v, t)))
            }
            BForall(w, bnd, f) => {
                if *w == v {
                    return BForall(*w, bnd.substitute(v, t), f.clone());
                }
                let bnd2 = bnd.substitute(v, t);
                let (w2, f2) = rebind_if_needed(*w, f, v, t);
                BForall(w2, bnd2, Box::new(f2.substitute(v, t)))
            }
            BExists(w, bnd, f) => {
                if *w == v {
                    return BExists(*w, bnd.substitute(v, t), f.clone());
                }
                let bnd2 = bnd.substitute(v, t);
                let (w2, f2) = rebind_if_needed(*w, f, v, t);
                BExists(w2, bnd2, Box::new(f2.substitute(v, t)))
            }
        }
    }

    /// Simultaneous substitution of terms for variables (used by translations).
    pub fn substitute_many(&self, subs: &[(Var, Term)]) -> Formula {
        // Applied one at a time through fresh intermediaries to keep it
        // simultaneous: first move each source var to a fresh alias, then
        // substitute targets.
        let mut taken: BTreeSet<Var> = self.vars();
        for (_, t) in subs {
            taken.extend(t.vars());
        }
        for (v, _) in subs {
            taken.insert(*v);
        }
        let mut next = taken.iter().next_back().map(|v| v.0 + 1).unwrap_or(0);
        let mut tmp = self.clone();
        let mut aliases = Vec::new();
        for (v, t) in subs {
            let alias = Var(next);
            next += 1;
            aliases.push((alias, t.clone()));
            tmp = tmp.substitute(*v, &Term::Var(alias));
        }
        for (alias, t) in aliases {
            tmp = tmp.substitute(alias, &t);
        }
        tmp
    }

    /// Renames relation/function/constant symbols throughout.
    pub fn rename_symbols(&self, map: &dyn Fn(&str) -> String) -> Formula {
        match self {
            Atom(r, ts) => Atom(
                map(r),
                ts.iter().map(|t| t.rename_symbols(map)).collect(),
            ),
            Eq(a, b) => Eq(a.rename_symbols(map), b.rename_symbols(map)),
            Not(f) => Formula::not(f.rename_symbols(map)),
            And(a, b) => Formula::and(a.rename_symbols(map), b.rename_symbols(map)),
            Or(a, b) => Formula::or(a.rename_symbols(map), b.rename_symbols(map)),
            Implies(a, b) => Formula::implies(a.rename_symbols(map), b.rename_symbols(map)),
            Iff(a, b) => Formula::iff(a.rename_symbols(map), b.rename_symbols(map)),
            Forall(v, f) => Forall(*v, Box::new(f.rename_symbols(map))),
            Exists(v, f) => Exists(*v, Box::new(f.rename_symbols(map))),
            BForall(v, t, f) => {
                BForall(*v, t.rename_symbols(map), Box::new(f.rename_symbols(map)))
            }
            BExists(v, t, f) => {
                BExists(*v, t.rename_symbols(map), Box::new(f.rename_symbols(map)))
            }
        }
    }

    /// Rewrites bounded quantifiers to their unbounded definitions:
    /// `forall x <= t f` becomes `forall x (x <= t -> f)` and
    /// `exists x <= t f` becomes `exists x (x <= t /\ f)`.
    pub fn desugar(&self) -> Formula {
        match self {
            Atom(..) | Eq(..) => self.clone(),
            Not(f) => Formula::not(f.desugar()),
            And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Implies(a, b) => Formula::implies(a.desugar(), b.desugar()),
            Iff(a, b) => Formula::iff(a.desugar(), b.desugar()),
            Forall(v, f) => Forall(*v, Box::new(f.desugar())),
            Exists(v, f) => Exists(*v, Box::new(f.desugar())),
            BForall(v, t, f) => Formula::forall(
                *v,
                Formula::implies(Formula::leq(Term::Var(*v), t.clone()), f.desugar()),
            ),
            BExists(v, t, f) => Formula::exists(
                *v,
                Formula::and(Formula::leq(Term::Var(*v), t.clone()), f.desugar()),
            ),
        }
    }

    /// Alpha-equality via parallel traversal with binder environments.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn term_eq(a: &Term, b: &Term, ea: &[(Var, u32)], eb: &[(Var, u32)]) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let la = ea.iter().rev().find(|(v, _)| v == x).map(|(_, l)| *l);
                    let lb = eb.iter().rev().find(|(v, _)| v == y).map(|(_, l)| *l);
                    match (la, lb) {
                        (Some(l1), Some(l2)) => l1 == l2,
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Term::Num(m), Term::Num(n)) => m == n,
                (Term::Const(c), Term::Const(d)) => c == d,
                (Term::App(f, xs), Term::App(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, ea, eb))
                }
                _ => false,
            }
        }
        fn go(
            a: &Formula,
            b: &Formula,
            ea: &mut Vec<(Var, u32)>,
            eb: &mut Vec<(Var, u32)>,
            depth: u32,
        ) -> bool {
            match (a, b) {
                (Atom(r, xs), Atom(s, ys)) => {
                    r == s
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, ea, eb))
                }
                (Eq(x1, x2), Eq(y1, y2)) => term_eq(x1, y1, ea, eb) && term_eq(x2, y2, ea, eb),
                (Not(f), Not(g)) => go(f, g, ea, eb, depth),
                (And(f1, f2), And(g1, g2))
                | (Or(f1, f2), Or(g1, g2))
                | (Implies(f1, f2), Implies(g1, g2))
                | (Iff(f1, f2), Iff(g1, g2)) => {
                    go(f1, g1, ea, eb, depth) && go(f2, g2, ea, eb, depth)
                }
                (Forall(x, f), Forall(y, g)) | (Exists(x, f), Exists(y, g)) => {
                    ea.push((*x, depth));
                    eb.push((*y, depth));
                    let r = go(f, g, ea, eb, depth + 1);
                    ea.pop();
                    eb.pop();
                    r
                }
                (BForall(x, t, f), BForall(y, u, g))
                | (BExists(x, t, f), BExists(y, u, g)) => {
                    if !term_eq(t, u, ea, eb) {
                        return false;
                    }
                    ea.push((*x, depth));
                    eb.push((*y, depth));
                    let r = go(f, g, ea, eb, depth + 1);
                    ea.pop();
                    eb.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new(), 0)
    }

    /// Strips the maximal prefix of unbounded existentials.
    pub fn strip_exists_prefix(&self) -> (Vec<Var>, &Formula) {
        let mut vars = Vec::new();
        let mut cur = self;
        while let Exists(v, body) = cur {
            vars.push(*v);
            cur = body;
        }
        (vars, cur)
    }

    /// Wraps in unbounded existentials, innermost var last in the list.
    pub fn exists_block(vars: &[Var], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(*v, acc))
    }

    /// Flattens a right- or left-nested conjunction into its leaves.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let And(a, b) = f {
                stack.push(b);
                stack.push(a);
            } else {
                out.push(f);
            }
        }
        out
    }

    /// First variable index not occurring (bound or free) in any listed formula.
    pub fn fresh_var(frms: &[&Formula]) -> Var {
        let mut max: Option<u32> = None;
        for f in frms {
            if let Some(v) = f.all_vars().iter().next_back() {
                max = Some(max.map_or(v.0, |m: u32| m.max(v.0)));
            }
        }
        Var(max.map_or(0, |m| m + 1))
    }
}

fn rebind_if_needed(w: Var, body: &Formula, v: Var, t: &Term) -> (Var, Formula) {
    if t.contains_var(w) && body.free_vars().contains(&v) {
        // capture: rename the binder
        let mut avoid = body.all_vars();
        avoid.extend(t.vars());
        avoid.insert(v);
        let fresh = Var(avoid.iter().next_back().map(|x| x.0 + 1).unwrap_or(0));
        (fresh, body.substitute(w, &Term::Var(fresh)))
    } else {
        (w, body.clone())
    }
}

fn fresh_var_avoiding(sets: &[&BTreeSet<Var>]) -> Var {
    let mut max: Option<u32> = None;
    for s in sets {
        if let Some(v) = s.iter().next_back() {
            max = Some(max.map_or(v.0, |m: u32| m.max(v.0)));
        }
    }
    Var(max.map_or(0, |m| m + 1))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_basics() {
        // 0 = 0 is closed
        assert!(Formula::eq(Term::num(0u64), Term::num(0u64)).is_closed());
        // exists y (y <= x) has exactly {x}
        let f = Formula::exists(Var(1), Formula::leq(Term::var(1), Term::var(0)));
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec![Var(0)]);
    }

    #[test]
    fn substitute_trivial_and_vacuous() {
        let f = Formula::eq(Term::var(0), Term::var(0));
        let g = f.substitute(Var(0), &Term::num(2u64));
        assert_eq!(g, Formula::eq(Term::num(2u64), Term::num(2u64)));
        // vacuous substitution is identity
        let h = Formula::exists(Var(1), Formula::eq(Term::var(1), Term::var(0)));
        assert_eq!(h.substitute(Var(5), &Term::num(1u64)), h);
    }

    #[test]
    fn substitute_avoids_capture() {
        // substitute(exists y (y = x), x, y) must rename the binder
        let f = Formula::exists(Var(1), Formula::eq(Term::var(1), Term::var(0)));
        let g = f.substitute(Var(0), &Term::var(1));
        let free: Vec<Var> = g.free_vars().into_iter().collect();
        assert_eq!(free, vec![Var(1)]);
        let expected = Formula::exists(Var(2), Formula::eq(Term::var(2), Term::var(1)));
        assert!(g.alpha_eq(&expected));
    }

    #[test]
    fn substitute_idempotent_on_bound() {
        // binder shadows: substituting for the bound variable does nothing
        let f = Formula::exists(Var(0), Formula::eq(Term::var(0), Term::var(0)));
        let g = f.substitute(Var(0), &Term::num(3u64));
        assert!(g.alpha_eq(&f));
    }

    #[test]
    fn alpha_equality() {
        let a = Formula::exists(Var(0), Formula::eq(Term::var(0), Term::num(1u64)));
        let b = Formula::exists(Var(7), Formula::eq(Term::var(7), Term::num(1u64)));
        assert!(a.alpha_eq(&b));
        let c = Formula::exists(Var(0), Formula::eq(Term::num(1u64), Term::var(0)));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn bounded_quantifier_bound_capture() {
        // exists x <= x body gets the binder renamed
        let f = Formula::bexists(Var(0), Term::var(0), Formula::eq(Term::var(0), Term::num(0u64)));
        if let BExists(v, bound, _) = &f {
            assert_ne!(Some(*v), bound.as_var());
        } else {
            panic!("expected bounded exists");
        }
    }

    #[test]
    fn desugar_shape() {
        let f = Formula::bexists(Var(0), Term::var(1), Formula::eq(Term::var(0), Term::var(1)));
        let d = f.desugar();
        let expected = Formula::exists(
            Var(0),
            Formula::and(
                Formula::leq(Term::var(0), Term::var(1)),
                Formula::eq(Term::var(0), Term::var(1)),
            ),
        );
        assert_eq!(d, expected);
    }
}
