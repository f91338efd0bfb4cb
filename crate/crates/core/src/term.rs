//! Terms over a first-order signature.
//!
//! Numerals are kept in the canonical compact form `Term::Num(n)`, which
//! stands for `n` applications of `S` to `0`. The smart constructors fold
//! `S`-applications and the constant `0` into this form, so structural
//! equality coincides with equality of the fully written-out terms while
//! codes of Goedel-numbered sentences remain storable as numerals.

use crate::nat::Nat;
use crate::signature::{SUCC, ZERO};
use std::collections::BTreeSet;
use std::fmt;

/// A variable from the fixed sequence v0, v1, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// The numeral S...S0 with `n` successors, stored compactly.
    Num(Nat),
    /// A constant other than `0` (user signatures, the self-reference constant).
    Const(String),
    /// Function application; never `S` applied to a numeral and never the
    /// constant `0` (both fold into `Num`).
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(i: u32) -> Term {
        Term::Var(Var(i))
    }

    /// The numeral for `n`.
    pub fn num<N: Into<Nat>>(n: N) -> Term {
        Term::Num(n.into())
    }

    /// Constant by name; `0` normalizes to `Num(0)`.
    pub fn constant(name: &str) -> Term {
        if name == ZERO {
            Term::Num(Nat::ZERO)
        } else {
            Term::Const(name.to_string())
        }
    }

    /// Function application with numeral folding: `S` applied to a numeral
    /// yields the next numeral.
    pub fn app(f: &str, args: Vec<Term>) -> Term {
        if f == SUCC && args.len() == 1 {
            if let Term::Num(n) = &args[0] {
                return Term::Num(n.succ());
            }
        }
        Term::App(f.to_string(), args)
    }

    pub fn succ_of(t: Term) -> Term {
        Term::app(SUCC, vec![t])
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::app(crate::signature::PLUS, vec![a, b])
    }

    pub fn times(a: Term, b: Term) -> Term {
        Term::app(crate::signature::TIMES, vec![a, b])
    }

    /// Depth of the term tree, counting each implicit successor of a numeral.
    /// `depth(numeral(k)) = k`.
    pub fn depth(&self) -> u64 {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Num(n) => n.as_u64().unwrap_or(u64::MAX),
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Num(_) | Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::Num(_) | Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    /// Replaces free occurrences of `v` (terms have no binders).
    pub fn substitute(&self, v: Var, t: &Term) -> Term {
        match self {
            Term::Var(w) if *w == v => t.clone(),
            Term::Var(_) | Term::Num(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::app(f, args.iter().map(|a| a.substitute(v, t)).collect())
            }
        }
    }

    /// Simultaneous variable renaming.
    pub fn rename_vars(&self, map: &dyn Fn(Var) -> Var) -> Term {
        match self {
            Term::Var(w) => Term::Var(map(*w)),
            Term::Num(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.rename_vars(map)).collect())
            }
        }
    }

    pub fn rename_symbols(&self, map: &dyn Fn(&str) -> String) -> Term {
        match self {
            Term::Var(_) | Term::Num(_) => self.clone(),
            Term::Const(c) => Term::constant(&map(c)),
            Term::App(f, args) => Term::app(
                &map(f),
                args.iter().map(|a| a.rename_symbols(map)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeral_folding() {
        let three = Term::succ_of(Term::succ_of(Term::succ_of(Term::num(0u64))));
        assert_eq!(three, Term::num(3u64));
        assert_eq!(three.depth(), 3);
        assert_eq!(Term::num(100u64).depth(), 100);
        assert_eq!(Term::num(0u64).depth(), 0);
    }

    #[test]
    fn successor_of_variable_stays_structural() {
        let t = Term::succ_of(Term::var(0));
        assert!(matches!(t, Term::App(_, _)));
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn substitution() {
        let t = Term::plus(Term::var(0), Term::succ_of(Term::var(1)));
        let s = t.substitute(Var(1), &Term::num(2u64));
        assert_eq!(s, Term::plus(Term::var(0), Term::num(3u64)));
        assert_eq!(t.substitute(Var(7), &Term::num(1u64)), t);
    }
}
