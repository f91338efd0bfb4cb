//! Syntactic classification: Delta0, pure Delta0, (pure/pure-1) Sigma1.

use crate::formula::Formula;
use crate::signature::{LEQ, PRED_P};
use crate::term::Term;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SyntacticClass {
    PureDelta0,
    Delta0,
    PureOneSigma1,
    PureSigma1,
    Sigma1,
    Other,
}

impl fmt::Display for SyntacticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SyntacticClass::PureDelta0 => "pure-Delta0",
            SyntacticClass::Delta0 => "Delta0",
            SyntacticClass::PureOneSigma1 => "pure-1-Sigma1",
            SyntacticClass::PureSigma1 => "pure-Sigma1",
            SyntacticClass::Sigma1 => "Sigma1",
            SyntacticClass::Other => "other",
        };
        write!(f, "{s}")
    }
}

impl SyntacticClass {
    /// Membership in the wider classes implied by a classification.
    pub fn is_delta0(self) -> bool {
        matches!(self, SyntacticClass::PureDelta0 | SyntacticClass::Delta0)
    }

    pub fn is_sigma1(self) -> bool {
        self != SyntacticClass::Other
    }

    pub fn is_pure_sigma1(self) -> bool {
        matches!(
            self,
            SyntacticClass::PureDelta0 | SyntacticClass::PureOneSigma1 | SyntacticClass::PureSigma1
        )
    }
}

/// No unbounded quantifiers anywhere.
pub fn is_delta0(f: &Formula) -> bool {
    use Formula::*;
    match f {
        Atom(..) | Eq(..) => true,
        Not(g) => is_delta0(g),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => is_delta0(a) && is_delta0(b),
        Forall(..) | Exists(..) => false,
        BForall(_, _, g) | BExists(_, _, g) => is_delta0(g),
    }
}

/// An atom in one of the five pure equality shapes or `x <= y` on variables,
/// or `P(x)` with a variable argument.
fn is_pure_atom(f: &Formula) -> bool {
    use Formula::*;
    match f {
        Eq(a, b) => match (a, b) {
            // x0 = x1 and 0 = x0
            (Term::Var(_), Term::Var(_)) => true,
            (Term::Num(n), Term::Var(_)) => n.is_zero(),
            // S x0 = x1, x0 + x1 = x2, x0 * x1 = x2
            (Term::App(_, args), Term::Var(_)) => args.iter().all(Term::is_var),
            _ => false,
        },
        Atom(r, args) if r == LEQ => args.iter().all(Term::is_var),
        Atom(r, args) if r == PRED_P => args.len() == 1 && args[0].is_var(),
        _ => false,
    }
}

/// Pure Delta0: Delta0 whose atoms are pure and whose bounded-quantifier
/// bounds are variables.
pub fn is_pure_delta0(f: &Formula) -> bool {
    use Formula::*;
    match f {
        Atom(..) | Eq(..) => is_pure_atom(f),
        Not(g) => is_pure_delta0(g),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            is_pure_delta0(a) && is_pure_delta0(b)
        }
        Forall(..) | Exists(..) => false,
        BForall(_, t, g) | BExists(_, t, g) => t.is_var() && is_pure_delta0(g),
    }
}

/// Most specific class along the chains
/// PureDelta0 < Delta0 and PureOneSigma1 < PureSigma1 < Sigma1.
pub fn classify(f: &Formula) -> SyntacticClass {
    if is_delta0(f) {
        return if is_pure_delta0(f) {
            SyntacticClass::PureDelta0
        } else {
            SyntacticClass::Delta0
        };
    }
    let (prefix, matrix) = f.strip_exists_prefix();
    if prefix.is_empty() || !is_delta0(matrix) {
        return SyntacticClass::Other;
    }
    if is_pure_delta0(matrix) {
        if prefix.len() == 1 {
            SyntacticClass::PureOneSigma1
        } else {
            SyntacticClass::PureSigma1
        }
    } else {
        SyntacticClass::Sigma1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn listed_atomic_form_is_pure() {
        assert_eq!(classify(&parse("x0 + x1 = x2").unwrap()), SyntacticClass::PureDelta0);
    }

    #[test]
    fn nested_term_is_impure() {
        assert_eq!(classify(&parse("S S 0 = x").unwrap()), SyntacticClass::Delta0);
    }

    #[test]
    fn single_leading_exists_over_pure_matrix() {
        let f = parse("exists x exists y <= x y * y = x").unwrap();
        assert_eq!(classify(&f), SyntacticClass::PureOneSigma1);
    }

    #[test]
    fn two_leading_exists_is_pure_sigma1() {
        let f = parse("exists x exists y x + y = z").unwrap();
        assert_eq!(classify(&f), SyntacticClass::PureSigma1);
    }

    #[test]
    fn impure_matrix_is_plain_sigma1() {
        let f = parse("exists x S S x = x").unwrap();
        assert_eq!(classify(&f), SyntacticClass::Sigma1);
    }

    #[test]
    fn universal_is_other() {
        assert_eq!(classify(&parse("forall x x = x").unwrap()), SyntacticClass::Other);
    }

    #[test]
    fn pure_delta0_has_free_variable() {
        // every pure Delta0 formula in this corpus has a free variable
        for src in ["x0 = x1", "0 = x0", "S x0 = x1", "x0 <= x1", "exists y <= x y = y"] {
            let f = parse(src).unwrap();
            assert_eq!(classify(&f), SyntacticClass::PureDelta0);
            assert!(!f.free_vars().is_empty());
        }
    }

    #[test]
    fn numeral_bound_is_impure() {
        let f = parse("forall y <= 2 y <= x").unwrap();
        assert_eq!(classify(&f), SyntacticClass::Delta0);
    }
}
