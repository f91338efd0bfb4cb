//! First-order signatures and the identity axioms attached to them.

use crate::formula::Formula;
use crate::term::{Term, Var};
use std::fmt;

/// Names of the arithmetical symbols, fixed once for the whole crate.
pub const ZERO: &str = "0";
pub const SUCC: &str = "S";
pub const PLUS: &str = "+";
pub const TIMES: &str = "*";
pub const LEQ: &str = "<=";
pub const PRED_P: &str = "P";
pub const MEMBER: &str = "in";
/// Fresh constant used by the self-referential numbering.
pub const SELF_CONST: &str = "c";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub name: String,
    pub constants: Vec<String>,
    /// (name, arity) with arity >= 1.
    pub functions: Vec<(String, usize)>,
    /// (name, arity); arity 0 is allowed (propositional switches).
    pub relations: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(name: &str) -> Signature {
        Signature {
            name: name.to_string(),
            constants: Vec::new(),
            functions: Vec::new(),
            relations: Vec::new(),
        }
    }

    /// The arithmetical signature {0, S, +, *, <=}.
    pub fn l_a() -> Signature {
        Signature {
            name: "La".to_string(),
            constants: vec![ZERO.to_string()],
            functions: vec![
                (SUCC.to_string(), 1),
                (PLUS.to_string(), 2),
                (TIMES.to_string(), 2),
            ],
            relations: vec![(LEQ.to_string(), 2)],
        }
    }

    /// L_a extended with the unary predicate P.
    pub fn l_ap() -> Signature {
        let mut sig = Signature::l_a();
        sig.name = "Lap".to_string();
        sig.relations.push((PRED_P.to_string(), 1));
        sig
    }

    /// L_a extended with the fresh constant used for self-reference.
    pub fn l_a_self() -> Signature {
        let mut sig = Signature::l_a();
        sig.name = "LaC".to_string();
        sig.constants.push(SELF_CONST.to_string());
        sig
    }

    /// The set-theoretic signature with a single binary membership relation.
    pub fn sets() -> Signature {
        Signature {
            name: "Sets".to_string(),
            constants: Vec::new(),
            functions: Vec::new(),
            relations: vec![(MEMBER.to_string(), 2)],
        }
    }

    /// Identity only: no constants, functions, or relations.
    pub fn identity_only() -> Signature {
        Signature::new("Id")
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    /// All symbol names in declaration order.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = self.constants.clone();
        out.extend(self.functions.iter().map(|(n, _)| n.clone()));
        out.extend(self.relations.iter().map(|(n, _)| n.clone()));
        out
    }

    /// Renames every symbol with a suffix; used when combinators join two
    /// theories over possibly overlapping signatures.
    pub fn with_suffix(&self, suffix: &str) -> Signature {
        Signature {
            name: format!("{}{}", self.name, suffix),
            constants: self.constants.iter().map(|c| format!("{c}{suffix}")).collect(),
            functions: self
                .functions
                .iter()
                .map(|(n, a)| (format!("{n}{suffix}"), *a))
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|(n, a)| (format!("{n}{suffix}"), *a))
                .collect(),
        }
    }

    /// Disjoint union of two already-renamed signatures.
    pub fn union(&self, other: &Signature, name: &str) -> Signature {
        let mut sig = Signature::new(name);
        sig.constants = self.constants.clone();
        sig.constants.extend(other.constants.clone());
        sig.functions = self.functions.clone();
        sig.functions.extend(other.functions.clone());
        sig.relations = self.relations.clone();
        sig.relations.extend(other.relations.clone());
        sig
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// The identity axioms for a signature: reflexivity, symmetry, transitivity,
/// one congruence axiom per function symbol, and one congruence axiom per
/// argument position of each relation symbol.
pub fn id_axioms(sig: &Signature) -> Vec<Formula> {
    let x = Var(0);
    let y = Var(1);
    let z = Var(2);
    let mut out = Vec::new();
    // reflexivity, symmetry, transitivity
    out.push(Formula::forall(x, Formula::eq(Term::Var(x), Term::Var(x))));
    out.push(Formula::forall(
        x,
        Formula::forall(
            y,
            Formula::implies(
                Formula::eq(Term::Var(x), Term::Var(y)),
                Formula::eq(Term::Var(y), Term::Var(x)),
            ),
        ),
    ));
    out.push(Formula::forall(
        x,
        Formula::forall(
            y,
            Formula::forall(
                z,
                Formula::implies(
                    Formula::and(
                        Formula::eq(Term::Var(x), Term::Var(y)),
                        Formula::eq(Term::Var(y), Term::Var(z)),
                    ),
                    Formula::eq(Term::Var(x), Term::Var(z)),
                ),
            ),
        ),
    ));
    // one congruence axiom per function symbol
    for (fname, arity) in &sig.functions {
        let xs: Vec<Var> = (0..*arity as u32).map(Var).collect();
        let ys: Vec<Var> = (*arity as u32..2 * *arity as u32).map(Var).collect();
        let eqs = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| Formula::eq(Term::Var(*a), Term::Var(*b)))
            .collect::<Vec<_>>();
        let body = Formula::implies(
            Formula::big_and(eqs),
            Formula::eq(
                Term::app(fname, xs.iter().map(|v| Term::Var(*v)).collect()),
                Term::app(fname, ys.iter().map(|v| Term::Var(*v)).collect()),
            ),
        );
        let mut ax = body;
        for v in xs.iter().chain(&ys).rev() {
            ax = Formula::forall(*v, ax);
        }
        out.push(ax);
    }
    // one congruence axiom per relation argument position
    for (rname, arity) in &sig.relations {
        for pos in 0..*arity {
            let xs: Vec<Var> = (0..*arity as u32).map(Var).collect();
            let fresh = Var(*arity as u32);
            let mut ys = xs.clone();
            ys[pos] = fresh;
            let body = Formula::implies(
                Formula::eq(Term::Var(xs[pos]), Term::Var(fresh)),
                Formula::implies(
                    Formula::atom(rname, xs.iter().map(|v| Term::Var(*v)).collect()),
                    Formula::atom(rname, ys.iter().map(|v| Term::Var(*v)).collect()),
                ),
            );
            let mut ax = body;
            for v in xs.iter().chain(std::iter::once(&fresh)).rev() {
                ax = Formula::forall(*v, ax);
            }
            out.push(ax);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_axiom_counts() {
        // identity alone: reflexivity, symmetry, transitivity
        assert_eq!(id_axioms(&Signature::identity_only()).len(), 3);
        // L_a: 3 base + one per function (S, +, *) + two for <=
        assert_eq!(id_axioms(&Signature::l_a()).len(), 3 + 3 + 2);
        // L_ap adds a single congruence axiom for the unary P
        assert_eq!(id_axioms(&Signature::l_ap()).len(), id_axioms(&Signature::l_a()).len() + 1);
    }

    #[test]
    fn axioms_are_sentences() {
        for ax in id_axioms(&Signature::l_ap()) {
            assert!(ax.free_vars().is_empty(), "open identity axiom: {ax}");
        }
    }
}
