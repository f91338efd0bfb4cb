//! A toolkit for very weak arithmetic.
//!
//! The crate implements, over the signature {0, S, +, *, <=}:
//!
//! - syntax trees, a text grammar, substitution, and a syntactic classifier
//!   for bounded and purely-shaped formulas;
//! - finite first-order structures with Tarskian evaluation, clipped
//!   initial-segment models, bounded evaluation over the standard model, and
//!   exhaustive small-structure search;
//! - purification of Sigma1 formulas and the single-witness collapse;
//! - certificate formulas and certified sentences, witness comparison;
//! - axiom generators for the theories R, R0, R0p, VS and parametric
//!   variants, translations between signatures, and theory combinators;
//! - a Goedel numbering (ordinary and self-referential) with single and
//!   double fixed points;
//! - a natural-deduction proof kernel and schema-driven proof generators,
//!   including an automated prover for true Sigma1 sentences over R0.

pub mod acceptance;
pub mod cert;
pub mod classify;
pub mod corpus;
pub mod fixpoint;
pub mod formula;
pub mod model;
pub mod nat;
pub mod nateval;
pub mod numbering;
pub mod parse;
pub mod proof;
pub mod prover;
pub mod purify;
pub mod search;
pub mod sexpr;
pub mod signature;
pub mod term;
pub mod theory;
pub mod translate;

pub use classify::{classify, SyntacticClass};
pub use formula::Formula;
pub use nat::Nat;
pub use signature::{id_axioms, Signature};
pub use term::{Term, Var};
