//! Text grammar for terms and formulas.
//!
//! ```text
//! formula  := iff
//! iff      := impl ('<->' iff)?
//! impl     := or ('->' impl)?
//! or       := and ('|' or)?
//! and      := unary ('&' and)?
//! unary    := '~' unary | quant | atom
//! quant    := ('forall'|'exists') ident ('<=' term)? formula
//! atom     := term (('='|'<=') term)? | ident '(' terms ')' | '(' formula ')'
//! term     := sum;  sum := prod ('+' sum)?;  prod := app ('*' prod)?
//! app      := 'S' app | prim
//! prim     := '0' | decimal | ident | ident '(' terms ')' | '(' term ')'
//! ```
//!
//! Quantifier scope extends as far right as possible. Identifiers of the form
//! `v<k>` name the variable with index `k`; other identifiers are assigned the
//! lowest free indices in order of first occurrence. Decimal literals denote
//! numerals (`3` is `S S S 0`); the renderer writes numerals up to 40 in
//! successor form and larger ones as decimals. Zero-ary relation atoms are
//! written `R()`.

use crate::formula::Formula;
use crate::nat::Nat;
use crate::signature::{Signature, LEQ, SUCC};
use crate::term::{Term, Var};
use num_bigint::BigUint;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigUint),
    LParen,
    RParen,
    Comma,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Eq,
    Leq,
    Plus,
    Star,
    Forall,
    Exists,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            '~' => {
                out.push((i, Tok::Tilde));
                i += 1;
            }
            '&' => {
                out.push((i, Tok::Amp));
                i += 1;
            }
            '|' => {
                out.push((i, Tok::Pipe));
                i += 1;
            }
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '=' => {
                out.push((i, Tok::Eq));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(ParseError { position: i, message: "expected '->'".into() });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    out.push((i, Tok::Leq));
                    i += 2;
                } else if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    out.push((i, Tok::DArrow));
                    i += 3;
                } else {
                    return Err(ParseError { position: i, message: "expected '<=' or '<->'".into() });
                }
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigUint = src[start..i].parse().map_err(|_| ParseError {
                    position: start,
                    message: "bad numeral".into(),
                })?;
                out.push((start, Tok::Number(n)));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let b = bytes[i] as char;
                    if b.is_ascii_alphanumeric() || b == '_' || b == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &src[start..i];
                let tok = match word {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: BTreeMap<String, Var>,
    next_free: u32,
    reserved: Vec<u32>,
    sig: Option<&'a Signature>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &str, sig: Option<&'a Signature>) -> Result<Parser<'a>, ParseError> {
        let toks = lex(src)?;
        // Reserve explicit v<k> names so other identifiers never collide.
        let mut reserved = Vec::new();
        for (_, t) in &toks {
            if let Tok::Ident(name) = t {
                if let Some(k) = explicit_index(name) {
                    reserved.push(k);
                }
            }
        }
        reserved.sort_unstable();
        reserved.dedup();
        Ok(Parser {
            toks,
            pos: 0,
            vars: BTreeMap::new(),
            next_free: 0,
            reserved,
            sig,
            src_len: src.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError { position: self.here(), message: message.to_string() }
    }

    /// True when the current identifier token is immediately followed by
    /// `(` with no space, which is how applications are written; `x (...)`
    /// with a space is a variable followed by a group.
    fn applies_next(&self, name: &str) -> bool {
        match (self.toks.get(self.pos), self.toks.get(self.pos + 1)) {
            (Some((p0, Tok::Ident(_))), Some((p1, Tok::LParen))) => *p1 == p0 + name.len(),
            _ => false,
        }
    }

    fn var_for(&mut self, name: &str) -> Var {
        if let Some(v) = self.vars.get(name) {
            return *v;
        }
        let v = if let Some(k) = explicit_index(name) {
            Var(k)
        } else {
            while self.reserved.binary_search(&self.next_free).is_ok() {
                self.next_free += 1;
            }
            let v = Var(self.next_free);
            self.next_free += 1;
            v
        };
        self.vars.insert(name.to_string(), v);
        v
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.impl_level()?;
        if self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn impl_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.impl_level()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.and_level()?;
        if self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.or_level()?;
            Ok(Formula::or(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.and_level()?;
            Ok(Formula::and(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => {
                let univ = self.peek() == Some(&Tok::Forall);
                self.pos += 1;
                let name = match self.bump() {
                    Some(Tok::Ident(n)) => n,
                    _ => return Err(self.err("expected variable after quantifier")),
                };
                let v = self.var_for(&name);
                let bound = if self.peek() == Some(&Tok::Leq) {
                    self.pos += 1;
                    Some(self.term()?)
                } else {
                    None
                };
                let body = self.formula()?;
                Ok(match (univ, bound) {
                    (true, None) => Formula::forall(v, body),
                    (false, None) => Formula::exists(v, body),
                    (true, Some(t)) => Formula::bforall(v, t, body),
                    (false, Some(t)) => Formula::bexists(v, t, body),
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        // A parenthesized group may be a formula or a term; try formula first.
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(f) = self.formula() {
                if self.peek() == Some(&Tok::RParen) {
                    self.pos += 1;
                    // `(t1) = t2` style: a parenthesized term parses as a
                    // formula only when followed by nothing relational.
                    if !matches!(self.peek(), Some(Tok::Eq) | Some(Tok::Leq)) {
                        return Ok(f);
                    }
                }
            }
            self.pos = save;
        }
        // Possible relation atom `R(...)` with no trailing comparator.
        if let Some(Tok::Ident(name)) = self.peek().cloned() {
            if self.applies_next(&name) && name != SUCC {
                let save = self.pos;
                self.pos += 2;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        args.push(self.term()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "')'")?;
                if matches!(self.peek(), Some(Tok::Eq) | Some(Tok::Leq) | Some(Tok::Plus) | Some(Tok::Star)) {
                    // it was a function application term after all
                    self.pos = save;
                } else {
                    if let Some(sig) = self.sig {
                        match sig.relation_arity(&name) {
                            Some(a) if a == args.len() => {}
                            Some(a) => {
                                return Err(ParseError {
                                    position: self.here(),
                                    message: format!(
                                        "arity mismatch: relation {name} expects {a} arguments, got {}",
                                        args.len()
                                    ),
                                })
                            }
                            None => {
                                return Err(ParseError {
                                    position: self.here(),
                                    message: format!("unknown relation symbol {name}"),
                                })
                            }
                        }
                    }
                    return Ok(Formula::Atom(name, args));
                }
            }
        }
        let start = self.here();
        let lhs = self.term()?;
        match self.peek() {
            Some(Tok::Eq) => {
                self.pos += 1;
                let rhs = self.term()?;
                Ok(Formula::eq(lhs, rhs))
            }
            Some(Tok::Leq) => {
                self.pos += 1;
                let rhs = self.term()?;
                Ok(Formula::leq(lhs, rhs))
            }
            _ => Err(ParseError {
                position: start,
                message: "term is not a formula (expected '=' or '<=')".into(),
            }),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let lhs = self.prod()?;
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.term()?;
            Ok(Term::plus(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn prod(&mut self) -> Result<Term, ParseError> {
        let lhs = self.app_level()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.prod()?;
            Ok(Term::times(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn app_level(&mut self) -> Result<Term, ParseError> {
        if let Some(Tok::Ident(name)) = self.peek() {
            if name == SUCC {
                self.pos += 1;
                // Accept both `S t` and `S(t)`.
                let arg = if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let t = self.term()?;
                    self.expect(Tok::RParen, "')'")?;
                    t
                } else {
                    self.app_level()?
                };
                return Ok(Term::succ_of(arg));
            }
        }
        self.prim()
    }

    fn prim(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Some(Tok::Number(n)) => Ok(Term::Num(Nat::from_big(n))),
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::Ident(name)) => {
                self.pos -= 1;
                let applies = self.applies_next(&name);
                self.pos += 1;
                if applies {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.term()?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if let Some(sig) = self.sig {
                        match sig.function_arity(&name) {
                            Some(a) if a == args.len() => {}
                            Some(a) => {
                                return Err(ParseError {
                                    position: self.here(),
                                    message: format!(
                                        "arity mismatch: function {name} expects {a} arguments, got {}",
                                        args.len()
                                    ),
                                })
                            }
                            None => {
                                return Err(ParseError {
                                    position: self.here(),
                                    message: format!("unknown function symbol {name}"),
                                })
                            }
                        }
                    }
                    Ok(Term::app(&name, args))
                } else if self.sig.map(|s| s.has_constant(&name)).unwrap_or(false) {
                    Ok(Term::constant(&name))
                } else if self.sig.is_some()
                    && self.sig.unwrap().function_arity(&name).is_some()
                {
                    Err(ParseError {
                        position: self.here(),
                        message: format!("function symbol {name} needs arguments"),
                    })
                } else {
                    Ok(Term::Var(self.var_for(&name)))
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

fn explicit_index(name: &str) -> Option<u32> {
    let rest = name.strip_prefix('v')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parses a formula without checking symbols against a signature.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    parse_impl(src, None)
}

/// Parses a formula, rejecting unknown symbols and arity mismatches.
pub fn parse_with(src: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_impl(src, Some(sig))
}

fn parse_impl(src: &str, sig: Option<&Signature>) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, sig)?;
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

/// Parses a term alone (used by the CLI).
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, None)?;
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

/// Numerals up to this value render in successor form, larger ones as decimals.
const NUMERAL_RENDER_MAX: u64 = 40;

pub fn render_term(t: &Term) -> String {
    let mut s = String::new();
    rt(t, 0, &mut s);
    s
}

fn rt(t: &Term, min: u8, out: &mut String) {
    // precedence: + is 1, * is 2, S is 3, atoms 4
    match t {
        Term::Var(v) => out.push_str(&v.to_string()),
        Term::Num(n) => match n.as_u64() {
            Some(k) if k <= NUMERAL_RENDER_MAX => {
                if k > 0 && min > 3 {
                    out.push('(');
                    for _ in 0..k {
                        out.push_str("S ");
                    }
                    out.push('0');
                    out.push(')');
                } else {
                    for _ in 0..k {
                        out.push_str("S ");
                    }
                    out.push('0');
                }
            }
            _ => out.push_str(&n.to_string()),
        },
        Term::Const(c) => out.push_str(c),
        Term::App(f, args) => match (f.as_str(), args.len()) {
            (crate::signature::SUCC, 1) => {
                if min > 3 {
                    out.push('(');
                    out.push_str("S ");
                    rt(&args[0], 3, out);
                    out.push(')');
                } else {
                    out.push_str("S ");
                    rt(&args[0], 3, out);
                }
            }
            (crate::signature::PLUS, 2) => {
                if min > 1 {
                    out.push('(');
                }
                rt(&args[0], 2, out);
                out.push_str(" + ");
                rt(&args[1], 1, out);
                if min > 1 {
                    out.push(')');
                }
            }
            (crate::signature::TIMES, 2) => {
                if min > 2 {
                    out.push('(');
                }
                rt(&args[0], 3, out);
                out.push_str(" * ");
                rt(&args[1], 2, out);
                if min > 2 {
                    out.push(')');
                }
            }
            _ => {
                out.push_str(f);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    rt(a, 0, out);
                }
                out.push(')');
            }
        },
    }
}

pub fn render(f: &Formula) -> String {
    let mut s = String::new();
    rf(f, 0, &mut s);
    s
}

fn rf(f: &Formula, min: u8, out: &mut String) {
    // precedence: <-> 1, -> 2, | 3, & 4, ~ 6, atoms 7; quantifiers wrap
    // themselves whenever they sit under a connective (min > 0).
    use Formula::*;
    match f {
        Atom(r, args) if r == LEQ && args.len() == 2 => {
            rt(&args[0], 0, out);
            out.push_str(" <= ");
            rt(&args[1], 0, out);
        }
        Atom(r, args) => {
            out.push_str(r);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                rt(a, 0, out);
            }
            out.push(')');
        }
        Eq(a, b) => {
            rt(a, 0, out);
            out.push_str(" = ");
            rt(b, 0, out);
        }
        Not(g) => {
            out.push('~');
            rf_wrapped(g, 6, out);
        }
        And(a, b) => bin(a, " & ", b, 4, 5, 4, min, out),
        Or(a, b) => bin(a, " | ", b, 3, 4, 3, min, out),
        Implies(a, b) => bin(a, " -> ", b, 2, 3, 2, min, out),
        Iff(a, b) => bin(a, " <-> ", b, 1, 2, 1, min, out),
        Forall(v, g) | Exists(v, g) => {
            let wrap = min > 0;
            if wrap {
                out.push('(');
            }
            out.push_str(if matches!(f, Forall(..)) { "forall " } else { "exists " });
            out.push_str(&v.to_string());
            out.push(' ');
            rf(g, 0, out);
            if wrap {
                out.push(')');
            }
        }
        BForall(v, t, g) | BExists(v, t, g) => {
            let wrap = min > 0;
            if wrap {
                out.push('(');
            }
            out.push_str(if matches!(f, BForall(..)) { "forall " } else { "exists " });
            out.push_str(&v.to_string());
            out.push_str(" <= ");
            rt(t, 0, out);
            out.push(' ');
            rf(g, 0, out);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn bin(a: &Formula, op: &str, b: &Formula, prec: u8, lmin: u8, rmin: u8, min: u8, out: &mut String) {
    let wrap = min > prec;
    if wrap {
        out.push('(');
    }
    rf_wrapped(a, lmin, out);
    out.push_str(op);
    rf_wrapped(b, rmin, out);
    if wrap {
        out.push(')');
    }
}

fn rf_wrapped(f: &Formula, min: u8, out: &mut String) {
    use Formula::*;
    let p = match f {
        Atom(..) | Eq(..) => 7,
        Not(..) => 6,
        And(..) => 4,
        Or(..) => 3,
        Implies(..) => 2,
        Iff(..) => 1,
        Forall(..) | Exists(..) | BForall(..) | BExists(..) => 0,
    };
    if p < min {
        out.push('(');
        rf(f, 0, out);
        out.push(')');
    } else {
        rf(f, min, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_case() {
        assert_eq!(parse("0 = 0").unwrap(), Formula::eq(Term::num(0u64), Term::num(0u64)));
    }

    #[test]
    fn hand_built_ast_matches_grammar() {
        // "exists x (x <= v & S x = v)": an exists node over a conjunction
        let f = parse("exists x (x <= v & S x = v)").unwrap();
        // x gets index 0 (first occurrence), v gets 1
        let expected = Formula::exists(
            Var(0),
            Formula::and(
                Formula::leq(Term::var(0), Term::var(1)),
                Formula::eq(Term::succ_of(Term::var(0)), Term::var(1)),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn term_is_not_a_formula() {
        assert!(parse("x + y").is_err());
    }

    #[test]
    fn explicit_indices_reserved() {
        // v3 must map to index 3; x avoids it
        let f = parse("v3 = x").unwrap();
        assert_eq!(f, Formula::eq(Term::var(3), Term::var(0)));
        let g = parse("x = v0").unwrap();
        assert_eq!(g, Formula::eq(Term::var(1), Term::var(0)));
    }

    #[test]
    fn numerals() {
        assert_eq!(parse("S S S 0 = 3").unwrap(), Formula::eq(Term::num(3u64), Term::num(3u64)));
        let f = parse("1000000 = x").unwrap();
        assert_eq!(f, Formula::eq(Term::num(1_000_000u64), Term::var(0)));
    }

    #[test]
    fn quantifier_scope_maximal() {
        let f = parse("exists x x = 0 & x <= 0").unwrap();
        let expected = Formula::exists(
            Var(0),
            Formula::and(
                Formula::eq(Term::var(0), Term::num(0u64)),
                Formula::leq(Term::var(0), Term::num(0u64)),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn signature_checking() {
        let sig = Signature::l_ap();
        assert!(parse_with("P(x)", &sig).is_ok());
        assert!(parse_with("Q(x)", &sig).is_err());
        assert!(parse_with("P(x, y)", &sig).is_err());
    }

    #[test]
    fn roundtrip_examples() {
        for src in [
            "0 = 0",
            "exists x (x <= v1 & S x = v1)",
            "forall x (x <= 2 -> (x = 0 | x = 1 | x = 2))",
            "forall x <= S S 0 exists y <= x y + y = x",
            "~(0 = S 0) -> P(0)",
            "x * (y + z) = x * y + x * z",
            "(exists x x = 0) & (forall y y = y)",
            "P() | ~P()",
            "in(x, y) <-> in(y, x)",
        ] {
            let f = parse(src).unwrap();
            let rendered = render(&f);
            let g = parse(&rendered).unwrap_or_else(|e| panic!("reparse of {rendered:?}: {e}"));
            assert_eq!(f, g, "round trip through {rendered:?}");
        }
    }
}
