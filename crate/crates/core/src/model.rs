//! Finite first-order structures and Tarskian evaluation.

use crate::formula::Formula;
use crate::signature::{Signature, LEQ, PLUS, SUCC, TIMES, ZERO};
use crate::term::{Term, Var};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unassigned free variable v{0}")]
    UnassignedVariable(u32),
    #[error("symbol {0} not interpreted in this structure")]
    UnknownSymbol(String),
    #[error("arity mismatch for {0}")]
    ArityMismatch(String),
}

/// Variable assignment into a finite domain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    map: BTreeMap<Var, usize>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn of(pairs: &[(Var, usize)]) -> Assignment {
        Assignment { map: pairs.iter().cloned().collect() }
    }

    pub fn get(&self, v: Var) -> Option<usize> {
        self.map.get(&v).copied()
    }

    pub fn set(&mut self, v: Var, val: usize) -> Option<usize> {
        self.map.insert(v, val)
    }

    pub fn unset(&mut self, v: Var) {
        self.map.remove(&v);
    }
}

/// A finite structure: domain {0, ..., size-1} with total tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub signature: Signature,
    pub size: usize,
    /// constant name -> element
    pub constants: BTreeMap<String, usize>,
    /// function name -> (arity, row-major table of length size^arity)
    pub functions: BTreeMap<String, (usize, Vec<usize>)>,
    /// relation name -> (arity, row-major bit table of length size^arity)
    pub relations: BTreeMap<String, (usize, Vec<bool>)>,
}

impl Structure {
    pub fn new(signature: Signature, size: usize) -> Structure {
        assert!(size >= 1, "empty domains are not first-order structures");
        let mut s = Structure {
            signature,
            size,
            constants: BTreeMap::new(),
            functions: BTreeMap::new(),
            relations: BTreeMap::new(),
        };
        for c in s.signature.constants.clone() {
            s.constants.insert(c, 0);
        }
        for (f, a) in s.signature.functions.clone() {
            s.functions.insert(f, (a, vec![0; size.pow(a as u32)]));
        }
        for (r, a) in s.signature.relations.clone() {
            s.relations.insert(r, (a, vec![false; size.pow(a as u32)]));
        }
        s
    }

    fn index(&self, args: &[usize]) -> usize {
        let mut idx = 0;
        for a in args {
            idx = idx * self.size + a;
        }
        idx
    }

    pub fn set_constant(&mut self, name: &str, val: usize) {
        *self.constants.get_mut(name).expect("constant in signature") = val;
    }

    pub fn set_function(&mut self, name: &str, args: &[usize], val: usize) {
        let idx = self.index(args);
        self.functions.get_mut(name).expect("function in signature").1[idx] = val;
    }

    pub fn set_relation(&mut self, name: &str, args: &[usize], val: bool) {
        let idx = self.index(args);
        self.relations.get_mut(name).expect("relation in signature").1[idx] = val;
    }

    pub fn function_at(&self, name: &str, args: &[usize]) -> Option<usize> {
        let (arity, table) = self.functions.get(name)?;
        if *arity != args.len() {
            return None;
        }
        Some(table[self.index(args)])
    }

    pub fn relation_at(&self, name: &str, args: &[usize]) -> Option<bool> {
        let (arity, table) = self.relations.get(name)?;
        if *arity != args.len() {
            return None;
        }
        Some(table[self.index(args)])
    }

    pub fn eval_term(&self, t: &Term, a: &Assignment) -> Result<usize, EvalError> {
        match t {
            Term::Var(v) => a.get(*v).ok_or(EvalError::UnassignedVariable(v.0)),
            Term::Num(n) => {
                // S...S0 evaluated by iterating the structure's successor.
                let zero = *self
                    .constants
                    .get(ZERO)
                    .ok_or_else(|| EvalError::UnknownSymbol(ZERO.to_string()))?;
                let mut val = zero;
                let mut remaining = n.clone();
                // In a finite structure the successor orbit enters a cycle
                // within `size` steps; exploit that to evaluate huge numerals.
                let mut seen = vec![usize::MAX; self.size];
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
                            val = self
                                .function_at(SUCC, &[val])
                                .ok_or_else(|| EvalError::UnknownSymbol(SUCC.to_string()))?;
                        }
                        return Ok(val);
                    }
                    seen[val] = steps;
                    val = self
                        .function_at(SUCC, &[val])
                        .ok_or_else(|| EvalError::UnknownSymbol(SUCC.to_string()))?;
                    remaining = remaining.pred().unwrap();
                    steps += 1;
                }
                Ok(val)
            }
            Term::Const(c) => self
                .constants
                .get(c)
                .copied()
                .ok_or_else(|| EvalError::UnknownSymbol(c.clone())),
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for arg in args {
                    vals.push(self.eval_term(arg, a)?);
                }
                self.function_at(f, &vals)
                    .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))
            }
        }
    }

    /// Tarskian satisfaction; bounded quantifiers follow their desugaring.
    pub fn eval(&self, f: &Formula, a: &Assignment) -> Result<bool, EvalError> {
        let mut a = a.clone();
        self.eval_inner(f, &mut a)
    }

    fn eval_inner(&self, f: &Formula, a: &mut Assignment) -> Result<bool, EvalError> {
        use Formula::*;
        match f {
            Atom(r, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for arg in args {
                    vals.push(self.eval_term(arg, a)?);
                }
                self.relation_at(r, &vals)
                    .ok_or_else(|| EvalError::UnknownSymbol(r.clone()))
            }
            Eq(x, y) => Ok(self.eval_term(x, a)? == self.eval_term(y, a)?),
            Not(g) => Ok(!self.eval_inner(g, a)?),
            And(x, y) => Ok(self.eval_inner(x, a)? && self.eval_inner(y, a)?),
            Or(x, y) => Ok(self.eval_inner(x, a)? || self.eval_inner(y, a)?),
            Implies(x, y) => Ok(!self.eval_inner(x, a)? || self.eval_inner(y, a)?),
            Iff(x, y) => Ok(self.eval_inner(x, a)? == self.eval_inner(y, a)?),
            Forall(v, g) => {
                let saved = a.get(*v);
                for d in 0..self.size {
                    a.set(*v, d);
                    if !self.eval_inner(g, a)? {
                        restore(a, *v, saved);
                        return Ok(false);
                    }
                }
                restore(a, *v, saved);
                Ok(true)
            }
            Exists(v, g) => {
                let saved = a.get(*v);
                for d in 0..self.size {
                    a.set(*v, d);
                    if self.eval_inner(g, a)? {
                        restore(a, *v, saved);
                        return Ok(true);
                    }
                }
                restore(a, *v, saved);
                Ok(false)
            }
            // Exactly the desugared semantics: the bound is evaluated under
            // the extended assignment.
            BForall(v, t, g) => {
                let saved = a.get(*v);
                for d in 0..self.size {
                    a.set(*v, d);
                    let bound = self.eval_term(t, a)?;
                    let in_range = self
                        .relation_at(LEQ, &[d, bound])
                        .ok_or_else(|| EvalError::UnknownSymbol(LEQ.to_string()))?;
                    if in_range && !self.eval_inner(g, a)? {
                        restore(a, *v, saved);
                        return Ok(false);
                    }
                }
                restore(a, *v, saved);
                Ok(true)
            }
            BExists(v, t, g) => {
                let saved = a.get(*v);
                for d in 0..self.size {
                    a.set(*v, d);
                    let bound = self.eval_term(t, a)?;
                    let in_range = self
                        .relation_at(LEQ, &[d, bound])
                        .ok_or_else(|| EvalError::UnknownSymbol(LEQ.to_string()))?;
                    if in_range && self.eval_inner(g, a)? {
                        restore(a, *v, saved);
                        return Ok(true);
                    }
                }
                restore(a, *v, saved);
                Ok(false)
            }
        }
    }

    /// Satisfaction of a sentence.
    pub fn satisfies(&self, f: &Formula) -> Result<bool, EvalError> {
        self.eval(f, &Assignment::new())
    }

    pub fn satisfies_all<'f>(
        &self,
        fs: impl IntoIterator<Item = &'f Formula>,
    ) -> Result<bool, EvalError> {
        for f in fs {
            if !self.satisfies(f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Element denoted by the numeral for `m`.
    pub fn numeral_value(&self, m: u64) -> Result<usize, EvalError> {
        self.eval_term(&Term::num(m), &Assignment::new())
    }
}

fn restore(a: &mut Assignment, v: Var, saved: Option<usize>) {
    match saved {
        Some(x) => {
            a.set(v, x);
        }
        None => a.unset(v),
    }
}

/// The clipped initial segment {0, ..., K} with arithmetic truncated at K.
pub fn clipped_model(k: usize) -> Structure {
    assert!(k >= 1);
    let size = k + 1;
    let mut m = Structure::new(Signature::l_a(), size);
    m.set_constant(ZERO, 0);
    for x in 0..size {
        m.set_function(SUCC, &[x], (x + 1).min(k));
        for y in 0..size {
            m.set_function(PLUS, &[x, y], (x + y).min(k));
            m.set_function(TIMES, &[x, y], (x * y).min(k));
            m.set_relation(LEQ, &[x, y], x <= y);
        }
    }
    m
}

/// Same domain as `clipped_model` but with arithmetic modulo K+1; satisfies
/// much less of R0 and exists for negative testing.
pub fn wraparound_model(k: usize) -> Structure {
    assert!(k >= 1);
    let size = k + 1;
    let mut m = Structure::new(Signature::l_a(), size);
    m.set_constant(ZERO, 0);
    for x in 0..size {
        m.set_function(SUCC, &[x], (x + 1) % size);
        for y in 0..size {
            m.set_function(PLUS, &[x, y], (x + y) % size);
            m.set_function(TIMES, &[x, y], (x * y) % size);
            m.set_relation(LEQ, &[x, y], x <= y);
        }
    }
    m
}

/// Clipped model over L_ap with P interpreted by `p`.
pub fn clipped_model_p(k: usize, p: &dyn Fn(usize) -> bool) -> Structure {
    let base = clipped_model(k);
    let mut m = Structure::new(Signature::l_ap(), k + 1);
    m.constants = base.constants;
    m.functions = base.functions;
    for (name, entry) in base.relations {
        m.relations.insert(name, entry);
    }
    for x in 0..=k {
        m.set_relation(crate::signature::PRED_P, &[x], p(x));
    }
    m
}

/// Text interchange format:
///
/// ```text
/// structure <signature-name> size <N>
/// const <name> = <element>
/// fun <name>/<arity> = e0 e1 ... (row-major)
/// rel <name>/<arity> = 0 1 0 ... (row-major bits)
/// ```
impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure {} size {}", self.signature.name, self.size)?;
        for (name, val) in &self.constants {
            writeln!(f, "const {name} = {val}")?;
        }
        for (name, (arity, table)) in &self.functions {
            let cells: Vec<String> = table.iter().map(|x| x.to_string()).collect();
            writeln!(f, "fun {name}/{arity} = {}", cells.join(" "))?;
        }
        for (name, (arity, table)) in &self.relations {
            let cells: Vec<String> =
                table.iter().map(|b| if *b { "1" } else { "0" }.to_string()).collect();
            writeln!(f, "rel {name}/{arity} = {}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StructureParseError {
    #[error("structure format error on line {0}: {1}")]
    Line(usize, String),
}

/// Parses the interchange format produced by `Display`.
pub fn parse_structure(src: &str) -> Result<Structure, StructureParseError> {
    let mut lines = src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines
        .next()
        .ok_or_else(|| StructureParseError::Line(0, "empty input".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "structure" || parts[2] != "size" {
        return Err(StructureParseError::Line(
            ln + 1,
            "expected 'structure <name> size <N>'".into(),
        ));
    }
    let name = parts[1];
    let size: usize = parts[3]
        .parse()
        .map_err(|_| StructureParseError::Line(ln + 1, "bad size".into()))?;
    let mut sig = match name {
        "La" => Signature::l_a(),
        "Lap" => Signature::l_ap(),
        "Sets" => Signature::sets(),
        "Id" => Signature::identity_only(),
        other => Signature::new(other),
    };
    let body: Vec<(usize, &str)> = lines.collect();
    // collect declared symbols for ad-hoc signatures
    if !matches!(name, "La" | "Lap" | "Sets" | "Id") {
        for (ln, line) in &body {
            let head = line.split(" = ").next().unwrap_or("");
            let parts: Vec<&str> = head.split_whitespace().collect();
            match parts.as_slice() {
                ["const", cname] => sig.constants.push(cname.to_string()),
                [kind @ ("fun" | "rel"), spec] => {
                    let (sym, ar) = spec.split_once('/').ok_or_else(|| {
                        StructureParseError::Line(ln + 1, "missing arity".into())
                    })?;
                    let ar: usize = ar
                        .parse()
                        .map_err(|_| StructureParseError::Line(ln + 1, "bad arity".into()))?;
                    if *kind == "fun" {
                        sig.functions.push((sym.to_string(), ar));
                    } else {
                        sig.relations.push((sym.to_string(), ar));
                    }
                }
                _ => {}
            }
        }
    }
    let mut st = Structure::new(sig, size);
    for (ln, line) in body {
        let mk_err = |msg: &str| StructureParseError::Line(ln + 1, msg.to_string());
        let (head, rest) = line.split_once(" = ").ok_or_else(|| mk_err("expected ' = '"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let cells: Vec<&str> = rest.split_whitespace().collect();
        match head.as_slice() {
            ["const", cname] => {
                let v: usize = cells
                    .first()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| mk_err("bad constant value"))?;
                if v >= size {
                    return Err(mk_err("constant value out of range"));
                }
                st.set_constant(cname, v);
            }
            ["fun", spec] => {
                let (fname, _) = spec.split_once('/').ok_or_else(|| mk_err("missing arity"))?;
                let size = st.size;
                let (arity, table) =
                    st.functions.get_mut(fname).ok_or_else(|| mk_err("unknown function"))?;
                if cells.len() != size.pow(*arity as u32) {
                    return Err(mk_err("wrong table length"));
                }
                for (i, c) in cells.iter().enumerate() {
                    let v: usize = c.parse().map_err(|_| mk_err("bad table cell"))?;
                    if v >= size {
                        return Err(mk_err("table cell out of range"));
                    }
                    table[i] = v;
                }
            }
            ["rel", spec] => {
                let (rname, _) = spec.split_once('/').ok_or_else(|| mk_err("missing arity"))?;
                let size = st.size;
                let (arity, table) =
                    st.relations.get_mut(rname).ok_or_else(|| mk_err("unknown relation"))?;
                if cells.len() != size.pow(*arity as u32) {
                    return Err(mk_err("wrong table length"));
                }
                for (i, c) in cells.iter().enumerate() {
                    table[i] = match *c {
                        "0" => false,
                        "1" => true,
                        _ => return Err(mk_err("bits must be 0 or 1")),
                    };
                }
            }
            _ => return Err(mk_err("unrecognized line")),
        }
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn clipped_arithmetic_below_the_cap_is_honest() {
        let m = clipped_model(5);
        assert!(m.satisfies(&parse("S S 0 + S S 0 = S S S S 0").unwrap()).unwrap());
        let m10 = clipped_model(10);
        assert!(m10.satisfies(&parse("~(S S 0 = S S S 0)").unwrap()).unwrap());
    }

    #[test]
    fn clipping_identifies_values_at_the_cap() {
        // 3+3 clips to 5 and the numeral 6 also clips to 5, so equality holds
        let m = clipped_model(5);
        assert!(m.satisfies(&parse("3 + 3 = 6").unwrap()).unwrap());
        // wraparound: 3+3 = 0 and 6 = 0 as well, but 5 stays 5
        let w = wraparound_model(5);
        assert!(w.satisfies(&parse("3 + 3 = 6").unwrap()).unwrap());
        assert!(!w.satisfies(&parse("3 + 3 = 5").unwrap()).unwrap());
    }

    #[test]
    fn numeral_collision_refutes_r3_instance() {
        let m = clipped_model(3);
        assert!(!m.satisfies(&parse("~(7 = 8)").unwrap()).unwrap());
    }

    #[test]
    fn reflexivity_everywhere() {
        for k in 1..6 {
            let m = clipped_model(k);
            assert!(m.satisfies(&parse("forall x x = x").unwrap()).unwrap());
        }
    }

    #[test]
    fn unassigned_variable_reported() {
        let m = clipped_model(3);
        let f = parse("x = x").unwrap();
        assert!(matches!(m.eval(&f, &Assignment::new()), Err(EvalError::UnassignedVariable(0))));
    }

    #[test]
    fn desugaring_invariance() {
        let m = clipped_model(6);
        for src in [
            "forall x <= 3 exists y <= x y + y <= x",
            "exists x <= 4 x * x = x + x",
            "forall x forall y <= x (exists z <= y z = y)",
        ] {
            let f = parse(src).unwrap();
            assert_eq!(m.satisfies(&f).unwrap(), m.satisfies(&f.desugar()).unwrap(), "{src}");
        }
    }

    #[test]
    fn huge_numeral_evaluates_via_cycle_detection() {
        let m = clipped_model(4);
        // numeral 10^15 clips to 4
        let t = Term::num(1_000_000_000_000_000u64);
        assert_eq!(m.eval_term(&t, &Assignment::new()).unwrap(), 4);
        let w = wraparound_model(4);
        // successor cycles through all 5 elements: 10^15 mod 5 = 0
        assert_eq!(w.eval_term(&t, &Assignment::new()).unwrap(), 0);
    }

    #[test]
    fn interchange_roundtrip() {
        let m = clipped_model(3);
        let text = m.to_string();
        let back = parse_structure(&text).unwrap();
        assert_eq!(m, back);
    }
}
