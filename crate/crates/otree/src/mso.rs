//! Finite relational structures, an MSO evaluator, and the encoding of
//! structured forests into such structures.
//!
//! Formulas are written as s-expressions with built-ins `and`, `or`, `not`,
//! `implies`, `iff`, first-order quantifiers `ex` / `all`, set quantifiers
//! `exset` / `allset`, membership `in`, equality `eq`, set inclusion `sub`,
//! finiteness `fin` (always true here), and relation atoms `(R x y ...)`.
//!
//! [`eval_mso`] memoizes subformula results keyed by the values of the
//! subformula's free variables; [`eval_mso_naive`] is the plain recursive
//! evaluator used to cross-check it.
//!
//! [`encode_structuring`] maps a structured forest to a structure over
//! `leq` plus two unary predicates `N0` / `N1` marking line depth parity;
//! [`decode_structuring`] inverts it by revalidation, and the sentences
//! [`structuring_sentence`], [`line_formula`], [`covers_formula`] say in
//! MSO that an arbitrary structure is such an encoding, that a free set
//! variable is one of its lines, and that one line covers another.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oforest::OForest;
use crate::position::Dir;
use crate::structuring::SOAForest;
use crate::term::FiniteTerm;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MSOError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{rel}` has arity {expected}, got {got} arguments")]
    Arity { rel: String, expected: usize, got: usize },
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("variable `{0}` has the wrong kind here")]
    KindMismatch(String),
    #[error("structure too large for set quantification ({0} elements)")]
    TooLarge(usize),
    #[error("bad structure: {0}")]
    BadStructure(String),
}

// ---------------------------------------------------------------------------
// Structures.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

/// A finite relational structure: named elements and named relations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelStructure {
    names: Vec<String>,
    rels: BTreeMap<String, Relation>,
}

impl RelStructure {
    pub fn new(names: Vec<String>) -> RelStructure {
        RelStructure { names, rels: BTreeMap::new() }
    }

    pub fn add_rel(
        &mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<(), MSOError> {
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(MSOError::Arity { rel: name.into(), expected: arity, got: t.len() });
            }
            if let Some(&i) = t.iter().find(|&&i| i >= self.names.len()) {
                return Err(MSOError::BadStructure(format!(
                    "tuple element {i} out of range in `{name}`"
                )));
            }
            set.insert(t);
        }
        self.rels.insert(name.into(), Relation { arity, tuples: set });
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rels(&self) -> &BTreeMap<String, Relation> {
        &self.rels
    }

    pub fn rel(&self, name: &str) -> Option<&Relation> {
        self.rels.get(name)
    }

    pub fn holds(&self, name: &str, args: &[usize]) -> Result<bool, MSOError> {
        let r = self
            .rels
            .get(name)
            .ok_or_else(|| MSOError::UnknownRelation(name.to_string()))?;
        if r.arity != args.len() {
            return Err(MSOError::Arity {
                rel: name.into(),
                expected: r.arity,
                got: args.len(),
            });
        }
        Ok(r.tuples.contains(args))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure serializes")
    }

    pub fn from_json(text: &str) -> Result<RelStructure, MSOError> {
        let s: RelStructure =
            serde_json::from_str(text).map_err(|e| MSOError::Parse(e.to_string()))?;
        for (name, r) in &s.rels {
            for t in &r.tuples {
                if t.len() != r.arity || t.iter().any(|&i| i >= s.names.len()) {
                    return Err(MSOError::BadStructure(format!("bad tuple in `{name}`")));
                }
            }
        }
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Formulas.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MSOFormula {
    True,
    False,
    And(Vec<MSOFormula>),
    Or(Vec<MSOFormula>),
    Not(Box<MSOFormula>),
    Implies(Box<MSOFormula>, Box<MSOFormula>),
    Iff(Box<MSOFormula>, Box<MSOFormula>),
    Ex(String, Box<MSOFormula>),
    All(String, Box<MSOFormula>),
    ExSet(String, Box<MSOFormula>),
    AllSet(String, Box<MSOFormula>),
    In(String, String),
    Eq(String, String),
    Sub(String, String),
    Fin(String),
    Atom(String, Vec<String>),
}

impl fmt::Display for MSOFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MSOFormula::True => write!(f, "true"),
            MSOFormula::False => write!(f, "false"),
            MSOFormula::And(fs) => {
                write!(f, "(and")?;
                for x in fs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            MSOFormula::Or(fs) => {
                write!(f, "(or")?;
                for x in fs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            MSOFormula::Not(x) => write!(f, "(not {x})"),
            MSOFormula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            MSOFormula::Iff(a, b) => write!(f, "(iff {a} {b})"),
            MSOFormula::Ex(v, x) => write!(f, "(ex {v} {x})"),
            MSOFormula::All(v, x) => write!(f, "(all {v} {x})"),
            MSOFormula::ExSet(v, x) => write!(f, "(exset {v} {x})"),
            MSOFormula::AllSet(v, x) => write!(f, "(allset {v} {x})"),
            MSOFormula::In(x, s) => write!(f, "(in {x} {s})"),
            MSOFormula::Eq(x, y) => write!(f, "(eq {x} {y})"),
            MSOFormula::Sub(x, y) => write!(f, "(sub {x} {y})"),
            MSOFormula::Fin(x) => write!(f, "(fin {x})"),
            MSOFormula::Atom(r, args) => {
                write!(f, "({r}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_sexpr(toks: &[String], pos: &mut usize) -> Result<Sexpr, MSOError> {
    match toks.get(*pos) {
        None => Err(MSOError::Parse("unexpected end of input".into())),
        Some(t) if t == "(" => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => return Err(MSOError::Parse("unclosed `(`".into())),
                    Some(t) if t == ")" => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    _ => items.push(parse_sexpr(toks, pos)?),
                }
            }
        }
        Some(t) if t == ")" => Err(MSOError::Parse("unexpected `)`".into())),
        Some(t) => {
            *pos += 1;
            Ok(Sexpr::Atom(t.clone()))
        }
    }
}

fn atom_name(s: &Sexpr) -> Result<String, MSOError> {
    match s {
        Sexpr::Atom(a) => Ok(a.clone()),
        Sexpr::List(_) => Err(MSOError::Parse("expected a name".into())),
    }
}

fn to_formula(s: &Sexpr) -> Result<MSOFormula, MSOError> {
    match s {
        Sexpr::Atom(a) if a == "true" => Ok(MSOFormula::True),
        Sexpr::Atom(a) if a == "false" => Ok(MSOFormula::False),
        Sexpr::Atom(a) => Err(MSOError::Parse(format!("bare atom `{a}`"))),
        Sexpr::List(items) => {
            let head = items
                .first()
                .ok_or_else(|| MSOError::Parse("empty list".into()))
                .and_then(atom_name)?;
            let rest = &items[1..];
            let unary = |rest: &[Sexpr]| -> Result<Box<MSOFormula>, MSOError> {
                if rest.len() != 1 {
                    return Err(MSOError::Parse(format!("`{head}` takes one formula")));
                }
                Ok(Box::new(to_formula(&rest[0])?))
            };
            let binary = |rest: &[Sexpr]| -> Result<(Box<MSOFormula>, Box<MSOFormula>), MSOError> {
                if rest.len() != 2 {
                    return Err(MSOError::Parse(format!("`{head}` takes two formulas")));
                }
                Ok((Box::new(to_formula(&rest[0])?), Box::new(to_formula(&rest[1])?)))
            };
            let quant = |rest: &[Sexpr]| -> Result<(String, Box<MSOFormula>), MSOError> {
                if rest.len() != 2 {
                    return Err(MSOError::Parse(format!("`{head}` takes a variable and a formula")));
                }
                Ok((atom_name(&rest[0])?, Box::new(to_formula(&rest[1])?)))
            };
            let names = |rest: &[Sexpr]| -> Result<Vec<String>, MSOError> {
                rest.iter().map(atom_name).collect()
            };
            match head.as_str() {
                "and" => Ok(MSOFormula::And(
                    rest.iter().map(to_formula).collect::<Result<_, _>>()?,
                )),
                "or" => Ok(MSOFormula::Or(
                    rest.iter().map(to_formula).collect::<Result<_, _>>()?,
                )),
                "not" => Ok(MSOFormula::Not(unary(rest)?)),
                "implies" => {
                    let (a, b) = binary(rest)?;
                    Ok(MSOFormula::Implies(a, b))
                }
                "iff" => {
                    let (a, b) = binary(rest)?;
                    Ok(MSOFormula::Iff(a, b))
                }
                "ex" => {
                    let (v, f) = quant(rest)?;
                    Ok(MSOFormula::Ex(v, f))
                }
                "all" => {
                    let (v, f) = quant(rest)?;
                    Ok(MSOFormula::All(v, f))
                }
                "exset" => {
                    let (v, f) = quant(rest)?;
                    Ok(MSOFormula::ExSet(v, f))
                }
                "allset" => {
                    let (v, f) = quant(rest)?;
                    Ok(MSOFormula::AllSet(v, f))
                }
                "in" => {
                    let ns = names(rest)?;
                    if ns.len() != 2 {
                        return Err(MSOError::Parse("`in` takes two names".into()));
                    }
                    Ok(MSOFormula::In(ns[0].clone(), ns[1].clone()))
                }
                "eq" => {
                    let ns = names(rest)?;
                    if ns.len() != 2 {
                        return Err(MSOError::Parse("`eq` takes two names".into()));
                    }
                    Ok(MSOFormula::Eq(ns[0].clone(), ns[1].clone()))
                }
                "sub" => {
                    let ns = names(rest)?;
                    if ns.len() != 2 {
                        return Err(MSOError::Parse("`sub` takes two names".into()));
                    }
                    Ok(MSOFormula::Sub(ns[0].clone(), ns[1].clone()))
                }
                "fin" => {
                    let ns = names(rest)?;
                    if ns.len() != 1 {
                        return Err(MSOError::Parse("`fin` takes one name".into()));
                    }
                    Ok(MSOFormula::Fin(ns[0].clone()))
                }
                _ => Ok(MSOFormula::Atom(head, names(rest)?)),
            }
        }
    }
}

pub fn parse_formula(text: &str) -> Result<MSOFormula, MSOError> {
    let toks = tokenize(text);
    let mut pos = 0;
    let sexpr = parse_sexpr(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(MSOError::Parse("trailing input".into()));
    }
    to_formula(&sexpr)
}

// ---------------------------------------------------------------------------
// Evaluation.

/// A value for a free variable: an element or a set of elements (bitmask).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MSOVal {
    Elem(usize),
    Set(u64),
}

enum ANode {
    True,
    False,
    And(Vec<usize>),
    Or(Vec<usize>),
    Not(usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Ex(u32, usize),
    All(u32, usize),
    ExSet(u32, usize),
    AllSet(u32, usize),
    In(u32, u32),
    Eq(u32, u32),
    Sub(u32, u32),
    Fin(u32),
    Atom(String, Vec<u32>),
}

struct Arena {
    nodes: Vec<ANode>,
    free: Vec<Vec<u32>>,
    var_names: Vec<String>,
}

impl Arena {
    fn var(&mut self, name: &str) -> u32 {
        if let Some(i) = self.var_names.iter().position(|n| n == name) {
            return i as u32;
        }
        self.var_names.push(name.to_string());
        (self.var_names.len() - 1) as u32
    }

    fn add(&mut self, node: ANode, free: Vec<u32>) -> usize {
        self.nodes.push(node);
        self.free.push(free);
        self.nodes.len() - 1
    }

    fn flatten(&mut self, f: &MSOFormula) -> usize {
        let sorted = |mut v: Vec<u32>| {
            v.sort_unstable();
            v.dedup();
            v
        };
        let merge = |ids: &[usize], arena: &Arena| {
            let mut v: Vec<u32> = Vec::new();
            for &i in ids {
                v.extend(&arena.free[i]);
            }
            v
        };
        match f {
            MSOFormula::True => self.add(ANode::True, Vec::new()),
            MSOFormula::False => self.add(ANode::False, Vec::new()),
            MSOFormula::And(fs) | MSOFormula::Or(fs) => {
                let ids: Vec<usize> = fs.iter().map(|x| self.flatten(x)).collect();
                let free = sorted(merge(&ids, self));
                let node = if matches!(f, MSOFormula::And(_)) {
                    ANode::And(ids)
                } else {
                    ANode::Or(ids)
                };
                self.add(node, free)
            }
            MSOFormula::Not(x) => {
                let i = self.flatten(x);
                let free = self.free[i].clone();
                self.add(ANode::Not(i), free)
            }
            MSOFormula::Implies(a, b) | MSOFormula::Iff(a, b) => {
                let ia = self.flatten(a);
                let ib = self.flatten(b);
                let free = sorted(merge(&[ia, ib], self));
                let node = if matches!(f, MSOFormula::Implies(..)) {
                    ANode::Implies(ia, ib)
                } else {
                    ANode::Iff(ia, ib)
                };
                self.add(node, free)
            }
            MSOFormula::Ex(v, x)
            | MSOFormula::All(v, x)
            | MSOFormula::ExSet(v, x)
            | MSOFormula::AllSet(v, x) => {
                let vid = self.var(v);
                let i = self.flatten(x);
                let free: Vec<u32> =
                    self.free[i].iter().copied().filter(|&u| u != vid).collect();
                let node = match f {
                    MSOFormula::Ex(..) => ANode::Ex(vid, i),
                    MSOFormula::All(..) => ANode::All(vid, i),
                    MSOFormula::ExSet(..) => ANode::ExSet(vid, i),
                    _ => ANode::AllSet(vid, i),
                };
                self.add(node, free)
            }
            MSOFormula::In(x, s) => {
                let a = self.var(x);
                let b = self.var(s);
                self.add(ANode::In(a, b), sorted(vec![a, b]))
            }
            MSOFormula::Eq(x, y) => {
                let a = self.var(x);
                let b = self.var(y);
                self.add(ANode::Eq(a, b), sorted(vec![a, b]))
            }
            MSOFormula::Sub(x, y) => {
                let a = self.var(x);
                let b = self.var(y);
                self.add(ANode::Sub(a, b), sorted(vec![a, b]))
            }
            MSOFormula::Fin(x) => {
                let a = self.var(x);
                self.add(ANode::Fin(a), vec![a])
            }
            MSOFormula::Atom(r, args) => {
                let ids: Vec<u32> = args.iter().map(|a| self.var(a)).collect();
                let free = sorted(ids.clone());
                self.add(ANode::Atom(r.clone(), ids), free)
            }
        }
    }
}

type Memo = HashMap<(usize, Vec<MSOVal>), bool>;

struct Eval<'a> {
    s: &'a RelStructure,
    arena: &'a Arena,
    env: Vec<Option<MSOVal>>,
    memo: Option<Memo>,
}

impl Eval<'_> {
    fn elem(&self, v: u32) -> Result<usize, MSOError> {
        match self.env[v as usize] {
            Some(MSOVal::Elem(e)) => Ok(e),
            Some(_) => Err(MSOError::KindMismatch(self.arena.var_names[v as usize].clone())),
            None => Err(MSOError::UnboundVariable(self.arena.var_names[v as usize].clone())),
        }
    }

    fn set(&self, v: u32) -> Result<u64, MSOError> {
        match self.env[v as usize] {
            Some(MSOVal::Set(m)) => Ok(m),
            Some(_) => Err(MSOError::KindMismatch(self.arena.var_names[v as usize].clone())),
            None => Err(MSOError::UnboundVariable(self.arena.var_names[v as usize].clone())),
        }
    }

    fn go(&mut self, id: usize) -> Result<bool, MSOError> {
        let key = if self.memo.is_some() {
            let mut vals = Vec::with_capacity(self.arena.free[id].len());
            for &v in &self.arena.free[id] {
                match self.env[v as usize] {
                    Some(val) => vals.push(val),
                    None => {
                        return Err(MSOError::UnboundVariable(
                            self.arena.var_names[v as usize].clone(),
                        ))
                    }
                }
            }
            let key = (id, vals);
            if let Some(&hit) = self.memo.as_ref().unwrap().get(&key) {
                return Ok(hit);
            }
            Some(key)
        } else {
            None
        };
        let out = self.step(id)?;
        if let (Some(memo), Some(key)) = (self.memo.as_mut(), key) {
            memo.insert(key, out);
        }
        Ok(out)
    }

    fn step(&mut self, id: usize) -> Result<bool, MSOError> {
        let n = self.s.size();
        // The arena is immutable during evaluation; clone small pieces to
        // keep the borrow checker out of the recursion.
        match &self.arena.nodes[id] {
            ANode::True => Ok(true),
            ANode::False => Ok(false),
            ANode::And(ids) => {
                let ids = ids.clone();
                for i in ids {
                    if !self.go(i)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            ANode::Or(ids) => {
                let ids = ids.clone();
                for i in ids {
                    if self.go(i)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            ANode::Not(i) => {
                let i = *i;
                Ok(!self.go(i)?)
            }
            ANode::Implies(a, b) => {
                let (a, b) = (*a, *b);
                Ok(!self.go(a)? || self.go(b)?)
            }
            ANode::Iff(a, b) => {
                let (a, b) = (*a, *b);
                Ok(self.go(a)? == self.go(b)?)
            }
            ANode::Ex(v, i) | ANode::All(v, i) => {
                let every = matches!(self.arena.nodes[id], ANode::All(..));
                let (v, i) = (*v as usize, *i);
                let saved = self.env[v];
                let mut out = every;
                for e in 0..n {
                    self.env[v] = Some(MSOVal::Elem(e));
                    let r = self.go(i)?;
                    if every && !r {
                        out = false;
                        break;
                    }
                    if !every && r {
                        out = true;
                        break;
                    }
                }
                self.env[v] = saved;
                Ok(out)
            }
            ANode::ExSet(v, i) | ANode::AllSet(v, i) => {
                if n > 20 {
                    return Err(MSOError::TooLarge(n));
                }
                let every = matches!(self.arena.nodes[id], ANode::AllSet(..));
                let (v, i) = (*v as usize, *i);
                let saved = self.env[v];
                let mut out = every;
                for mask in 0u64..(1u64 << n) {
                    self.env[v] = Some(MSOVal::Set(mask));
                    let r = self.go(i)?;
                    if every && !r {
                        out = false;
                        break;
                    }
                    if !every && r {
                        out = true;
                        break;
                    }
                }
                self.env[v] = saved;
                Ok(out)
            }
            ANode::In(x, s) => {
                let (x, s) = (*x, *s);
                let e = self.elem(x)?;
                let m = self.set(s)?;
                Ok(m & (1u64 << e) != 0)
            }
            ANode::Eq(x, y) => {
                let (x, y) = (*x, *y);
                Ok(self.elem(x)? == self.elem(y)?)
            }
            ANode::Sub(x, y) => {
                let (x, y) = (*x, *y);
                let (a, b) = (self.set(x)?, self.set(y)?);
                Ok(a & !b == 0)
            }
            ANode::Fin(x) => {
                let x = *x;
                self.set(x)?;
                Ok(true)
            }
            ANode::Atom(r, args) => {
                let r = r.clone();
                let args = args.clone();
                let vals: Vec<usize> =
                    args.iter().map(|&a| self.elem(a)).collect::<Result<_, _>>()?;
                self.s.holds(&r, &vals)
            }
        }
    }
}

fn eval_with(
    s: &RelStructure,
    f: &MSOFormula,
    env: &BTreeMap<String, MSOVal>,
    memoize: bool,
) -> Result<bool, MSOError> {
    if s.size() > 63 {
        return Err(MSOError::TooLarge(s.size()));
    }
    let mut arena = Arena { nodes: Vec::new(), free: Vec::new(), var_names: Vec::new() };
    let root = arena.flatten(f);
    let mut bound = vec![None; arena.var_names.len()];
    for (name, &val) in env {
        if let Some(i) = arena.var_names.iter().position(|n| n == name) {
            bound[i] = Some(val);
        }
    }
    let mut ev = Eval {
        s,
        arena: &arena,
        env: bound,
        memo: if memoize { Some(HashMap::new()) } else { None },
    };
    ev.go(root)
}

/// Evaluates a formula on a structure under an assignment of its free
/// variables, memoizing subformula results.
pub fn eval_mso(
    s: &RelStructure,
    f: &MSOFormula,
    env: &BTreeMap<String, MSOVal>,
) -> Result<bool, MSOError> {
    eval_with(s, f, env, true)
}

/// The plain recursive evaluator, used as an oracle for [`eval_mso`].
pub fn eval_mso_naive(
    s: &RelStructure,
    f: &MSOFormula,
    env: &BTreeMap<String, MSOVal>,
) -> Result<bool, MSOError> {
    eval_with(s, f, env, false)
}

// ---------------------------------------------------------------------------
// Encodings.

/// Encodes a structured forest as a relational structure: `leq` is the
/// order, `N0` and `N1` mark the nodes whose line depth is even or odd.
pub fn encode_structuring(j: &SOAForest) -> RelStructure {
    let f = j.forest();
    let n = f.len();
    let mut s = RelStructure::new(f.nodes().to_vec());
    let mut leq = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if f.leq_idx(i, k) {
                leq.push(vec![i, k]);
            }
        }
    }
    s.add_rel("leq", 2, leq).expect("valid tuples");
    let mut n0 = Vec::new();
    let mut n1 = Vec::new();
    for i in 0..n {
        if j.depth(i) % 2 == 0 {
            n0.push(vec![i]);
        } else {
            n1.push(vec![i]);
        }
    }
    s.add_rel("N0", 1, n0).expect("valid tuples");
    s.add_rel("N1", 1, n1).expect("valid tuples");
    s
}

/// Encodes a finite term: elements are positions in preorder, with child
/// relations, the reflexive ancestor order `anc`, and one unary `lab_<sym>`
/// relation per symbol.
pub fn encode_term(t: &FiniteTerm) -> RelStructure {
    let pos = t.positions();
    let index: BTreeMap<String, usize> =
        pos.iter().enumerate().map(|(i, (p, _))| (p.to_string(), i)).collect();
    let mut s = RelStructure::new(pos.iter().map(|(p, _)| p.to_string()).collect());
    let mut anc = Vec::new();
    for (i, (p, _)) in pos.iter().enumerate() {
        for (k, (q, _)) in pos.iter().enumerate() {
            if p.is_prefix_of(q) {
                anc.push(vec![i, k]);
            }
        }
    }
    s.add_rel("anc", 2, anc).expect("valid tuples");
    let mut by_sym: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    let mut child1 = Vec::new();
    let mut child2 = Vec::new();
    for (i, (p, _)) in pos.iter().enumerate() {
        let sub = t.subterm_at(p).expect("position enumerated");
        by_sym.entry(format!("lab_{}", sub.sym())).or_default().push(vec![i]);
        for ci in 0..sub.children().len() {
            let d = if ci == 0 { Dir::Left } else { Dir::Right };
            let k = index[&p.child(d).to_string()];
            if ci == 0 {
                child1.push(vec![i, k]);
            } else {
                child2.push(vec![i, k]);
            }
        }
    }
    s.add_rel("child1", 2, child1).expect("valid tuples");
    s.add_rel("child2", 2, child2).expect("valid tuples");
    for (name, tuples) in by_sym {
        s.add_rel(&name, 1, tuples).expect("valid tuples");
    }
    s
}

/// Rebuilds the structured forest from an encoding, returning `None` when
/// the structure is not a valid encoding: `leq` must be a reflexive
/// order-theoretic forest order, `N0`/`N1` a partition with maximal nodes
/// in `N0`, and the parity runs must form lines whose depths match.
pub fn decode_structuring(s: &RelStructure) -> Option<SOAForest> {
    let n = s.size();
    let leq = s.rel("leq")?;
    if leq.arity != 2 {
        return None;
    }
    let mut matrix = vec![false; n * n];
    for t in &leq.tuples {
        matrix[t[0] * n + t[1]] = true;
    }
    for i in 0..n {
        if !matrix[i * n + i] {
            return None;
        }
    }
    let forest = OForest::from_matrix(s.names().to_vec(), matrix).ok()?;
    let unary = |name: &str| -> Option<BTreeSet<usize>> {
        let r = s.rel(name)?;
        if r.arity != 1 {
            return None;
        }
        Some(r.tuples.iter().map(|t| t[0]).collect())
    };
    let n0 = unary("N0")?;
    let n1 = unary("N1")?;
    if n0.intersection(&n1).next().is_some() || n0.len() + n1.len() != n {
        return None;
    }
    for r in forest.roots() {
        if !n0.contains(&r) {
            return None;
        }
    }
    let same_block = |i: usize, k: usize| n0.contains(&i) == n0.contains(&k);
    let same_line = |i: usize, k: usize| {
        forest.comparable_idx(i, k)
            && same_block(i, k)
            && (0..n).all(|z| {
                let between = (forest.leq_idx(i, z) && forest.leq_idx(z, k))
                    || (forest.leq_idx(k, z) && forest.leq_idx(z, i));
                !between || same_block(z, i)
            })
    };
    let mut seen = vec![false; n];
    let mut lines: Vec<Vec<String>> = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&k| same_line(i, k)).collect();
        for &a in &class {
            for &b in &class {
                if !same_line(a, b) {
                    return None;
                }
            }
            if seen[a] {
                return None;
            }
            seen[a] = true;
        }
        lines.push(class.iter().map(|&a| forest.name(a).to_string()).collect());
    }
    let j = SOAForest::new(forest, lines, None).ok()?;
    for i in 0..n {
        let parity = if n0.contains(&i) { 0 } else { 1 };
        if j.depth(i) % 2 != parity {
            return None;
        }
    }
    Some(j)
}

/// Whether the structure is a valid structuring encoding (decode and
/// validate; the oracle for [`structuring_sentence`]).
pub fn check_structuring_encoding(s: &RelStructure) -> bool {
    decode_structuring(s).is_some()
}

/// Whether `u` is exactly a line of the decoded structuring (the oracle
/// for [`line_formula`]).
pub fn check_line(s: &RelStructure, u: &BTreeSet<usize>) -> bool {
    let Some(j) = decode_structuring(s) else {
        return false;
    };
    (0..j.line_count()).any(|li| {
        let set: BTreeSet<usize> = j.line(li).iter().copied().collect();
        set == *u
    })
}

/// Whether line `w` covers line `u` in the decoded structuring (the oracle
/// for [`covers_formula`]).
pub fn check_covers(s: &RelStructure, u: &BTreeSet<usize>, w: &BTreeSet<usize>) -> bool {
    let Some(j) = decode_structuring(s) else {
        return false;
    };
    let find = |set: &BTreeSet<usize>| {
        (0..j.line_count()).find(|&li| {
            let line: BTreeSet<usize> = j.line(li).iter().copied().collect();
            line == *set
        })
    };
    match (find(u), find(w)) {
        (Some(lu), Some(lw)) => j.covers(lu, lw),
        _ => false,
    }
}

fn lt_text(x: &str, y: &str) -> String {
    format!("(and (leq {x} {y}) (not (eq {x} {y})))")
}

fn same_line_text(x: &str, y: &str, z: &str) -> String {
    format!(
        "(and (or (leq {x} {y}) (leq {y} {x})) \
              (iff (N0 {x}) (N0 {y})) \
              (all {z} (implies (or (and (leq {x} {z}) (leq {z} {y})) \
                                    (and (leq {y} {z}) (leq {z} {x}))) \
                                (iff (N0 {z}) (N0 {x})))))"
    )
}

/// The sentence holding exactly on valid structuring encodings: `leq` is a
/// reflexive order whose up-sets are chains, `N0`/`N1` partition the
/// domain with maximal nodes even, and the parity classes are chains.
pub fn structuring_sentence() -> MSOFormula {
    let sl_xy = same_line_text("x", "y", "u");
    let sl_xz = same_line_text("x", "z", "v");
    let text = format!(
        "(and \
           (all x (leq x x)) \
           (all x (all y (implies (and (leq x y) (leq y x)) (eq x y)))) \
           (all x (all y (all z (implies (and (leq x y) (leq y z)) (leq x z))))) \
           (all x (all y (all z (implies (and (leq x y) (leq x z)) (or (leq y z) (leq z y)))))) \
           (all x (and (or (N0 x) (N1 x)) (not (and (N0 x) (N1 x))))) \
           (all x (implies (all y (implies (leq x y) (eq x y))) (N0 x))) \
           (all x (all y (all z (implies (and {sl_xy} {sl_xz}) (or (leq y z) (leq z y)))))))"
    );
    parse_formula(&text).expect("well-formed sentence")
}

/// Holds when the free set variable `U` is a line of the encoded
/// structuring: nonempty, same-line-closed, and same-line-connected.
pub fn line_formula() -> MSOFormula {
    let phi = structuring_sentence();
    let sl_xy = same_line_text("x", "y", "u");
    let text = format!(
        "(and {phi} \
           (ex x (in x U)) \
           (all x (all y (implies (and (in x U) (in y U)) {sl_xy}))) \
           (all x (all y (implies (and (in x U) {sl_xy}) (in y U)))))"
    );
    parse_formula(&text).expect("well-formed formula")
}

/// Holds when the free set variables `U` and `W` are lines and `W` covers
/// `U`: some `w` in `W` lies above all of `U`, and anything above all of
/// `U` and strictly below such a `w` belongs to `W`.
pub fn covers_formula() -> MSOFormula {
    let line = line_formula();
    let line_w = line_formula_over("W");
    let lt_ux = lt_text("u", "x");
    let lt_xw = lt_text("x", "w");
    let lt_uw = lt_text("u", "w");
    let text = format!(
        "(and {line} {line_w} \
           (ex w (and (in w W) (all u (implies (in u U) {lt_uw})))) \
           (all x (all w (implies (and (in w W) \
                                       (all u (implies (in u U) {lt_ux})) \
                                       {lt_xw}) \
                                  (in x W)))))"
    );
    parse_formula(&text).expect("well-formed formula")
}

fn line_formula_over(var: &str) -> MSOFormula {
    let sl_xy = same_line_text("x", "y", "u");
    let text = format!(
        "(and (ex x (in x {var})) \
           (all x (all y (implies (and (in x {var}) (in y {var})) {sl_xy}))) \
           (all x (all y (implies (and (in x {var}) {sl_xy}) (in y {var})))))"
    );
    parse_formula(&text).expect("well-formed formula")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse_term, Signature};
    use crate::value::val_direct;

    fn chain3() -> RelStructure {
        // c < b < a, all one line, depth parity all even.
        let mut s = RelStructure::new(vec!["a".into(), "b".into(), "c".into()]);
        s.add_rel(
            "leq",
            2,
            vec![
                vec![0, 0],
                vec![1, 1],
                vec![2, 2],
                vec![1, 0],
                vec![2, 0],
                vec![2, 1],
            ],
        )
        .unwrap();
        s.add_rel("N0", 1, vec![vec![0], vec![1], vec![2]]).unwrap();
        s.add_rel("N1", 1, Vec::<Vec<usize>>::new()).unwrap();
        s
    }

    #[test]
    fn evaluator_basics() {
        let s = chain3();
        let env = BTreeMap::new();
        let cases = [
            ("(all x (leq x x))", true),
            ("(ex x (all y (leq y x)))", true),
            ("(ex x (all y (leq x y)))", true),
            ("(all x (all y (or (leq x y) (leq y x))))", true),
            ("(ex x (not (leq x x)))", false),
            ("(exset X (and (ex x (in x X)) (all x (all y (implies (and (in x X) (in y X)) (eq x y))))))", true),
            ("(allset X (exset Y (sub X Y)))", true),
            ("(allset X (fin X))", true),
        ];
        for (text, want) in cases {
            let f = parse_formula(text).unwrap();
            assert_eq!(eval_mso(&s, &f, &env).unwrap(), want, "{text}");
            assert_eq!(eval_mso_naive(&s, &f, &env).unwrap(), want, "{text}");
        }
    }

    #[test]
    fn evaluator_errors() {
        let s = chain3();
        let env = BTreeMap::new();
        let f = parse_formula("(ex x (missing x))").unwrap();
        assert!(matches!(eval_mso(&s, &f, &env), Err(MSOError::UnknownRelation(_))));
        let f = parse_formula("(ex x (in x x))").unwrap();
        assert!(matches!(eval_mso(&s, &f, &env), Err(MSOError::KindMismatch(_))));
        let f = parse_formula("(leq x y)").unwrap();
        assert!(matches!(eval_mso(&s, &f, &env), Err(MSOError::UnboundVariable(_))));
    }

    #[test]
    fn free_variable_assignments() {
        let s = chain3();
        let f = parse_formula("(in x X)").unwrap();
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), MSOVal::Elem(1));
        env.insert("X".to_string(), MSOVal::Set(0b010));
        assert!(eval_mso(&s, &f, &env).unwrap());
        env.insert("X".to_string(), MSOVal::Set(0b101));
        assert!(!eval_mso(&s, &f, &env).unwrap());
    }

    #[test]
    fn encoding_round_trips() {
        let sig = Signature::soa();
        let t = parse_term("'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)", &sig)
            .unwrap();
        let j = val_direct(&t).unwrap();
        let s = encode_structuring(&j);
        let back = decode_structuring(&s).expect("valid encoding decodes");
        assert_eq!(back.forest().nodes(), j.forest().nodes());
        assert_eq!(back.line_count(), j.line_count());
        for i in 0..j.forest().len() {
            assert_eq!(back.depth(i), j.depth(i));
        }
        assert!(check_structuring_encoding(&s));
    }

    #[test]
    fn sentence_matches_decoder_on_valid_and_broken_encodings() {
        let sig = Signature::soa();
        let phi = structuring_sentence();
        let env = BTreeMap::new();
        let t = parse_term("'a cat (fg('x) cat 'b)", &sig).unwrap();
        let j = val_direct(&t).unwrap();
        let good = encode_structuring(&j);
        assert!(eval_mso(&good, &phi, &env).unwrap());
        assert!(check_structuring_encoding(&good));
        // Swap the parity marks: maxima land in N1.
        let mut bad = good.clone();
        let n0 = bad.rel("N1").unwrap().tuples.clone();
        let n1 = bad.rel("N0").unwrap().tuples.clone();
        bad.add_rel("N0", 1, n0).unwrap();
        bad.add_rel("N1", 1, n1).unwrap();
        assert!(!eval_mso(&bad, &phi, &env).unwrap());
        assert!(!check_structuring_encoding(&bad));
        // Break transitivity.
        let mut broken = good.clone();
        let mut tuples = broken.rel("leq").unwrap().tuples.clone();
        let some = tuples.iter().find(|t| t[0] != t[1]).unwrap().clone();
        tuples.remove(&some);
        broken.add_rel("leq", 2, tuples).unwrap();
        assert_eq!(
            eval_mso(&broken, &phi, &env).unwrap(),
            check_structuring_encoding(&broken)
        );
    }

    #[test]
    fn line_and_covers_formulas_agree_with_oracles() {
        let sig = Signature::soa();
        let t = parse_term("'a cat (fg('x cat 'y) cat 'b)", &sig).unwrap();
        let j = val_direct(&t).unwrap();
        let s = encode_structuring(&j);
        let n = s.size();
        let theta1 = line_formula();
        let theta2 = covers_formula();
        for mask in 0u64..(1 << n) {
            let u: BTreeSet<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let mut env = BTreeMap::new();
            env.insert("U".to_string(), MSOVal::Set(mask));
            assert_eq!(
                eval_mso(&s, &theta1, &env).unwrap(),
                check_line(&s, &u),
                "mask {mask:b}"
            );
        }
        for um in 0u64..(1 << n) {
            for wm in 0u64..(1 << n) {
                let u: BTreeSet<usize> = (0..n).filter(|&i| um & (1 << i) != 0).collect();
                let w: BTreeSet<usize> = (0..n).filter(|&i| wm & (1 << i) != 0).collect();
                let mut env = BTreeMap::new();
                env.insert("U".to_string(), MSOVal::Set(um));
                env.insert("W".to_string(), MSOVal::Set(wm));
                assert_eq!(
                    eval_mso(&s, &theta2, &env).unwrap(),
                    check_covers(&s, &u, &w),
                    "u {um:b} w {wm:b}"
                );
            }
        }
    }

    #[test]
    fn term_encoding_supports_queries() {
        let sig = Signature::soa();
        let t = parse_term("'a cat (fg('x) cat 'b)", &sig).unwrap();
        let s = encode_term(&t);
        let env = BTreeMap::new();
        let f = parse_formula("(ex x (lab_fg x))").unwrap();
        assert!(eval_mso(&s, &f, &env).unwrap());
        let f = parse_formula("(all x (implies (lab_cat x) (ex y (child2 x y))))").unwrap();
        assert!(eval_mso(&s, &f, &env).unwrap());
        let f =
            parse_formula("(all x (all y (implies (child1 x y) (and (anc x y) (not (anc y x))))))")
                .unwrap();
        assert!(eval_mso(&s, &f, &env).unwrap());
        let root_is_cat = parse_formula("(ex r (and (all x (anc r x)) (lab_cat r)))").unwrap();
        assert!(eval_mso(&s, &root_is_cat, &env).unwrap());
    }

    #[test]
    fn structure_json_round_trip() {
        let s = chain3();
        let back = RelStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(RelStructure::from_json("{\"names\":[\"a\"],\"rels\":{\"r\":{\"arity\":1,\"tuples\":[[3]]}}}").is_err());
    }
}
