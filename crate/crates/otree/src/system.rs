//! Regular equation systems and top-down deterministic automata.
//!
//! A regular term (a possibly infinite term with finitely many distinct
//! subterms) is stored canonically as an [`EquationSystem`]; the
//! [`Automaton`] view is derived and interchangeable. Right-hand sides are
//! one level deep and symbol-headed (`f`, `f(u)`, `f(u,v)`), so aliases and
//! unguarded recursion cannot be expressed. The surface syntax accepts nested
//! right-hand sides and lowers them to this form with fresh auxiliary
//! unknowns.

use crate::position::{Dir, Position};
use crate::term::{lex, Cursor, FiniteTerm, Signature, Spanned, TermError, Tok};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SystemError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("unknown `{0}` is declared twice")]
    DuplicateUnknown(String),
    #[error("right-hand side of `{0}` is a bare unknown; every rhs must be symbol-headed")]
    AliasRhs(String),
    #[error("root `{0}` is not a declared unknown")]
    UndeclaredRoot(String),
    #[error("missing `root <unknown>;` clause")]
    MissingRoot,
    #[error("truncation filler `{0}` is not a nullary symbol of the signature")]
    BadFiller(String),
    #[error("automaton json: {0}")]
    Json(String),
}

/// One transition / right-hand side: an emitted symbol and its successor
/// unknowns (as indices), matching the symbol's arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub sym: String,
    pub args: Vec<usize>,
}

/// A regular equation system: ordered unknowns, one symbol-headed rhs each,
/// and a designated root. Its unique solution is a regular term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    sig: Signature,
    unknowns: Vec<String>,
    rhs: Vec<Step>,
    root: usize,
}

/// Builder for programmatic construction; names are resolved on `finish`.
pub struct SystemBuilder {
    sig: Signature,
    items: Vec<(String, String, Vec<String>)>,
}

impl SystemBuilder {
    pub fn new(sig: Signature) -> Self {
        SystemBuilder { sig, items: Vec::new() }
    }

    pub fn rule<S: Into<String>>(
        &mut self,
        unknown: impl Into<String>,
        sym: impl Into<String>,
        args: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        self.items.push((
            unknown.into(),
            sym.into(),
            args.into_iter().map(Into::into).collect(),
        ));
        self
    }

    pub fn finish(self, root: &str) -> Result<EquationSystem, SystemError> {
        let mut index = BTreeMap::new();
        let mut unknowns = Vec::new();
        for (u, _, _) in &self.items {
            if index.insert(u.clone(), unknowns.len()).is_some() {
                return Err(SystemError::DuplicateUnknown(u.clone()));
            }
            unknowns.push(u.clone());
        }
        let mut rhs = Vec::new();
        for (u, sym, args) in &self.items {
            let arity = self
                .sig
                .arity(sym)
                .ok_or_else(|| TermError::UnknownSymbol(sym.clone()))?;
            if arity != args.len() {
                return Err(TermError::Arity {
                    sym: sym.clone(),
                    expected: arity,
                    got: args.len(),
                }
                .into());
            }
            let mut ids = Vec::new();
            for a in args {
                let &i = index
                    .get(a)
                    .ok_or_else(|| SystemError::UndeclaredRoot(format!("{a} (in rhs of {u})")))?;
                ids.push(i);
            }
            rhs.push(Step { sym: sym.clone(), args: ids });
        }
        let root = *index
            .get(root)
            .ok_or_else(|| SystemError::UndeclaredRoot(root.to_string()))?;
        Ok(EquationSystem { sig: self.sig, unknowns, rhs, root })
    }
}

impl EquationSystem {
    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn rhs(&self, i: usize) -> &Step {
        &self.rhs[i]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_name(&self) -> &str {
        &self.unknowns[self.root]
    }

    pub fn index_of(&self, unknown: &str) -> Option<usize> {
        self.unknowns.iter().position(|u| u == unknown)
    }

    /// The automaton view: states = unknowns, initial = root, transitions
    /// mirror the right-hand sides.
    pub fn to_automaton(&self) -> Automaton {
        Automaton {
            sig: self.sig.clone(),
            states: self.unknowns.clone(),
            initial: self.root,
            delta: self.rhs.clone(),
        }
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, step) in self.unknowns.iter().zip(&self.rhs) {
            write!(f, "let {u} = {}", step.sym)?;
            if !step.args.is_empty() {
                let args: Vec<&str> = step
                    .args
                    .iter()
                    .map(|&i| self.unknowns[i].as_str())
                    .collect();
                write!(f, "({})", args.join(","))?;
            }
            writeln!(f, ";")?;
        }
        writeln!(f, "root {};", self.unknowns[self.root])
    }
}

// ---------------------------------------------------------------------------
// Parsing: nested right-hand sides are lowered to one-level form.

#[derive(Debug)]
enum Raw {
    Ref(String),
    Sym(String, Vec<Raw>),
}

fn parse_raw_expr(
    cur: &mut Cursor,
    sig: &Signature,
    declared: &BTreeSet<String>,
) -> Result<Raw, TermError> {
    let lhs = parse_raw_primary(cur, sig, declared)?;
    if let Some(Tok::Ident(id)) = cur.peek() {
        if id == "cat" && !declared.contains("cat") && sig.arity("cat") == Some(2) {
            cur.next();
            let rhs = parse_raw_expr(cur, sig, declared)?;
            return Ok(Raw::Sym("cat".into(), vec![lhs, rhs]));
        }
    }
    Ok(lhs)
}

fn parse_raw_primary(
    cur: &mut Cursor,
    sig: &Signature,
    declared: &BTreeSet<String>,
) -> Result<Raw, TermError> {
    match cur.next() {
        Some(Spanned { tok: Tok::LParen, .. }) => {
            let inner = parse_raw_expr(cur, sig, declared)?;
            cur.expect(Tok::RParen, "`)`")?;
            Ok(inner)
        }
        Some(Spanned { tok: Tok::Ident(name), line, col }) => {
            if cur.peek() == Some(&Tok::LParen) {
                cur.next();
                let mut args = Vec::new();
                loop {
                    args.push(parse_raw_expr(cur, sig, declared)?);
                    match cur.next() {
                        Some(Spanned { tok: Tok::Comma, .. }) => continue,
                        Some(Spanned { tok: Tok::RParen, .. }) => break,
                        _ => {
                            return Err(TermError::Syntax {
                                line,
                                col,
                                msg: format!("unterminated argument list of `{name}`"),
                            })
                        }
                    }
                }
                let expected = sig
                    .arity(&name)
                    .ok_or_else(|| TermError::UnknownSymbol(name.clone()))?;
                if expected != args.len() {
                    return Err(TermError::Arity { sym: name, expected, got: args.len() });
                }
                Ok(Raw::Sym(name, args))
            } else if declared.contains(&name) {
                Ok(Raw::Ref(name))
            } else {
                let expected = sig
                    .arity(&name)
                    .ok_or_else(|| TermError::UnknownSymbol(name.clone()))?;
                if expected != 0 {
                    return Err(TermError::Arity { sym: name, expected, got: 0 });
                }
                Ok(Raw::Sym(name, Vec::new()))
            }
        }
        Some(s) => Err(TermError::Syntax {
            line: s.line,
            col: s.col,
            msg: "expected a right-hand side".into(),
        }),
        None => Err(cur.err("expected a right-hand side, found end of input")),
    }
}

/// Parses `{"let" ident "=" rhs ";"} "root" ident ";"`. Nested right-hand
/// sides introduce auxiliary unknowns named `<unknown>_<n>`.
pub fn parse_system(text: &str, sig: &Signature) -> Result<EquationSystem, SystemError> {
    let toks = lex(text)?;
    // First pass: collect declared unknown names.
    let mut declared = BTreeSet::new();
    let mut i = 0;
    while i + 1 < toks.len() {
        if toks[i].tok == Tok::Ident("let".into()) {
            if let Tok::Ident(name) = &toks[i + 1].tok {
                if !declared.insert(name.clone()) {
                    return Err(SystemError::DuplicateUnknown(name.clone()));
                }
            }
            i += 2;
        } else {
            i += 1;
        }
    }

    let mut cur = Cursor::new(toks);
    let mut raws: Vec<(String, Raw)> = Vec::new();
    let root = loop {
        match cur.next() {
            Some(Spanned { tok: Tok::Ident(kw), line, col }) if kw == "let" => {
                let name = match cur.next() {
                    Some(Spanned { tok: Tok::Ident(n), .. }) => n,
                    _ => {
                        return Err(TermError::Syntax {
                            line,
                            col,
                            msg: "expected unknown name after `let`".into(),
                        }
                        .into())
                    }
                };
                cur.expect(Tok::Eq, "`=`")?;
                let raw = parse_raw_expr(&mut cur, sig, &declared)?;
                cur.expect(Tok::Semi, "`;`")?;
                raws.push((name, raw));
            }
            Some(Spanned { tok: Tok::Ident(kw), line, col }) if kw == "root" => {
                let name = match cur.next() {
                    Some(Spanned { tok: Tok::Ident(n), .. }) => n,
                    _ => {
                        return Err(TermError::Syntax {
                            line,
                            col,
                            msg: "expected unknown name after `root`".into(),
                        }
                        .into())
                    }
                };
                cur.expect(Tok::Semi, "`;`")?;
                break name;
            }
            Some(s) => {
                return Err(TermError::Syntax {
                    line: s.line,
                    col: s.col,
                    msg: "expected `let` or `root`".into(),
                }
                .into())
            }
            None => return Err(SystemError::MissingRoot),
        }
    };
    if !cur.at_end() {
        return Err(TermError::Syntax {
            line: cur.here().0,
            col: cur.here().1,
            msg: "trailing input after `root` clause".into(),
        }
        .into());
    }
    if !declared.contains(&root) {
        return Err(SystemError::UndeclaredRoot(root));
    }

    // Lowering. Auxiliary unknowns are appended after all declared ones, in
    // first-use order, so printing stays close to the input.
    let mut builder_items: Vec<(String, String, Vec<String>)> = Vec::new();
    let mut taken: BTreeSet<String> = declared.clone();
    let mut queue: VecDeque<(String, Raw)> = VecDeque::new();
    for (name, raw) in raws {
        queue.push_back((name, raw));
    }
    while let Some((name, raw)) = queue.pop_front() {
        match raw {
            Raw::Ref(_) => return Err(SystemError::AliasRhs(name)),
            Raw::Sym(sym, args) => {
                let mut arg_names = Vec::new();
                let mut fresh = 1usize;
                for a in args {
                    match a {
                        Raw::Ref(r) => arg_names.push(r),
                        nested => {
                            let aux = loop {
                                let cand = format!("{name}_{fresh}");
                                fresh += 1;
                                if taken.insert(cand.clone()) {
                                    break cand;
                                }
                            };
                            arg_names.push(aux.clone());
                            queue.push_back((aux, nested));
                        }
                    }
                }
                builder_items.push((name, sym, arg_names));
            }
        }
    }

    let mut b = SystemBuilder::new(sig.clone());
    for (u, s, a) in builder_items {
        b.rule(u, s, a);
    }
    b.finish(&root)
}

// ---------------------------------------------------------------------------
// Automata.

/// Top-down deterministic automaton: a total transition map emitting one
/// symbol per state. It accepts exactly one term (Prop-style determinism),
/// namely the solution of the mirrored equation system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    sig: Signature,
    states: Vec<String>,
    initial: usize,
    delta: Vec<Step>,
}

impl Automaton {
    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn step(&self, s: usize) -> &Step {
        &self.delta[s]
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The equation-system view (inverse of `to_automaton`).
    pub fn to_system(&self) -> EquationSystem {
        EquationSystem {
            sig: self.sig.clone(),
            unknowns: self.states.clone(),
            rhs: self.delta.clone(),
            root: self.initial,
        }
    }

    /// The run state at position `p`, or `None` when `p` lies outside the
    /// accepted term's domain. The run at the root is the initial state.
    pub fn state_at(&self, p: &Position) -> Option<usize> {
        let mut s = self.initial;
        for d in p.digits() {
            let step = &self.delta[s];
            s = match d {
                Dir::Left => *step.args.first()?,
                Dir::Right => *step.args.get(1)?,
            };
        }
        Some(s)
    }

    pub fn label_at(&self, p: &Position) -> Option<&str> {
        self.state_at(p).map(|s| self.delta[s].sym.as_str())
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for &t in &self.delta[s].args {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Drops unreachable states (permitted on input, pruned before
    /// comparisons).
    pub fn prune(&self) -> Automaton {
        let seen = self.reachable();
        let mut map = vec![usize::MAX; self.len()];
        let mut states = Vec::new();
        let mut delta = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                map[s] = states.len();
                states.push(self.states[s].clone());
                delta.push(self.delta[s].clone());
            }
        }
        for step in &mut delta {
            for a in &mut step.args {
                *a = map[*a];
            }
        }
        Automaton { sig: self.sig.clone(), states, initial: map[self.initial], delta }
    }

    /// True when the accepted term is finite (no reachable cycle).
    pub fn is_finite(&self) -> bool {
        let a = self.prune();
        // Kahn-style: repeatedly remove states all of whose successors are
        // already removed; a leftover means a cycle.
        let mut removed = vec![false; a.len()];
        loop {
            let mut progress = false;
            for s in 0..a.len() {
                if !removed[s] && a.delta[s].args.iter().all(|&t| removed[t]) {
                    removed[s] = true;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        removed.into_iter().all(|r| r)
    }

    /// Expands the accepted term when it is finite.
    pub fn to_finite_term(&self) -> Option<FiniteTerm> {
        if !self.is_finite() {
            return None;
        }
        fn go(a: &Automaton, s: usize) -> FiniteTerm {
            let step = &a.delta[s];
            FiniteTerm::new(
                step.sym.clone(),
                step.args.iter().map(|&t| go(a, t)).collect(),
            )
        }
        Some(go(self, self.initial))
    }

    /// Minimal canonical form: prune, merge bisimilar states, rename by BFS
    /// discovery order. Two automata accept the same term iff their
    /// normalized forms have identical structure.
    pub fn normalize(&self) -> Automaton {
        let a = self.prune();
        // Partition refinement on (symbol, child classes).
        let mut class: Vec<usize> = vec![0; a.len()];
        let mut n_classes = 1usize;
        loop {
            let mut key_to_class: BTreeMap<(String, Vec<usize>), usize> = BTreeMap::new();
            let mut next: Vec<usize> = Vec::with_capacity(a.len());
            for s in 0..a.len() {
                let key = (
                    a.delta[s].sym.clone(),
                    a.delta[s].args.iter().map(|&t| class[t]).collect::<Vec<_>>(),
                );
                let fresh = key_to_class.len();
                let id = *key_to_class.entry(key).or_insert(fresh);
                next.push(id);
            }
            let m = key_to_class.len();
            if m == n_classes && next == class {
                break;
            }
            n_classes = m;
            class = next;
        }
        // Quotient, then canonical BFS rename.
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for s in 0..a.len() {
            rep.entry(class[s]).or_insert(s);
        }
        let mut order: Vec<usize> = Vec::new(); // class ids in BFS order
        let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([class[a.initial]]);
        pos.insert(class[a.initial], 0);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            for &t in &a.delta[rep[&c]].args {
                let ct = class[t];
                if !pos.contains_key(&ct) {
                    pos.insert(ct, pos.len());
                    queue.push_back(ct);
                }
            }
        }
        let mut states = Vec::new();
        let mut delta = Vec::new();
        for (i, &c) in order.iter().enumerate() {
            states.push(format!("s{i}"));
            let step = &a.delta[rep[&c]];
            delta.push(Step {
                sym: step.sym.clone(),
                args: step.args.iter().map(|&t| pos[&class[t]]).collect(),
            });
        }
        Automaton { sig: a.sig, states, initial: 0, delta }
    }

    /// Structural equality of transition graphs, ignoring state names and the
    /// signature carrier.
    pub fn same_structure(&self, other: &Automaton) -> bool {
        self.initial == other.initial
            && self.delta.len() == other.delta.len()
            && self.delta == other.delta
    }

    /// True when both automata accept the same term.
    pub fn bisimilar(&self, other: &Automaton) -> bool {
        self.normalize().same_structure(&other.normalize())
    }

    /// DFA over {1,2} accepting the occurrences of `sym` in the accepted
    /// term: exactly the in-domain positions labelled `sym`.
    pub fn occurrences_language(&self, sym: &str) -> Dfa {
        Dfa {
            initial: self.initial,
            accepting: self.delta.iter().map(|s| s.sym == sym).collect(),
            delta: self
                .delta
                .iter()
                .map(|s| [s.args.first().copied(), s.args.get(1).copied()])
                .collect(),
        }
    }

    /// DFA accepting the whole domain of the accepted term.
    pub fn domain_language(&self) -> Dfa {
        Dfa {
            initial: self.initial,
            accepting: vec![true; self.len()],
            delta: self
                .delta
                .iter()
                .map(|s| [s.args.first().copied(), s.args.get(1).copied()])
                .collect(),
        }
    }

    /// Cuts the accepted term at depth `L`: positions shorter than `L` keep
    /// their labels, in-domain positions of length `L` become `filler`.
    pub fn truncate(&self, l: usize, filler: &str) -> Result<FiniteTerm, SystemError> {
        if self.sig.arity(filler) != Some(0) {
            return Err(SystemError::BadFiller(filler.to_string()));
        }
        fn go(a: &Automaton, s: usize, depth: usize, l: usize, filler: &str) -> FiniteTerm {
            if depth == l {
                return FiniteTerm::leaf(filler);
            }
            let step = &a.delta[s];
            FiniteTerm::new(
                step.sym.clone(),
                step.args
                    .iter()
                    .map(|&t| go(a, t, depth + 1, l, filler))
                    .collect(),
            )
        }
        Ok(go(self, self.initial, 0, l, filler))
    }
}

/// Annotates every symbol with the run state at its occurrences: the solution
/// of the result is the state-annotated term, with symbols `f@state`.
pub fn annotate_run(sys: &EquationSystem) -> EquationSystem {
    let aut = sys.to_automaton();
    let pairs: Vec<(String, usize)> = (0..aut.len())
        .map(|s| {
            let step = aut.step(s);
            (format!("{}@{}", step.sym, aut.state_name(s)), step.args.len())
        })
        .collect();
    let sig = Signature::new(pairs);
    EquationSystem {
        sig,
        unknowns: sys.unknowns.to_vec(),
        rhs: (0..aut.len())
            .map(|s| Step {
                sym: format!("{}@{}", aut.step(s).sym, aut.state_name(s)),
                args: aut.step(s).args.clone(),
            })
            .collect(),
        root: sys.root,
    }
}

// ---------------------------------------------------------------------------
// DFAs over {1,2} and their census.

/// Cardinality of a language or labelled-set count: a natural number or ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Count {
    Finite(u64),
    Omega,
}

impl Count {
    pub fn saturating_add(self, other: Count) -> Count {
        match (self, other) {
            (Count::Finite(a), Count::Finite(b)) => Count::Finite(a.saturating_add(b)),
            _ => Count::Omega,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Count::Finite(0))
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n),
            Count::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(Count::Finite)
                .ok_or_else(|| D::Error::custom("count must be a nonnegative integer")),
            serde_json::Value::String(s) if s == "omega" => Ok(Count::Omega),
            _ => Err(D::Error::custom("count must be an integer or \"omega\"")),
        }
    }
}

/// A (possibly partial) DFA over the two-letter alphabet {1,2}; a missing
/// transition is an implicit dead state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    initial: usize,
    accepting: Vec<bool>,
    delta: Vec<[Option<usize>; 2]>,
}

impl Dfa {
    pub fn new(initial: usize, accepting: Vec<bool>, delta: Vec<[Option<usize>; 2]>) -> Self {
        assert_eq!(accepting.len(), delta.len());
        assert!(initial < delta.len());
        Dfa { initial, accepting, delta }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn accepts(&self, w: &Position) -> bool {
        let mut s = self.initial;
        for d in w.digits() {
            let i = match d {
                Dir::Left => 0,
                Dir::Right => 1,
            };
            match self.delta[s][i] {
                Some(t) => s = t,
                None => return false,
            }
        }
        self.accepting[s]
    }

    /// Accepted words of length at most `b`, in lexicographic order.
    pub fn enumerate(&self, b: usize) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(Position::root(), self.initial)];
        while let Some((w, s)) = stack.pop() {
            if self.accepting[s] {
                out.push(w.clone());
            }
            if w.len() < b {
                for (i, d) in [(1usize, Dir::Right), (0usize, Dir::Left)] {
                    if let Some(t) = self.delta[s][i] {
                        stack.push((w.child(d), t));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.lex_cmp(b));
        out
    }

    /// Membership agreement on every word of length at most `b`.
    pub fn agrees_up_to(&self, other: &Dfa, b: usize) -> bool {
        fn walk(x: &Dfa, y: &Dfa, w: &mut Position, b: usize) -> bool {
            if x.accepts(w) != y.accepts(w) {
                return false;
            }
            if w.len() == b {
                return true;
            }
            for d in [Dir::Left, Dir::Right] {
                let mut c = w.child(d);
                if !walk(x, y, &mut c, b) {
                    return false;
                }
            }
            true
        }
        walk(self, other, &mut Position::root(), b)
    }

    /// Number of accepted words: ω iff an accepting state is reachable from a
    /// cycle that is itself reachable from the start; otherwise exact DAG
    /// path counting.
    pub fn census(&self) -> Count {
        let n = self.len();
        // Forward reachability from the initial state.
        let mut fwd = vec![false; n];
        let mut stack = vec![self.initial];
        fwd[self.initial] = true;
        while let Some(s) = stack.pop() {
            for t in self.delta[s].iter().flatten() {
                if !fwd[*t] {
                    fwd[*t] = true;
                    stack.push(*t);
                }
            }
        }
        // Backward reachability from accepting states.
        let mut back = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&s| self.accepting[s]).collect();
        for &s in &stack {
            back[s] = true;
        }
        while let Some(s) = stack.pop() {
            for p in 0..n {
                if !back[p] && self.delta[p].iter().flatten().any(|&t| t == s) {
                    back[p] = true;
                    stack.push(p);
                }
            }
        }
        let live: Vec<bool> = (0..n).map(|s| fwd[s] && back[s]).collect();
        if !live[self.initial] && !(fwd[self.initial] && back[self.initial]) {
            // No accepting state reachable at all.
            if !live.iter().any(|&l| l) {
                return Count::Finite(0);
            }
        }
        if !live[self.initial] {
            return Count::Finite(0);
        }
        // Cycle detection on the live part.
        let mut removed: Vec<bool> = (0..n).map(|s| !live[s]).collect();
        loop {
            let mut progress = false;
            for s in 0..n {
                if !removed[s]
                    && self.delta[s]
                        .iter()
                        .flatten()
                        .all(|&t| removed[t] || !live[t])
                {
                    removed[s] = true;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        if live.iter().enumerate().any(|(s, &l)| l && !removed[s]) {
            return Count::Omega;
        }
        // Path counting over the live DAG, in topological order.
        let mut order: Vec<usize> = Vec::new();
        let mut indeg = vec![0usize; n];
        for s in 0..n {
            if live[s] {
                for &t in self.delta[s].iter().flatten() {
                    if live[t] {
                        indeg[t] += 1;
                    }
                }
            }
        }
        let mut queue: VecDeque<usize> =
            (0..n).filter(|&s| live[s] && indeg[s] == 0).collect();
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &t in self.delta[s].iter().flatten() {
                if live[t] {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut ways = vec![0u64; n];
        ways[self.initial] = 1;
        let mut total = 0u64;
        for &s in &order {
            if self.accepting[s] {
                total = total.saturating_add(ways[s]);
            }
            for &t in self.delta[s].iter().flatten() {
                if live[t] {
                    ways[t] = ways[t].saturating_add(ways[s]);
                }
            }
        }
        Count::Finite(total)
    }

    /// Length of the longest accepted word, when the language is finite.
    pub fn max_word_len(&self) -> Option<usize> {
        if self.census() == Count::Omega {
            return None;
        }
        // Longest path to an accepting state over the live DAG; the live part
        // is acyclic here so a simple memoized DFS suffices.
        fn longest(d: &Dfa, s: usize, memo: &mut BTreeMap<usize, Option<usize>>) -> Option<usize> {
            if let Some(&v) = memo.get(&s) {
                return v;
            }
            memo.insert(s, None); // cycle guard; unreachable on finite languages
            let mut best = if d.accepting[s] { Some(0) } else { None };
            for &t in d.delta[s].iter().flatten() {
                if let Some(l) = longest(d, t, memo) {
                    best = Some(best.map_or(l + 1, |b: usize| b.max(l + 1)));
                }
            }
            memo.insert(s, best);
            best
        }
        longest(self, self.initial, &mut BTreeMap::new()).or(Some(0))
    }
}

// ---------------------------------------------------------------------------
// Automaton JSON: {"states":[...], "initial":"s", "delta":{"s":["f","s1",...]}}

#[derive(Serialize, Deserialize)]
struct AutomatonJson {
    states: Vec<String>,
    initial: String,
    delta: BTreeMap<String, Vec<String>>,
}

impl Automaton {
    pub fn to_json(&self) -> serde_json::Value {
        let delta = self
            .states
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let step = &self.delta[i];
                let mut row = vec![step.sym.clone()];
                row.extend(step.args.iter().map(|&a| self.states[a].clone()));
                (name.clone(), row)
            })
            .collect();
        serde_json::to_value(AutomatonJson {
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            delta,
        })
        .expect("automaton serialization cannot fail")
    }

    /// Parses and validates the JSON schema; the signature is inferred from
    /// transition arities (quoted node constants retain their quote).
    pub fn from_json(v: &serde_json::Value) -> Result<Automaton, SystemError> {
        let j: AutomatonJson = serde_json::from_value(v.clone())
            .map_err(|e| SystemError::Json(e.to_string()))?;
        let index: BTreeMap<&str, usize> = j
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != j.states.len() {
            return Err(SystemError::Json("duplicate state name".into()));
        }
        let &initial = index
            .get(j.initial.as_str())
            .ok_or_else(|| SystemError::Json(format!("initial state `{}` not declared", j.initial)))?;
        let mut arities: BTreeMap<String, usize> = BTreeMap::new();
        let mut delta = vec![None; j.states.len()];
        for (state, row) in &j.delta {
            let &s = index
                .get(state.as_str())
                .ok_or_else(|| SystemError::Json(format!("transition for undeclared state `{state}`")))?;
            let sym = row
                .first()
                .ok_or_else(|| SystemError::Json(format!("empty transition row for `{state}`")))?
                .clone();
            let args: Vec<usize> = row[1..]
                .iter()
                .map(|a| {
                    index.get(a.as_str()).copied().ok_or_else(|| {
                        SystemError::Json(format!("undeclared successor `{a}` of `{state}`"))
                    })
                })
                .collect::<Result<_, _>>()?;
            if args.len() > 2 {
                return Err(SystemError::Json(format!("state `{state}` has arity above 2")));
            }
            if let Some(&prev) = arities.get(&sym) {
                if prev != args.len() {
                    return Err(SystemError::Json(format!(
                        "symbol `{sym}` used with arities {prev} and {}",
                        args.len()
                    )));
                }
            } else {
                arities.insert(sym.clone(), args.len());
            }
            delta[s] = Some(Step { sym, args });
        }
        let delta: Vec<Step> = delta
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    SystemError::Json(format!(
                        "transition map is not total: state `{}` has no row",
                        j.states[i]
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Automaton {
            sig: Signature::new(arities),
            states: j.states,
            initial,
            delta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    /// Five-state system emitting an alternation of f/g blocks.
    fn alternation() -> EquationSystem {
        let sig = Signature::new([("f", 2), ("g", 1), ("a", 0), ("b", 0)]);
        parse_system(
            "let s = f(ra, u); let u = f(w, s); let w = g(rb); let ra = a; let rb = b; root s;",
            &sig,
        )
        .unwrap()
    }

    /// The one-sided infinite word: t1 = a • t1.
    fn omega_word() -> EquationSystem {
        parse_system("let t1 = cat(ra, t1); let ra = a; root t1;", &word_sig())
    .unwrap()
    }

    /// The dense word: t2 = t2 • (a • t2).
    fn eta_word() -> EquationSystem {
        parse_system("let t2 = t2 cat (a cat t2); root t2;", &word_sig()).unwrap()
    }

    fn word_sig() -> Signature {
        Signature::arrangement(["a", "b"])
    }

    #[test]
    fn parse_system_and_automaton_shape() {
        let sys = alternation();
        assert_eq!(sys.unknowns().len(), 5);
        let aut = sys.to_automaton();
        assert_eq!(aut.state_name(aut.state_at(&p("2")).unwrap()), "u");
        assert_eq!(aut.state_at(&p("")), Some(aut.initial()));
        assert_eq!(aut.label_at(&p("21")), Some("g"));
        assert_eq!(aut.label_at(&p("211")), Some("b"));
        // Outside the domain: g is unary, so digit 2 under it is undefined.
        assert_eq!(aut.state_at(&p("22111")), None);
    }

    #[test]
    fn single_equation_system() {
        let sig = Signature::new([("a", 0)]);
        let sys = parse_system("let t = a; root t;", &sig).unwrap();
        assert_eq!(sys.to_automaton().len(), 1);
    }

    #[test]
    fn lowering_introduces_one_aux_per_nested_subterm() {
        // t1 = a • t1 lowers to two unknowns: t1 and the auxiliary for `a`.
        let sys = omega_word();
        assert_eq!(sys.unknowns().len(), 2);
        // Nested form via sugar also lowers: t2 = t2 • (a • t2) gives
        // t2, aux for (a cat t2), aux for a.
        let sys2 = eta_word();
        assert_eq!(sys2.unknowns().len(), 3);
    }

    #[test]
    fn alias_rhs_rejected() {
        let sig = word_sig();
        let e = parse_system("let x = cat(x, y); let y = x; root x;", &sig).unwrap_err();
        assert_eq!(e, SystemError::AliasRhs("y".into()));
    }

    #[test]
    fn print_parse_roundtrip() {
        for sys in [alternation(), omega_word(), eta_word()] {
            let printed = sys.to_string();
            let back = parse_system(&printed, sys.sig()).unwrap();
            assert_eq!(back, sys);
        }
    }

    #[test]
    fn eta_word_occurrence_languages() {
        // Domain (1∪22)*(ε∪2∪21); a-occurrences (1∪22)*21. Oracle DFAs are
        // hand-built: state 0 = spine, 1 = after digit 2, 2 = the letter.
        let spine = |acc: [bool; 3]| {
            Dfa::new(
                0,
                acc.to_vec(),
                vec![[Some(0), Some(1)], [Some(2), Some(0)], [None, None]],
            )
        };
        let domain_oracle = spine([true, true, true]);
        let a_oracle = spine([false, false, true]);
        let aut = eta_word().to_automaton();
        assert!(aut.domain_language().agrees_up_to(&domain_oracle, 8));
        assert!(aut.occurrences_language("a").agrees_up_to(&a_oracle, 8));
        // The cat occurrences are the remaining in-domain positions.
        let cat_oracle = spine([true, true, false]);
        assert!(aut.occurrences_language("cat").agrees_up_to(&cat_oracle, 8));
    }

    #[test]
    fn occurrence_languages_partition_the_domain() {
        for sys in [alternation(), omega_word(), eta_word()] {
            let aut = sys.to_automaton();
            let mut dfas: Vec<Dfa> = Vec::new();
            let mut syms: BTreeSet<String> = BTreeSet::new();
            for s in 0..aut.len() {
                syms.insert(aut.step(s).sym.clone());
            }
            for sym in &syms {
                dfas.push(aut.occurrences_language(sym));
            }
            for w in aut.domain_language().enumerate(8) {
                let hits = dfas.iter().filter(|d| d.accepts(&w)).count();
                assert_eq!(hits, 1, "position {w} should have exactly one label");
            }
        }
    }

    #[test]
    fn census_finite_and_omega() {
        let aut = omega_word().to_automaton();
        assert_eq!(aut.occurrences_language("a").census(), Count::Omega);
        assert_eq!(aut.occurrences_language("b").census(), Count::Finite(0));

        let sig = Signature::new([("f", 2), ("a", 0), ("b", 0)]);
        let fin = parse_system("let t = f(x, y); let x = a; let y = f(z, w); let z = a; let w = b; root t;", &sig)
            .unwrap()
            .to_automaton();
        assert_eq!(fin.occurrences_language("a").census(), Count::Finite(2));
        assert_eq!(fin.occurrences_language("b").census(), Count::Finite(1));
        assert_eq!(fin.domain_language().census(), Count::Finite(5));
        assert_eq!(fin.domain_language().max_word_len(), Some(2));
    }

    #[test]
    fn truncate_examples() {
        // All positions of length < L keep their labels; length-L positions
        // become the filler. Position 2 has length 1, so it survives at L=2.
        let aut = omega_word().to_automaton();
        assert_eq!(aut.truncate(2, "b").unwrap().to_string(), "cat(a,cat(b,b))");
        assert_eq!(aut.truncate(1, "b").unwrap().to_string(), "cat(b,b)");
        let eta = eta_word().to_automaton();
        assert_eq!(eta.truncate(1, "a").unwrap().to_string(), "cat(a,a)");
        assert_eq!(eta.truncate(0, "a").unwrap().to_string(), "a");
        // Truncation tower: truncating at L then L' ≤ L equals truncating at L'.
        let sig = eta.sig().clone();
        let t4 = eta.truncate(4, "a").unwrap();
        let sys4 = crate::system::parse_system(
            &format!("let r = {t4}; root r;"),
            &sig,
        );
        // The tower property is cheaper checked directly on terms:
        fn cut(t: &FiniteTerm, l: usize, filler: &str) -> FiniteTerm {
            if l == 0 {
                return FiniteTerm::leaf(filler);
            }
            FiniteTerm::new(
                t.sym().to_string(),
                t.children().iter().map(|c| cut(c, l - 1, filler)).collect(),
            )
        }
        assert_eq!(cut(&t4, 2, "a"), eta.truncate(2, "a").unwrap());
        drop(sys4);
    }

    #[test]
    fn truncate_below_height_is_identity() {
        let sig = Signature::new([("f", 2), ("a", 0), ("b", 0)]);
        let sys = parse_system("let t = f(x, y); let x = a; let y = b; root t;", &sig).unwrap();
        let aut = sys.to_automaton();
        assert_eq!(aut.truncate(5, "a").unwrap().to_string(), "f(a,b)");
        assert_eq!(aut.to_finite_term().unwrap().to_string(), "f(a,b)");
    }

    #[test]
    fn annotate_run_examples() {
        let sys = alternation();
        let ann = annotate_run(&sys);
        let aut = ann.to_automaton();
        assert_eq!(aut.label_at(&p("")), Some("f@s"));
        assert_eq!(aut.label_at(&p("2")), Some("f@u"));
        assert_eq!(aut.label_at(&p("21")), Some("g@w"));
        let single = parse_system("let t = a; root t;", &Signature::new([("a", 0)])).unwrap();
        assert_eq!(annotate_run(&single).to_automaton().label_at(&p("")), Some("a@t"));
        // On the dense word, every spine position carries the t2 state.
        let eta = annotate_run(&eta_word());
        let aut = eta.to_automaton();
        for w in ["", "1", "11", "22", "221", "111111"] {
            assert_eq!(aut.label_at(&p(w)), Some("cat@t2"));
        }
    }

    #[test]
    fn normalize_merges_bisimilar_states() {
        let sig = word_sig();
        // a^ω written with a two-step period.
        let unrolled = parse_system(
            "let u = cat(ra, v); let v = cat(ra2, u); let ra = a; let ra2 = a; root u;",
            &sig,
        )
        .unwrap();
        let direct = parse_system("let t = cat(ra, t); let ra = a; root t;", &sig).unwrap();
        assert!(unrolled.to_automaton().bisimilar(&direct.to_automaton()));
        assert_eq!(direct.to_automaton().normalize().len(), 2);
        // Different words are not bisimilar.
        let other = parse_system("let t = cat(rb, t); let rb = b; root t;", &sig).unwrap();
        assert!(!other.to_automaton().bisimilar(&direct.to_automaton()));
    }

    #[test]
    fn regenerated_system_is_bisimilar_after_pruning() {
        let sys = alternation();
        let aut = sys.to_automaton();
        let back = aut.to_system().to_automaton();
        assert!(aut.bisimilar(&back));
    }

    #[test]
    fn automaton_json_roundtrip() {
        let aut = alternation().to_automaton();
        let v = aut.to_json();
        let back = Automaton::from_json(&v).unwrap();
        assert!(aut.bisimilar(&back));
        assert_eq!(back.to_json(), v);
        // Validation: non-total delta is rejected.
        let bad = serde_json::json!({
            "states": ["x", "y"],
            "initial": "x",
            "delta": {"x": ["f", "y", "y"]}
        });
        assert!(matches!(Automaton::from_json(&bad), Err(SystemError::Json(_))));
    }
}
