//! Finite terms over binary signatures, with the ASCII surface syntax.
//!
//! Grammar (terms): `expr := primary [ "cat" expr ]` (infix `cat` is
//! right-associative sugar), `primary := name | name "(" expr {"," expr} ")"
//! | "(" expr ")"`. Canonical printing is always prefix form, so
//! parse→print→parse is the identity on terms.
//!
//! Reserved names for the forest algebra: `cat` (binary), `fg` (unary), `om`
//! (empty), `star` (anonymous node), and quoted node constants `'x`.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TermError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{sym}`: expected {expected} arguments, got {got}")]
    Arity { sym: String, expected: usize, got: usize },
}

/// A binary signature: every symbol has arity 0, 1 or 2.
///
/// With `quoted_nodes` set, any token of the shape `'name` is accepted as an
/// implicit nullary symbol (a node constant), without prior declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
    quoted_nodes: bool,
}

impl Signature {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, usize)>) -> Self {
        let arities = pairs
            .into_iter()
            .map(|(s, a)| {
                assert!(a <= 2, "arity above 2 is not supported");
                (s.into(), a)
            })
            .collect();
        Signature { arities, quoted_nodes: false }
    }

    pub fn with_quoted_nodes(mut self) -> Self {
        self.quoted_nodes = true;
        self
    }

    /// The forest-algebra signature: `cat`, `fg`, `om` plus quoted node
    /// constants.
    pub fn soa() -> Self {
        Signature::new([("cat", 2), ("fg", 1), ("om", 0)]).with_quoted_nodes()
    }

    /// The forest-algebra signature extended with the anonymous node `star`,
    /// as used by regular systems denoting forests up to isomorphism.
    pub fn soa_star() -> Self {
        Signature::new([("cat", 2), ("fg", 1), ("om", 0), ("star", 0)]).with_quoted_nodes()
    }

    /// Arrangement signature: binary `cat`, nullary `om`, and the given
    /// nullary letters.
    pub fn arrangement<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Self {
        let mut sig = Signature::new([("cat", 2), ("om", 0)]);
        for l in letters {
            sig.arities.insert(l.into(), 0);
        }
        sig
    }

    pub fn arity(&self, sym: &str) -> Option<usize> {
        if let Some(&a) = self.arities.get(sym) {
            return Some(a);
        }
        if self.quoted_nodes && sym.starts_with('\'') && sym.len() > 1 {
            return Some(0);
        }
        None
    }

    pub fn declared(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(s, &a)| (s.as_str(), a))
    }

    pub fn accepts_quoted(&self) -> bool {
        self.quoted_nodes
    }
}

/// A finite term: a symbol with child terms. Positions are Dewey words; the
/// domain is prefix-closed and a unary node's child sits at digit 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteTerm {
    sym: String,
    children: Vec<FiniteTerm>,
}

impl FiniteTerm {
    pub fn new(sym: impl Into<String>, children: Vec<FiniteTerm>) -> Self {
        assert!(children.len() <= 2);
        FiniteTerm { sym: sym.into(), children }
    }

    pub fn leaf(sym: impl Into<String>) -> Self {
        FiniteTerm::new(sym, Vec::new())
    }

    pub fn sym(&self) -> &str {
        &self.sym
    }

    pub fn children(&self) -> &[FiniteTerm] {
        &self.children
    }

    pub fn subterm_at(&self, p: &crate::Position) -> Option<&FiniteTerm> {
        let mut cur = self;
        for d in p.digits() {
            let idx = match d {
                crate::Dir::Left => 0,
                crate::Dir::Right => 1,
            };
            cur = cur.children.get(idx)?;
        }
        Some(cur)
    }

    pub fn label_at(&self, p: &crate::Position) -> Option<&str> {
        self.subterm_at(p).map(|t| t.sym())
    }

    /// All positions with their labels, in preorder (lexicographic order).
    pub fn positions(&self) -> Vec<(crate::Position, &str)> {
        let mut out = Vec::new();
        let mut stack = vec![(crate::Position::root(), self)];
        while let Some((p, t)) = stack.pop() {
            out.push((p.clone(), t.sym()));
            for (i, c) in t.children.iter().enumerate().rev() {
                let d = if i == 0 { crate::Dir::Left } else { crate::Dir::Right };
                stack.push((p.child(d), c));
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(FiniteTerm::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(FiniteTerm::height).max().map_or(0, |h| h + 1)
    }

    pub fn validate(&self, sig: &Signature) -> Result<(), TermError> {
        let expected = sig
            .arity(&self.sym)
            .ok_or_else(|| TermError::UnknownSymbol(self.sym.clone()))?;
        if expected != self.children.len() {
            return Err(TermError::Arity {
                sym: self.sym.clone(),
                expected,
                got: self.children.len(),
            });
        }
        self.children.iter().try_for_each(|c| c.validate(sig))
    }
}

impl fmt::Display for FiniteTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sym)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                fmt::Display::fmt(c, f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FiniteTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Lexer, shared by the term and system parsers.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Semi,
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char, first: bool) -> bool {
    if c.is_ascii_alphabetic() || matches!(c, '_' | '\'' | '*' | '@' | '.' | '~' | '#') {
        return true;
    }
    c.is_ascii_digit() && !first
}

pub(crate) fn lex(text: &str) -> Result<Vec<Spanned>, TermError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            '(' | ')' | ',' | '=' | ';' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '=' => Tok::Eq,
                    _ => Tok::Semi,
                };
                out.push(Spanned { tok, line: l, col: co });
            }
            c if ident_char(c, true) => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if ident_char(c2, false) {
                        s.push(c2);
                        chars.next();
                        bump(c2, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: l, col: co });
            }
            other => {
                return Err(TermError::Syntax {
                    line: l,
                    col: co,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Term parser.

pub(crate) struct Cursor {
    toks: Vec<Spanned>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<Spanned>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    pub(crate) fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.at.min(self.toks.len().saturating_sub(1)))
            .map_or((1, 1), |s| (s.line, s.col))
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> TermError {
        let (line, col) = if self.toks.is_empty() {
            (1, 1)
        } else {
            self.here()
        };
        TermError::Syntax { line, col, msg: msg.into() }
    }

    pub(crate) fn expect(&mut self, want: Tok, what: &str) -> Result<(), TermError> {
        match self.next() {
            Some(s) if s.tok == want => Ok(()),
            Some(s) => Err(TermError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected {what}"),
            }),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }
}

fn parse_expr(cur: &mut Cursor, sig: &Signature) -> Result<FiniteTerm, TermError> {
    let lhs = parse_primary(cur, sig)?;
    if let Some(Tok::Ident(id)) = cur.peek() {
        if id == "cat" {
            // Infix `cat`, right-associative; only when `cat` is binary here.
            if sig.arity("cat") == Some(2) {
                cur.next();
                let rhs = parse_expr(cur, sig)?;
                return Ok(FiniteTerm::new("cat", vec![lhs, rhs]));
            }
        }
    }
    Ok(lhs)
}

fn parse_primary(cur: &mut Cursor, sig: &Signature) -> Result<FiniteTerm, TermError> {
    match cur.next() {
        Some(Spanned { tok: Tok::LParen, .. }) => {
            let inner = parse_expr(cur, sig)?;
            cur.expect(Tok::RParen, "`)`")?;
            Ok(inner)
        }
        Some(Spanned { tok: Tok::Ident(name), line, col }) => {
            let mut args = Vec::new();
            if cur.peek() == Some(&Tok::LParen) {
                cur.next();
                loop {
                    args.push(parse_expr(cur, sig)?);
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
            }
            let expected = sig
                .arity(&name)
                .ok_or_else(|| TermError::UnknownSymbol(name.clone()))?;
            if expected != args.len() {
                return Err(TermError::Arity { sym: name, expected, got: args.len() });
            }
            Ok(FiniteTerm::new(name, args))
        }
        Some(s) => Err(TermError::Syntax {
            line: s.line,
            col: s.col,
            msg: "expected a term".into(),
        }),
        None => Err(cur.err("expected a term, found end of input")),
    }
}

/// Parses a term from the surface syntax and validates it against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<FiniteTerm, TermError> {
    let mut cur = Cursor::new(lex(text)?);
    let t = parse_expr(&mut cur, sig)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input after term"));
    }
    Ok(t)
}

/// Canonical prefix printing; inverse of [`parse_term`].
pub fn print_term(t: &FiniteTerm) -> String {
    t.to_string()
}
