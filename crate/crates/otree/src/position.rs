//! Dewey positions: finite words over {1,2} addressing nodes of binary terms.
//!
//! Two linear orders matter on positions. The lexicographic order `lex_cmp`
//! puts a prefix before its extensions; the inorder `in_cmp` is the
//! left-root-right linearization. Both are total on any set of positions.

use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// One branch direction at a binary node; prints as `1` (left) or `2` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
}

impl Dir {
    fn bit(self) -> u64 {
        match self {
            Dir::Left => 0,
            Dir::Right => 1,
        }
    }
}

/// A position: a finite word over {1,2}. The empty word is the root.
///
/// Digits are bit-packed, 64 per chunk (0 = left, 1 = right); unused high
/// bits of the last chunk are kept zero so derived `Eq`/`Hash` are sound.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Position {
    len: u32,
    chunks: SmallVec<[u64; 2]>,
}

impl Position {
    pub fn root() -> Self {
        Position::default()
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    /// Digit at index `i` (0-based from the root end). Panics if out of range.
    pub fn digit(&self, i: usize) -> Dir {
        assert!(i < self.len(), "digit index {i} out of range");
        if (self.chunks[i / 64] >> (i % 64)) & 1 == 0 {
            Dir::Left
        } else {
            Dir::Right
        }
    }

    pub fn digits(&self) -> impl Iterator<Item = Dir> + '_ {
        (0..self.len()).map(move |i| self.digit(i))
    }

    pub fn push(&mut self, d: Dir) {
        let i = self.len();
        if i % 64 == 0 {
            self.chunks.push(0);
        }
        self.chunks[i / 64] |= d.bit() << (i % 64);
        self.len += 1;
    }

    pub fn child(&self, d: Dir) -> Position {
        let mut p = self.clone();
        p.push(d);
        p
    }

    pub fn parent(&self) -> Option<Position> {
        if self.is_root() {
            return None;
        }
        let mut p = self.clone();
        let i = p.len() - 1;
        p.chunks[i / 64] &= !(1u64 << (i % 64));
        if i % 64 == 0 {
            p.chunks.pop();
        }
        p.len -= 1;
        Some(p)
    }

    pub fn last(&self) -> Option<Dir> {
        if self.is_root() {
            None
        } else {
            Some(self.digit(self.len() - 1))
        }
    }

    /// Strict ancestors first: root, then each proper prefix, excluding self.
    pub fn proper_prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.len()).map(move |k| self.prefix(k))
    }

    /// The prefix of length `k`. Panics if `k` exceeds the length.
    pub fn prefix(&self, k: usize) -> Position {
        assert!(k <= self.len());
        let mut p = Position::root();
        for i in 0..k {
            p.push(self.digit(i));
        }
        p
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        self.len() <= other.len() && (0..self.len()).all(|i| self.digit(i) == other.digit(i))
    }

    /// Longest common prefix; the join of the two tree nodes.
    pub fn lcp(&self, other: &Position) -> Position {
        let mut p = Position::root();
        let n = self.len().min(other.len());
        for i in 0..n {
            if self.digit(i) != other.digit(i) {
                break;
            }
            p.push(self.digit(i));
        }
        p
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut p = self.clone();
        for d in other.digits() {
            p.push(d);
        }
        p
    }

    /// Lexicographic order: a proper prefix precedes its extensions, and at
    /// the first differing digit `1 < 2`.
    pub fn lex_cmp(&self, other: &Position) -> Ordering {
        let n = self.len().min(other.len());
        for i in 0..n {
            match (self.digit(i), other.digit(i)) {
                (Dir::Left, Dir::Right) => return Ordering::Less,
                (Dir::Right, Dir::Left) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len().cmp(&other.len())
    }

    /// Inorder: x precedes y iff x is in y's left subtree, or y is in x's
    /// right subtree, or they diverge left/right at their common prefix.
    pub fn in_cmp(&self, other: &Position) -> Ordering {
        let n = self.len().min(other.len());
        for i in 0..n {
            match (self.digit(i), other.digit(i)) {
                (Dir::Left, Dir::Right) => return Ordering::Less,
                (Dir::Right, Dir::Left) => return Ordering::Greater,
                _ => {}
            }
        }
        // One is a prefix of the other (or they are equal).
        match self.len().cmp(&other.len()) {
            Ordering::Equal => Ordering::Equal,
            Ordering::Less => {
                // self is a proper prefix: other = self·d·...
                if other.digit(n) == Dir::Left {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            Ordering::Greater => {
                if self.digit(n) == Dir::Left {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    /// Ancestor order of tree nodes: descendants are below, so `self <= other`
    /// iff `other` is a prefix of `self`.
    pub fn is_below(&self, other: &Position) -> bool {
        other.is_prefix_of(self)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            f.write_str(match d {
                Dir::Left => "1",
                Dir::Right => "2",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("ε")
        } else {
            fmt::Display::fmt(self, f)
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid position digit `{0}` (expected 1 or 2)")]
pub struct PositionParseError(pub char);

impl FromStr for Position {
    type Err = PositionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Position::root();
        for c in s.chars() {
            match c {
                '1' => p.push(Dir::Left),
                '2' => p.push(Dir::Right),
                other => return Err(PositionParseError(other)),
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Position {
        s.parse().unwrap()
    }

    /// All words over {1,2} of length at most `n`, for exhaustive checks.
    fn words_up_to(n: usize) -> Vec<Position> {
        let mut out = vec![Position::root()];
        let mut frontier = vec![Position::root()];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &frontier {
                for d in [Dir::Left, Dir::Right] {
                    let c = w.child(d);
                    out.push(c.clone());
                    next.push(c);
                }
            }
            frontier = next;
        }
        out
    }

    #[test]
    fn push_parent_roundtrip_across_chunk_boundary() {
        let mut q = Position::root();
        for i in 0..130 {
            q.push(if i % 3 == 0 { Dir::Right } else { Dir::Left });
        }
        assert_eq!(q.len(), 130);
        let mut r = q.clone();
        for _ in 0..130 {
            r = r.parent().unwrap();
        }
        assert!(r.is_root());
        assert_eq!(q.to_string().parse::<Position>().unwrap(), q);
    }

    #[test]
    fn lex_examples() {
        // 1 < 21 < 221 is the published ordering of the periodic word's letters.
        assert_eq!(p("1").lex_cmp(&p("21")), Ordering::Less);
        assert_eq!(p("21").lex_cmp(&p("221")), Ordering::Less);
        assert_eq!(p("1").lex_cmp(&p("1")), Ordering::Equal);
        // A prefix is lex-smaller than its extension.
        assert_eq!(p("12").lex_cmp(&p("1")), Ordering::Greater);
    }

    #[test]
    fn in_examples() {
        assert_eq!(p("1").in_cmp(&p("")), Ordering::Less);
        assert_eq!(p("").in_cmp(&p("2")), Ordering::Less);
        assert_eq!(p("11").in_cmp(&p("12")), Ordering::Less);
        assert_eq!(p("2").in_cmp(&p("1")), Ordering::Greater);
    }

    #[test]
    fn both_orders_are_strict_total_orders_on_short_words() {
        let ws = words_up_to(4);
        for cmp in [Position::lex_cmp, Position::in_cmp] {
            for a in &ws {
                for b in &ws {
                    // Antisymmetry + trichotomy.
                    assert_eq!(cmp(a, b), cmp(b, a).reverse());
                    assert_eq!(cmp(a, b) == Ordering::Equal, a == b);
                    // Transitivity.
                    for c in &ws {
                        if cmp(a, b) == Ordering::Less && cmp(b, c) == Ordering::Less {
                            assert_eq!(cmp(a, c), Ordering::Less);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lcp_is_the_join() {
        assert_eq!(p("1211").lcp(&p("122")), p("12"));
        assert_eq!(p("11").lcp(&p("221")), Position::root());
        assert_eq!(p("12").lcp(&p("12")), p("12"));
        assert!(p("1211").is_below(&p("12")));
        assert!(!p("12").is_below(&p("1211")));
    }
}
