//! Reduced words in the free group `F_m` and Stallings graphs for subgroup membership.
//!
//! Generators are indexed `1..=m`; the inverse of generator `i` is `-i`. In text form
//! generator `i` is the `i`-th lowercase letter and its inverse the matching capital,
//! so `"abA"` is `a b a^-1`. The identity is the empty string.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Letter = i8;

pub const MAX_RANK: usize = 26;

/// A freely reduced word.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(SmallVec<[Letter; 16]>);

impl Word {
    pub fn identity() -> Self {
        Word(SmallVec::new())
    }

    /// Reduces `raw` after checking every letter against the rank `m`.
    pub fn from_letters(raw: &[i32], rank: usize) -> Result<Self> {
        let mut w = Word::identity();
        for &x in raw {
            if x == 0 || x.unsigned_abs() as usize > rank || rank > MAX_RANK {
                return Err(Error::LetterOutOfRange { index: x, rank });
            }
            w.push_reduce(x as Letter);
        }
        Ok(w)
    }

    /// Single generator (or inverse) as a word.
    pub fn letter(x: Letter) -> Self {
        debug_assert!(x != 0);
        let mut w = Word::identity();
        w.0.push(x);
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Largest generator index used.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Appends one letter, cancelling against the last letter when possible.
    pub fn push_reduce(&mut self, x: Letter) {
        if self.0.last() == Some(&-x) {
            self.0.pop();
        } else {
            self.0.push(x);
        }
    }

    /// Drops the last letter, returning it.
    pub fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let a = &self.0;
        let b = &other.0;
        let mut k = 0;
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
            k += 1;
        }
        let mut out: SmallVec<[Letter; 16]> = SmallVec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Length of the longest common prefix with `other`.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(x, y)| x == y).count()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(SmallVec::from_slice(&self.0[..len]))
    }

    /// Sum of exponents of generator `g` (1-based).
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.0
            .iter()
            .map(|&x| {
                if x.unsigned_abs() as usize == g {
                    x.signum() as i64
                } else {
                    0
                }
            })
            .sum()
    }
}

pub fn letter_char(x: Letter) -> char {
    let base = if x > 0 { b'a' } else { b'A' };
    (base + (x.unsigned_abs() - 1)) as char
}

pub fn char_letter(c: char) -> Option<Letter> {
    match c {
        'a'..='z' => Some((c as u8 - b'a' + 1) as Letter),
        'A'..='Z' => Some(-((c as u8 - b'A' + 1) as Letter)),
        _ => None,
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &x in self.0.iter() {
            write!(f, "{}", letter_char(x))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "Word(ε)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses a word over `a..z`/`A..Z`, reducing it. `""` and `"1"` denote the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut w = Word::identity();
        if s == "1" {
            return Ok(w);
        }
        for c in s.chars() {
            let x = char_letter(c)
                .ok_or_else(|| Error::Parse(format!("invalid letter {c:?} in word {s:?}")))?;
            w.push_reduce(x);
        }
        Ok(w)
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn reduce(raw: &[i32], rank: usize) -> Result<Word> {
    Word::from_letters(raw, rank)
}

pub fn multiply(u: &Word, v: &Word) -> Word {
    u.mul(v)
}

pub fn invert(u: &Word) -> Word {
    u.inverse()
}

/// Splits `w` as `conjugator * core * conjugator^-1` with `core` cyclically reduced.
///
/// `core.len()` is the translation length of `w` acting on the Cayley tree.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let l = w.letters();
    let mut k = 0;
    while 2 * k + 1 < l.len() && l[k] == -l[l.len() - 1 - k] {
        k += 1;
    }
    (
        Word(SmallVec::from_slice(&l[..k])),
        Word(SmallVec::from_slice(&l[k..l.len() - k])),
    )
}

pub fn translation_length(w: &Word) -> usize {
    cyclic_reduce(w).1.len()
}

/// Whether two non-identity elements share an axis in the tree, i.e. commute.
pub fn same_axis(f: &Word, g: &Word) -> Result<bool> {
    if f.is_identity() || g.is_identity() {
        return Err(Error::IdentityElement);
    }
    Ok(commutator(f, g).is_identity())
}

pub fn commutator(f: &Word, g: &Word) -> Word {
    f.mul(g).mul(&f.inverse()).mul(&g.inverse())
}

/// Folded labelled graph whose closed paths at `base` spell exactly the subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StallingsGraph {
    /// `edges[s]` maps a signed label to the target state; inverse edges are stored too.
    edges: Vec<HashMap<Letter, usize>>,
    base: usize,
}

impl StallingsGraph {
    pub fn base(&self) -> usize {
        self.base
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges
            .iter()
            .map(|m| m.keys().filter(|&&g| g > 0).count())
            .sum()
    }

    pub fn target(&self, state: usize, label: Letter) -> Option<usize> {
        self.edges[state].get(&label).copied()
    }

    /// Rank of the subgroup: `E - V + 1` of the folded graph.
    pub fn rank(&self) -> usize {
        (self.num_edges() + 1).saturating_sub(self.num_states())
    }

    /// Reads `w` from the base state; `None` if the path leaves the graph.
    pub fn read(&self, w: &Word) -> Option<usize> {
        let mut s = self.base;
        for &x in w.letters() {
            s = self.target(s, x)?;
        }
        Some(s)
    }

    pub fn accepts(&self, w: &Word) -> bool {
        self.read(w) == Some(self.base)
    }

    /// A free basis read off a spanning tree: one element per non-tree edge.
    pub fn free_basis(&self) -> Vec<Word> {
        let n = self.num_states();
        let mut path: Vec<Option<Word>> = vec![None; n];
        let mut tree_edge = vec![None; n];
        path[self.base] = Some(Word::identity());
        let mut queue = VecDeque::from([self.base]);
        while let Some(s) = queue.pop_front() {
            let mut labels: Vec<_> = self.edges[s].iter().map(|(&g, &t)| (g, t)).collect();
            labels.sort_unstable();
            for (g, t) in labels {
                if path[t].is_none() {
                    let mut w = path[s].clone().unwrap();
                    w.push_reduce(g);
                    path[t] = Some(w);
                    tree_edge[t] = Some((s, g));
                    queue.push_back(t);
                }
            }
        }
        let mut basis = Vec::new();
        for s in 0..n {
            let Some(ps) = &path[s] else { continue };
            let mut labels: Vec<_> = self.edges[s].iter().map(|(&g, &t)| (g, t)).collect();
            labels.sort_unstable();
            for (g, t) in labels {
                if g < 0 || tree_edge[t] == Some((s, g)) || tree_edge[s] == Some((t, -g)) {
                    continue;
                }
                let pt = path[t].as_ref().unwrap();
                basis.push(ps.mul(&Word::letter(g)).mul(&pt.inverse()));
            }
        }
        basis.sort();
        basis
    }
}

/// Builds the Stallings graph of `<generators>` by identifying edges to a fixpoint.
pub fn fold(generators: &[Word]) -> StallingsGraph {
    let mut b = FoldBuilder::new();
    for g in generators {
        b.add_loop(g);
    }
    b.finish()
}

pub fn member(graph: &StallingsGraph, w: &Word) -> bool {
    graph.accepts(w)
}

struct FoldBuilder {
    parent: Vec<usize>,
    adj: Vec<Vec<(Letter, usize)>>,
}

impl FoldBuilder {
    fn new() -> Self {
        FoldBuilder { parent: vec![0], adj: vec![Vec::new()] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn new_state(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.adj.push(Vec::new());
        self.parent.len() - 1
    }

    fn add_edge(&mut self, u: usize, g: Letter, v: usize) {
        self.adj[u].push((g, v));
        self.adj[v].push((-g, u));
    }

    fn add_loop(&mut self, w: &Word) {
        let l = w.letters();
        if l.is_empty() {
            return;
        }
        let mut cur = 0;
        for (i, &x) in l.iter().enumerate() {
            let next = if i + 1 == l.len() { 0 } else { self.new_state() };
            self.add_edge(cur, x, next);
            cur = next;
        }
    }

    fn finish(mut self) -> StallingsGraph {
        let mut work: Vec<usize> = (0..self.parent.len()).rev().collect();
        while let Some(s) = work.pop() {
            let s = self.find(s);
            let edges = std::mem::take(&mut self.adj[s]);
            let mut kept: Vec<(Letter, usize)> = Vec::with_capacity(edges.len());
            let mut merges = Vec::new();
            for (g, t) in edges {
                let t = self.find(t);
                match kept.iter().find(|(h, _)| *h == g) {
                    Some(&(_, t0)) if t0 != t => merges.push((t0, t)),
                    Some(_) => {}
                    None => kept.push((g, t)),
                }
            }
            self.adj[s] = kept;
            if merges.is_empty() {
                continue;
            }
            for (a, b) in merges {
                let (a, b) = (self.find(a), self.find(b));
                if a == b {
                    continue;
                }
                let (keep, gone) = if a < b { (a, b) } else { (b, a) };
                self.parent[gone] = keep;
                let moved = std::mem::take(&mut self.adj[gone]);
                self.adj[keep].extend(moved);
                work.push(keep);
            }
            work.push(self.find(s));
        }

        let root = self.find(0);
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![root];
        ids.insert(root, 0);
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            let mut targets: Vec<usize> = self.adj[s].iter().map(|&(_, t)| t).collect();
            for t in targets.iter_mut() {
                *t = self.find(*t);
            }
            for t in targets {
                if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(t) {
                    e.insert(order.len());
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut edges = vec![HashMap::new(); order.len()];
        for (new_id, &s) in order.iter().enumerate() {
            let adj = self.adj[s].clone();
            for (g, t) in adj {
                let t = ids[&self.find(t)];
                let prev = edges[new_id].insert(g, t);
                debug_assert!(prev.is_none() || prev == Some(t), "graph not folded");
            }
        }
        StallingsGraph { edges, base: 0 }
    }
}
