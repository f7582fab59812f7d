//! Metric geometry of the regular `2m`-valent tree: the Cayley graph of `F_m` with unit edges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::freegroup::{char_letter, letter_char, Letter, Word};
use crate::rational::{fmt_q, parse_q, unit_interval_contains, Q};

/// A point of the tree: a vertex, or an interior point of an edge.
///
/// Interior points are recorded from the parent endpoint (the shorter word), so
/// `base * dir` always extends `base` and `offset` lies strictly between 0 and 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePoint {
    base: Word,
    dir: Option<Letter>,
    offset: Q,
}

impl TreePoint {
    pub fn vertex(w: Word) -> Self {
        TreePoint { base: w, dir: None, offset: Q::zero() }
    }

    pub fn root() -> Self {
        TreePoint::vertex(Word::identity())
    }

    /// The point at distance `offset` from vertex `from` toward `from * toward`.
    pub fn on_edge(from: &Word, toward: Letter, offset: Q) -> Result<Self> {
        if !unit_interval_contains(&offset) {
            return Err(Error::OutOfRange(format!("edge offset {} not in [0,1]", fmt_q(&offset))));
        }
        if toward == 0 {
            return Err(Error::Parse("zero generator".into()));
        }
        if offset.is_zero() {
            return Ok(TreePoint::vertex(from.clone()));
        }
        let mut far = from.clone();
        far.push_reduce(toward);
        if offset.is_one() {
            return Ok(TreePoint::vertex(far));
        }
        if far.len() > from.len() {
            Ok(TreePoint { base: from.clone(), dir: Some(toward), offset })
        } else {
            Ok(TreePoint { base: far, dir: Some(-toward), offset: Q::one() - offset })
        }
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    pub fn dir(&self) -> Option<Letter> {
        self.dir
    }

    pub fn offset(&self) -> &Q {
        &self.offset
    }

    pub fn is_vertex(&self) -> bool {
        self.dir.is_none()
    }

    /// The far (child) endpoint of the edge carrying an interior point.
    pub fn child(&self) -> Option<Word> {
        self.dir.map(|g| {
            let mut w = self.base.clone();
            w.push_reduce(g);
            w
        })
    }

    /// Endpoints of the carrying edge with distances from the point; one entry for a vertex.
    fn anchors(&self) -> Vec<(Word, Q)> {
        match self.child() {
            None => vec![(self.base.clone(), Q::zero())],
            Some(c) => vec![(self.base.clone(), self.offset), (c, Q::one() - self.offset)],
        }
    }

    /// Left translation by a group element; offsets are preserved.
    pub fn translate(&self, g: &Word) -> TreePoint {
        match self.dir {
            None => TreePoint::vertex(g.mul(&self.base)),
            Some(d) => {
                let from = g.mul(&self.base);
                TreePoint::on_edge(&from, d, self.offset).expect("offset already validated")
            }
        }
    }

    /// Distance from the root vertex.
    pub fn depth(&self) -> Q {
        match self.dir {
            None => Q::from_integer(self.base.len() as i128),
            Some(_) => Q::from_integer(self.base.len() as i128) + self.offset,
        }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dir {
            None => write!(f, "{}", self.base),
            Some(g) => write!(f, "{}+{}@{}", self.base, letter_char(g), fmt_q(&self.offset)),
        }
    }
}

impl fmt::Debug for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreePoint({self})")
    }
}

impl FromStr for TreePoint {
    type Err = Error;

    /// Parses `"word"` or `"word+g@p/q"`; non-canonical edge descriptions are normalized.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('+') {
            None => Ok(TreePoint::vertex(s.parse()?)),
            Some((w, rest)) => {
                let (g, off) = rest
                    .split_once('@')
                    .ok_or_else(|| Error::Parse(format!("missing '@' in tree point {s:?}")))?;
                let mut chars = g.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(Error::Parse(format!("bad generator in tree point {s:?}")));
                };
                let g = char_letter(c)
                    .ok_or_else(|| Error::Parse(format!("bad generator in tree point {s:?}")))?;
                TreePoint::on_edge(&w.parse()?, g, parse_q(off)?)
            }
        }
    }
}

impl serde::Serialize for TreePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for TreePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn vertex_distance(u: &Word, v: &Word) -> usize {
    u.len() + v.len() - 2 * u.common_prefix_len(v)
}

fn same_edge(p: &TreePoint, q: &TreePoint) -> bool {
    p.dir.is_some() && p.dir == q.dir && p.base == q.base
}

pub fn tree_distance(p: &TreePoint, q: &TreePoint) -> Q {
    if same_edge(p, q) {
        return (p.offset - q.offset).abs();
    }
    let mut best: Option<Q> = None;
    for (a, da) in p.anchors() {
        for (b, db) in q.anchors() {
            let d = da + db + Q::from_integer(vertex_distance(&a, &b) as i128);
            if best.is_none_or(|x| d < x) {
                best = Some(d);
            }
        }
    }
    best.unwrap()
}

/// Vertices on the tree path from `u` to `v`, both included.
pub fn vertex_path(u: &Word, v: &Word) -> Vec<Word> {
    let k = u.common_prefix_len(v);
    let mut out = Vec::with_capacity(u.len() + v.len() - 2 * k + 1);
    let mut w = u.clone();
    out.push(w.clone());
    while w.len() > k {
        w.pop();
        out.push(w.clone());
    }
    for &x in &v.letters()[k..] {
        w.push_reduce(x);
        out.push(w.clone());
    }
    out
}

/// The unique arc between two tree points, prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct TreeArc {
    start: TreePoint,
    end: TreePoint,
    /// Vertices strictly passed through, in order, with their distance from `start`.
    waypoints: Vec<(Word, Q)>,
    length: Q,
}

impl TreeArc {
    pub fn new(p: &TreePoint, q: &TreePoint) -> Self {
        if p == q || same_edge(p, q) {
            return TreeArc {
                start: p.clone(),
                end: q.clone(),
                waypoints: Vec::new(),
                length: tree_distance(p, q),
            };
        }
        let mut best: Option<(Q, Word, Q, Word)> = None;
        for (a, da) in p.anchors() {
            for (b, db) in q.anchors() {
                let d = da + db + Q::from_integer(vertex_distance(&a, &b) as i128);
                if best.as_ref().is_none_or(|x| d < x.0) {
                    best = Some((d, a.clone(), da, b.clone()));
                }
            }
        }
        let (length, a, da, b) = best.unwrap();
        let mut waypoints = Vec::new();
        let mut t = da;
        for w in vertex_path(&a, &b) {
            waypoints.push((w, t));
            t += Q::one();
        }
        TreeArc { start: p.clone(), end: q.clone(), waypoints, length }
    }

    pub fn length(&self) -> &Q {
        &self.length
    }

    pub fn waypoints(&self) -> &[(Word, Q)] {
        &self.waypoints
    }

    /// The point at arc length `t` from the start, `0 <= t <= length`.
    pub fn point_at(&self, t: &Q) -> TreePoint {
        if t.is_zero() {
            return self.start.clone();
        }
        if *t == self.length {
            return self.end.clone();
        }
        if self.waypoints.is_empty() {
            // both points on one edge (or coincident)
            let (Some(dir), base) = (self.start.dir.or(self.end.dir), self.start.base.clone())
            else {
                return self.start.clone();
            };
            let (o1, o2) = (self.start.offset, self.end.offset);
            let off = if o2 >= o1 { o1 + t } else { o1 - t };
            let parent = if self.start.dir.is_some() { base } else { self.end.base.clone() };
            return TreePoint::on_edge(&parent, dir, off).unwrap();
        }
        let idx = self.waypoints.partition_point(|(_, s)| s <= t);
        if idx == 0 {
            let (w0, d0) = &self.waypoints[0];
            return point_between(&self.start, w0, &(*d0 - t));
        }
        let (w, s) = &self.waypoints[idx - 1];
        if s == t {
            return TreePoint::vertex(w.clone());
        }
        let tau = *t - s;
        if idx < self.waypoints.len() {
            let next = &self.waypoints[idx].0;
            step_toward(w, next, tau)
        } else {
            // beyond the last waypoint, on the edge carrying `end`
            point_from_vertex_toward(w, &self.end, tau)
        }
    }
}

/// Point at distance `tau` from vertex `from` toward the adjacent vertex `to`.
fn step_toward(from: &Word, to: &Word, tau: Q) -> TreePoint {
    if to.len() > from.len() {
        TreePoint::on_edge(from, to.last().unwrap(), tau).unwrap()
    } else {
        TreePoint::on_edge(from, -from.last().unwrap(), tau).unwrap()
    }
}

/// Point at distance `tau` from vertex `from` toward `target`, which lies on an edge at `from`.
fn point_from_vertex_toward(from: &Word, target: &TreePoint, tau: Q) -> TreePoint {
    let child = target.child().expect("interior target");
    if *from == target.base {
        TreePoint::on_edge(from, target.dir.unwrap(), tau).unwrap()
    } else {
        debug_assert_eq!(*from, child);
        TreePoint::on_edge(&target.base, target.dir.unwrap(), Q::one() - tau).unwrap()
    }
}

/// Point at distance `remaining` before reaching vertex `to`, coming from interior point `start`.
fn point_between(start: &TreePoint, to: &Word, remaining: &Q) -> TreePoint {
    point_from_vertex_toward(to, start, *remaining)
}

pub fn tree_geodesic_eval(p: &TreePoint, q: &TreePoint, s: &Q) -> Result<TreePoint> {
    if !unit_interval_contains(s) {
        return Err(Error::OutOfRange(format!("geodesic parameter {} not in [0,1]", fmt_q(s))));
    }
    let arc = TreeArc::new(p, q);
    let t = *arc.length() * s;
    Ok(arc.point_at(&t))
}

/// Finite subtree: vertices plus, per edge `(parent, letter)`, the covered offset interval.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeHull {
    pub vertices: BTreeSet<Word>,
    pub edges: BTreeMap<(Word, Letter), (Q, Q)>,
}

impl TreeHull {
    pub fn contains(&self, p: &TreePoint) -> bool {
        match p.dir {
            None => self.vertices.contains(&p.base),
            Some(d) => self
                .edges
                .get(&(p.base.clone(), d))
                .is_some_and(|(lo, hi)| *lo <= p.offset && p.offset <= *hi),
        }
    }

    pub fn full_edges(&self) -> impl Iterator<Item = &(Word, Letter)> {
        self.edges
            .iter()
            .filter(|(_, (lo, hi))| lo.is_zero() && hi.is_one())
            .map(|(k, _)| k)
    }

    /// Total length of the subtree.
    pub fn length(&self) -> Q {
        self.edges.values().fold(Q::zero(), |acc, (lo, hi)| acc + (hi - lo))
    }

    fn cover(&mut self, parent: &Word, dir: Letter, a: Q, b: Q) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo.is_zero() {
            self.vertices.insert(parent.clone());
        }
        if hi.is_one() {
            let mut c = parent.clone();
            c.push_reduce(dir);
            self.vertices.insert(c);
        }
        self.edges
            .entry((parent.clone(), dir))
            .and_modify(|(l, h)| {
                if lo < *l {
                    *l = lo;
                }
                if hi > *h {
                    *h = hi;
                }
            })
            .or_insert((lo, hi));
    }

    fn cover_arc(&mut self, arc: &TreeArc) {
        // consecutive breakpoints: start, waypoints..., end
        let mut pts: Vec<TreePoint> = vec![arc.start.clone()];
        pts.extend(arc.waypoints.iter().map(|(w, _)| TreePoint::vertex(w.clone())));
        pts.push(arc.end.clone());
        if pts.len() == 2 && pts[0] == pts[1] {
            if !pts[0].is_vertex() {
                self.cover(&pts[0].base, pts[0].dir.unwrap(), pts[0].offset, pts[0].offset);
            } else {
                self.vertices.insert(pts[0].base.clone());
            }
            return;
        }
        for pair in pts.windows(2) {
            let (x, y) = (&pair[0], &pair[1]);
            if x == y {
                if x.is_vertex() {
                    self.vertices.insert(x.base.clone());
                }
                continue;
            }
            let (parent, dir, ox, oy) = edge_coords(x, y);
            self.cover(&parent, dir, ox, oy);
        }
    }

    /// Sample points along the subtree, spaced at most `step` apart, plus all vertices.
    pub fn sample(&self, step: &Q) -> Vec<TreePoint> {
        let mut out: BTreeSet<TreePoint> =
            self.vertices.iter().map(|w| TreePoint::vertex(w.clone())).collect();
        for ((parent, dir), (lo, hi)) in &self.edges {
            let len = hi - lo;
            let n = (len / step).ceil().to_integer().max(1);
            for k in 0..=n {
                let off = lo + len * Q::new(k, n);
                out.insert(TreePoint::on_edge(parent, *dir, off).unwrap());
            }
        }
        out.into_iter().collect()
    }
}

/// Two distinct points on a common closed edge, as (parent, letter, offset of x, offset of y).
fn edge_coords(x: &TreePoint, y: &TreePoint) -> (Word, Letter, Q, Q) {
    let interior = if !x.is_vertex() { x } else { y };
    if !interior.is_vertex() {
        let parent = interior.base.clone();
        let dir = interior.dir.unwrap();
        let off = |p: &TreePoint| -> Q {
            if !p.is_vertex() {
                p.offset
            } else if p.base == parent {
                Q::zero()
            } else {
                Q::one()
            }
        };
        return (parent.clone(), dir, off(x), off(y));
    }
    // two adjacent vertices
    if y.base.len() > x.base.len() {
        (x.base.clone(), y.base.last().unwrap(), Q::zero(), Q::one())
    } else {
        (y.base.clone(), x.base.last().unwrap(), Q::one(), Q::zero())
    }
}

/// Convex hull of finitely many tree points: the union of arcs from one point to the rest.
pub fn tree_hull(points: &[TreePoint]) -> TreeHull {
    let mut hull = TreeHull::default();
    let Some(first) = points.first() else { return hull };
    hull.cover_arc(&TreeArc::new(first, first));
    for p in &points[1..] {
        hull.cover_arc(&TreeArc::new(first, p));
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn v(s: &str) -> TreePoint {
        TreePoint::vertex(s.parse().unwrap())
    }

    fn tp(s: &str) -> TreePoint {
        s.parse().unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(tree_distance(&v(""), &v("ab")), qi(2));
        assert_eq!(tree_distance(&v("a"), &v("a")), qi(0));
        assert_eq!(tree_distance(&tp("+a@1/2"), &v("b")), q(3, 2));
        assert_eq!(tree_distance(&tp("a+b@1/4"), &tp("a+b@3/4")), q(1, 2));
        assert_eq!(tree_distance(&tp("a+b@1/4"), &tp("a+B@1/4")), q(1, 2));
        assert_eq!(tree_distance(&tp("a+b@1/4"), &tp("+b@1/4")), q(3, 2));
    }

    #[test]
    fn geodesic_examples() {
        let half = q(1, 2);
        assert_eq!(tree_geodesic_eval(&v(""), &v("ab"), &half).unwrap(), v("a"));
        assert_eq!(tree_geodesic_eval(&v(""), &v("a"), &q(1, 3)).unwrap(), tp("+a@1/3"));
        assert_eq!(tree_geodesic_eval(&v("a"), &v("b"), &q(3, 4)).unwrap(), tp("+b@1/2"));
        assert!(tree_geodesic_eval(&v("a"), &v("b"), &q(5, 4)).is_err());
        // from the child end of an edge toward the parent side
        assert_eq!(tree_geodesic_eval(&v("ab"), &v(""), &q(1, 4)).unwrap(), tp("a+b@1/2"));
        assert_eq!(tree_geodesic_eval(&tp("a+b@1/2"), &tp("+B@1/2"), &q(3, 4)).unwrap(), v(""));
    }

    #[test]
    fn canonical_form() {
        assert_eq!(tp("a+A@1/4"), tp("+a@3/4"));
        assert_eq!(tp("a+b@0"), v("a"));
        assert_eq!(tp("a+b@1"), v("ab"));
        assert_eq!(tp("+a@1/2").to_string(), "+a@1/2");
        assert!("a+b@3/2".parse::<TreePoint>().is_err());
        assert!("a+1@1/2".parse::<TreePoint>().is_err());
    }

    #[test]
    fn hull_examples() {
        let h = tree_hull(&[v(""), v("a"), v("b")]);
        assert_eq!(h.edges.len(), 2);
        assert_eq!(h.full_edges().count(), 2);
        assert_eq!(h.length(), qi(2));

        let h = tree_hull(&[v("a")]);
        assert!(h.edges.is_empty());
        assert_eq!(h.vertices.len(), 1);

        let h = tree_hull(&[v("ab"), v("aB"), v("")]);
        let edges: Vec<String> =
            h.full_edges().map(|(w, g)| format!("{}{}", w, letter_char(*g))).collect();
        assert_eq!(edges, vec!["a", "aB", "ab"]);
        assert!(h.contains(&v("a")));
        assert!(!h.contains(&v("b")));
    }

    #[test]
    fn hull_of_partial_edges() {
        let h = tree_hull(&[tp("+a@1/4"), tp("+b@1/2")]);
        assert_eq!(h.length(), q(3, 4));
        assert!(h.contains(&v("")));
        assert!(!h.contains(&tp("+a@1/2")));
        assert!(h.contains(&tp("+a@1/8")));
        let h = tree_hull(&[tp("+a@1/4")]);
        assert!(h.contains(&tp("+a@1/4")));
        assert_eq!(h.length(), qi(0));
    }

    #[test]
    fn translation_preserves_offsets() {
        let g: Word = "B".parse().unwrap();
        assert_eq!(tp("+a@1/4").translate(&g), tp("B+a@1/4"));
        assert_eq!(tp("b+a@1/4").translate(&g), tp("+a@1/4"));
        // crossing back toward the parent flips the canonical record
        assert_eq!(tp("+b@1/4").translate(&g), tp("+B@3/4"));
    }
}
