//! Nearest-neighbour index over a point cloud, organised as a trie of tree vertices.
//!
//! Searches run in floating point over the finite subtree spanned by the indexed
//! words and the root; callers that need exact values re-verify afterwards.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::freegroup::{Letter, Word};
use crate::product::ProductPoint;
use crate::rational::to_f64;
use crate::tree::TreePoint;

pub const NONE: u32 = u32::MAX;

/// A position on an edge of the trie (`child == NONE` for a vertex), offset measured from `parent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePos {
    pub parent: u32,
    pub child: u32,
    pub off: f64,
}

impl TreePos {
    pub fn vertex(v: u32) -> Self {
        TreePos { parent: v, child: NONE, off: 0.0 }
    }

    pub fn is_vertex(&self) -> bool {
        self.child == NONE
    }
}

#[derive(Debug, Clone)]
struct Node {
    word: Word,
    depth: u32,
    parent: u32,
    children: SmallVec<[u32; 4]>,
    at_vertex: Vec<u32>,
    // indexed points interior to the edge parent -> this node, with offset from the parent
    on_edge: Vec<(f64, u32)>,
}

#[derive(Debug, Clone)]
pub struct CloudIndex {
    nodes: Vec<Node>,
    ids: HashMap<Word, u32>,
    n: usize,
    coords: Vec<f64>,
    len: usize,
}

impl CloudIndex {
    /// Index `targets`; `extra` only contributes vertices so that its points can be located.
    pub fn new(targets: &[ProductPoint], extra: &[ProductPoint]) -> Self {
        let n = targets.first().or(extra.first()).map_or(0, |p| p.dim());
        let mut idx = CloudIndex { nodes: Vec::new(), ids: HashMap::new(), n, coords: Vec::new(), len: 0 };
        idx.ensure(&Word::identity());
        for (i, p) in targets.iter().enumerate() {
            idx.coords.extend(p.euclid.iter().map(to_f64));
            match p.tree.child() {
                None => {
                    let v = idx.ensure(p.tree.base());
                    idx.nodes[v as usize].at_vertex.push(i as u32);
                }
                Some(c) => {
                    let v = idx.ensure(&c);
                    idx.nodes[v as usize].on_edge.push((to_f64(p.tree.offset()), i as u32));
                }
            }
        }
        idx.len = targets.len();
        for p in extra {
            idx.ensure(p.tree.base());
            if let Some(c) = p.tree.child() {
                idx.ensure(&c);
            }
        }
        idx
    }

    fn ensure(&mut self, w: &Word) -> u32 {
        if let Some(&id) = self.ids.get(w) {
            return id;
        }
        let parent = if w.is_identity() {
            NONE
        } else {
            self.ensure(&w.prefix(w.len() - 1))
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            word: w.clone(),
            depth: w.len() as u32,
            parent,
            children: SmallVec::new(),
            at_vertex: Vec::new(),
            on_edge: Vec::new(),
        });
        if parent != NONE {
            self.nodes[parent as usize].children.push(id);
        }
        self.ids.insert(w.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_id(&self, w: &Word) -> Option<u32> {
        self.ids.get(w).copied()
    }

    pub fn word(&self, v: u32) -> &Word {
        &self.nodes[v as usize].word
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.nodes[v as usize].depth
    }

    pub fn parent(&self, v: u32) -> u32 {
        self.nodes[v as usize].parent
    }

    /// Letter labelling the edge from the parent of `v` to `v`.
    pub fn edge_letter(&self, v: u32) -> Letter {
        self.nodes[v as usize].word.last().expect("root has no parent edge")
    }

    pub fn points_at(&self, v: u32) -> &[u32] {
        &self.nodes[v as usize].at_vertex
    }

    pub fn euclid(&self, i: u32) -> &[f64] {
        let s = i as usize * self.n;
        &self.coords[s..s + self.n]
    }

    pub fn locate(&self, t: &TreePoint) -> Option<TreePos> {
        let parent = self.node_id(t.base())?;
        match t.child() {
            None => Some(TreePos::vertex(parent)),
            Some(c) => Some(TreePos { parent, child: self.node_id(&c)?, off: to_f64(t.offset()) }),
        }
    }

    pub fn to_tree_point(&self, p: &TreePos) -> (Word, Option<Letter>, f64) {
        if p.is_vertex() {
            (self.word(p.parent).clone(), None, 0.0)
        } else {
            (self.word(p.parent).clone(), Some(self.edge_letter(p.child)), p.off)
        }
    }

    pub fn lca(&self, mut a: u32, mut b: u32) -> u32 {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a);
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b);
        }
        while a != b {
            a = self.parent(a);
            b = self.parent(b);
        }
        a
    }

    pub fn vertex_distance(&self, a: u32, b: u32) -> u32 {
        let c = self.lca(a, b);
        self.depth(a) + self.depth(b) - 2 * self.depth(c)
    }

    fn anchors(p: &TreePos) -> SmallVec<[(u32, f64); 2]> {
        let mut out = SmallVec::new();
        out.push((p.parent, p.off));
        if !p.is_vertex() {
            out.push((p.child, 1.0 - p.off));
        }
        out
    }

    fn same_edge(p: &TreePos, q: &TreePos) -> bool {
        !p.is_vertex() && p.parent == q.parent && p.child == q.child
    }

    pub fn tree_distance(&self, p: &TreePos, q: &TreePos) -> f64 {
        if Self::same_edge(p, q) {
            return (p.off - q.off).abs();
        }
        let mut best = f64::INFINITY;
        for &(a, da) in &Self::anchors(p) {
            for &(b, db) in &Self::anchors(q) {
                best = best.min(da + db + self.vertex_distance(a, b) as f64);
            }
        }
        best
    }

    /// Fill `arc` with the trie path from `p` to `q`.
    pub fn arc(&self, p: &TreePos, q: &TreePos, arc: &mut Arc) {
        arc.start = *p;
        arc.end = *q;
        arc.verts.clear();
        arc.pos.clear();
        if Self::same_edge(p, q) {
            arc.length = (p.off - q.off).abs();
            return;
        }
        let mut best = (f64::INFINITY, NONE, 0.0, NONE, 0.0);
        for &(a, da) in &Self::anchors(p) {
            for &(b, db) in &Self::anchors(q) {
                let d = da + db + self.vertex_distance(a, b) as f64;
                if d < best.0 {
                    best = (d, a, da, b, db);
                }
            }
        }
        let (length, a, da, b, _) = best;
        let c = self.lca(a, b);
        let mut x = a;
        loop {
            arc.verts.push(x);
            if x == c {
                break;
            }
            x = self.parent(x);
        }
        let mark = arc.verts.len();
        let mut y = b;
        while y != c {
            arc.verts.push(y);
            y = self.parent(y);
        }
        arc.verts[mark..].reverse();
        arc.pos.extend((0..arc.verts.len()).map(|i| da + i as f64));
        arc.length = length;
    }

    /// Nearest indexed point to `(pos, e)`.
    ///
    /// Returns `(distance, index)`. When some point lies within `threshold` the search may stop
    /// early and return any such point; otherwise the exact minimum is returned.
    pub fn nearest(&self, pos: &TreePos, e: &[f64], threshold: f64) -> (f64, u32) {
        let mut best_sq = f64::INFINITY;
        let mut best_i = NONE;
        let thr_sq = if threshold < 0.0 { -1.0 } else { threshold * threshold };
        let mut stack: SmallVec<[(u32, u32, f64); 64]> = SmallVec::new();
        macro_rules! consider {
            ($dt:expr, $i:expr) => {{
                let dt: f64 = $dt;
                let dt2 = dt * dt;
                if dt2 < best_sq {
                    let mut s = dt2;
                    let y = self.euclid($i);
                    for k in 0..self.n {
                        let d = e[k] - y[k];
                        s += d * d;
                    }
                    if s < best_sq {
                        best_sq = s;
                        best_i = $i;
                        if best_sq <= thr_sq {
                            return (best_sq.sqrt(), best_i);
                        }
                    }
                }
            }};
        }
        if pos.is_vertex() {
            stack.push((pos.parent, NONE, 0.0));
        } else {
            for &(o, i) in &self.nodes[pos.child as usize].on_edge {
                consider!((o - pos.off).abs(), i);
            }
            stack.push((pos.parent, pos.child, pos.off));
            stack.push((pos.child, pos.parent, 1.0 - pos.off));
        }
        while let Some((v, from, dv)) = stack.pop() {
            if dv * dv >= best_sq {
                continue;
            }
            let node = &self.nodes[v as usize];
            for &i in &node.at_vertex {
                consider!(dv, i);
            }
            let up = node.parent;
            if up != NONE && up != from {
                for &(o, i) in &node.on_edge {
                    consider!(dv + 1.0 - o, i);
                }
                stack.push((up, v, dv + 1.0));
            }
            for &c in &node.children {
                if c != from {
                    for &(o, i) in &self.nodes[c as usize].on_edge {
                        consider!(dv + o, i);
                    }
                    stack.push((c, v, dv + 1.0));
                }
            }
        }
        (best_sq.sqrt(), best_i)
    }
}

/// A trie path between two positions; `pos[i]` is the arc length at `verts[i]`.
#[derive(Debug, Clone)]
pub struct Arc {
    pub start: TreePos,
    pub end: TreePos,
    pub verts: Vec<u32>,
    pub pos: Vec<f64>,
    pub length: f64,
}

impl Default for Arc {
    fn default() -> Self {
        Arc {
            start: TreePos::vertex(0),
            end: TreePos::vertex(0),
            verts: Vec::new(),
            pos: Vec::new(),
            length: 0.0,
        }
    }
}

impl Arc {
    /// Position at arc length `t`.
    pub fn at(&self, idx: &CloudIndex, t: f64) -> TreePos {
        if self.verts.is_empty() {
            let dir = if self.end.off >= self.start.off { 1.0 } else { -1.0 };
            return TreePos { off: self.start.off + dir * t, ..self.start };
        }
        let first = self.pos[0];
        let last = *self.pos.last().unwrap();
        if t <= first {
            if self.start.is_vertex() {
                return self.start;
            }
            let tau = first - t;
            let off = if self.verts[0] == self.start.parent { tau } else { 1.0 - tau };
            return TreePos { off, ..self.start };
        }
        if t >= last {
            if self.end.is_vertex() {
                return self.end;
            }
            let tau = t - last;
            let off = if *self.verts.last().unwrap() == self.end.parent { tau } else { 1.0 - tau };
            return TreePos { off, ..self.end };
        }
        let i = (((t - first).floor()) as usize).min(self.verts.len() - 2);
        let tau = t - self.pos[i];
        let (a, b) = (self.verts[i], self.verts[i + 1]);
        if idx.parent(b) == a {
            TreePos { parent: a, child: b, off: tau }
        } else {
            TreePos { parent: b, child: a, off: 1.0 - tau }
        }
    }
}
