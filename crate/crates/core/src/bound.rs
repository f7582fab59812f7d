//! Branch-and-bound upper bound for `sup_{x in conv(Y)} d(x, T)` in `T_{2m} x R^n`.
//!
//! `conv(Y)` is enclosed in the convex set cut out by the tree hull of `Y`, the bounding box of
//! its euclidean parts and sublevel sets `{ d_T(c, t) + coef * e_j <= max_Y }`. Cells are
//! (edge interval) x (box) pieces; since `d(., T)` is 1-Lipschitz a cell is bounded by the value
//! at its centre plus its radius.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use smallvec::SmallVec;

use crate::index::{CloudIndex, TreePos, NONE};
use crate::product::ProductPoint;
use crate::rational::to_f64;
use crate::tree::tree_hull;

#[derive(Debug, Clone, Serialize)]
pub struct SupBound {
    pub upper: f64,
    pub cells_refined: u64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
struct Cell {
    parent: u32,
    child: u32,
    lo: f64,
    hi: f64,
    elo: SmallVec<[f64; 4]>,
    ehi: SmallVec<[f64; 4]>,
    bound: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.bound.total_cmp(&o.bound) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bound.total_cmp(&o.bound)
    }
}

struct Cut {
    coord: usize,
    coef: f64,
    level: f64,
}

struct Problem<'a> {
    idx: &'a CloudIndex,
    center: TreePos,
    cuts: Vec<Cut>,
}

impl Problem<'_> {
    fn pos(&self, c: &Cell, off: f64) -> TreePos {
        if c.child == NONE {
            TreePos::vertex(c.parent)
        } else {
            TreePos { parent: c.parent, child: c.child, off }
        }
    }

    fn min_tree_distance(&self, c: &Cell) -> f64 {
        let center_on_edge =
            !self.center.is_vertex() && self.center.parent == c.parent && self.center.child == c.child;
        if center_on_edge && c.lo <= self.center.off && self.center.off <= c.hi {
            return 0.0;
        }
        let a = self.idx.tree_distance(&self.center, &self.pos(c, c.lo));
        let b = self.idx.tree_distance(&self.center, &self.pos(c, c.hi));
        a.min(b)
    }

    fn feasible(&self, c: &Cell) -> bool {
        if self.cuts.is_empty() {
            return true;
        }
        let dt = self.min_tree_distance(c);
        self.cuts.iter().all(|k| {
            let lin = if k.coef >= 0.0 { k.coef * c.elo[k.coord] } else { k.coef * c.ehi[k.coord] };
            dt + lin <= k.level
        })
    }

    fn evaluate(&self, c: &mut Cell) {
        let mid = 0.5 * (c.lo + c.hi);
        let e: SmallVec<[f64; 4]> = c.elo.iter().zip(&c.ehi).map(|(a, b)| 0.5 * (a + b)).collect();
        let (d, _) = self.idx.nearest(&self.pos(c, mid), &e, -1.0);
        let mut r2 = (0.5 * (c.hi - c.lo)).powi(2);
        for (a, b) in c.elo.iter().zip(&c.ehi) {
            r2 += (0.5 * (b - a)).powi(2);
        }
        c.bound = d + r2.sqrt() + 1e-9;
    }

    fn split(&self, c: &Cell) -> [Cell; 2] {
        let mut widest = (c.hi - c.lo, None);
        for j in 0..c.elo.len() {
            let w = c.ehi[j] - c.elo[j];
            if w > widest.0 {
                widest = (w, Some(j));
            }
        }
        let (mut a, mut b) = (c.clone(), c.clone());
        match widest.1 {
            None => {
                let m = 0.5 * (c.lo + c.hi);
                a.hi = m;
                b.lo = m;
            }
            Some(j) => {
                let m = 0.5 * (c.elo[j] + c.ehi[j]);
                a.ehi[j] = m;
                b.elo[j] = m;
            }
        }
        [a, b]
    }
}

/// Upper bound for the largest distance from a point of `conv(ys)` to `targets`.
///
/// `basepoint` centres the sublevel cuts. Refinement stops once the largest open cell bound is
/// within `tol` of `lower` (a known attained value) or after `max_cells` refinements.
pub fn sup_distance_over_hull(
    ys: &[ProductPoint],
    targets: &[ProductPoint],
    basepoint: &ProductPoint,
    lower: f64,
    tol: f64,
    max_cells: u64,
) -> SupBound {
    let n = basepoint.dim();
    let mut extra = ys.to_vec();
    extra.push(basepoint.clone());
    let idx = CloudIndex::new(targets, &extra);
    let center = idx.locate(&basepoint.tree).expect("indexed");

    let fy: Vec<(TreePos, Vec<f64>)> = ys
        .iter()
        .map(|p| (idx.locate(&p.tree).expect("indexed"), p.euclid.iter().map(to_f64).collect()))
        .collect();
    let mut elo: SmallVec<[f64; 4]> = SmallVec::from_elem(f64::INFINITY, n);
    let mut ehi: SmallVec<[f64; 4]> = SmallVec::from_elem(f64::NEG_INFINITY, n);
    for (_, e) in &fy {
        for j in 0..n {
            elo[j] = elo[j].min(e[j]);
            ehi[j] = ehi[j].max(e[j]);
        }
    }
    let e0: Vec<f64> = basepoint.euclid.iter().map(to_f64).collect();
    let mut cuts = Vec::new();
    for coord in 0..n {
        for lambda in [0.25, 0.5, 1.0, 2.0] {
            for sign in [1.0, -1.0] {
                let coef = sign * lambda;
                let level = fy
                    .iter()
                    .map(|(t, e)| idx.tree_distance(&center, t) + coef * (e[coord] - e0[coord]))
                    .fold(f64::NEG_INFINITY, f64::max);
                // shift so that the cut reads d_T + coef * e_j <= level
                cuts.push(Cut { coord, coef, level: level + coef * e0[coord] + 1e-9 });
            }
        }
    }
    let problem = Problem { idx: &idx, center, cuts };

    let hull = tree_hull(&ys.iter().map(|p| p.tree.clone()).collect::<Vec<_>>());
    let mut roots = Vec::new();
    for ((parent, dir), (lo, hi)) in &hull.edges {
        let mut child = parent.clone();
        child.push_reduce(*dir);
        roots.push(Cell {
            parent: idx.node_id(parent).expect("hull vertex indexed"),
            child: idx.node_id(&child).expect("hull vertex indexed"),
            lo: to_f64(lo),
            hi: to_f64(hi),
            elo: elo.clone(),
            ehi: ehi.clone(),
            bound: 0.0,
        });
    }
    if roots.is_empty() {
        let v = hull.vertices.iter().next().expect("nonempty input");
        roots.push(Cell {
            parent: idx.node_id(v).expect("hull vertex indexed"),
            child: NONE,
            lo: 0.0,
            hi: 0.0,
            elo,
            ehi,
            bound: 0.0,
        });
    }

    let mut heap = BinaryHeap::new();
    let mut settled = lower;
    for mut c in roots {
        if problem.feasible(&c) {
            problem.evaluate(&mut c);
            if c.bound <= lower + tol {
                settled = settled.max(c.bound);
            } else {
                heap.push(c);
            }
        }
    }
    let mut refined = 0u64;
    while let Some(c) = heap.pop() {
        if refined >= max_cells {
            return SupBound { upper: c.bound.max(settled), cells_refined: refined, converged: false };
        }
        refined += 1;
        for mut s in problem.split(&c) {
            if !problem.feasible(&s) {
                continue;
            }
            problem.evaluate(&mut s);
            if s.bound <= lower + tol {
                settled = settled.max(s.bound);
            } else {
                heap.push(s);
            }
        }
    }
    SupBound { upper: settled, cells_refined: refined, converged: true }
}
