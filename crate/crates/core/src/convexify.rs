//! Sampled sequential convexification in `T_{2m} x R^n`.
//!
//! `conv1_sample` adds, for every pair of points, the geodesic samples at parameters `k/N`
//! with `N = ceil(d/eps)`. All sample points are exact. When a cloud outgrows its cap,
//! `conv_iter` snaps coordinates and tree offsets to the grid of pitch `eps/4`.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::freegroup::{Letter, Word};
use crate::index::{Arc, CloudIndex, TreePos};
use crate::product::{distance_sq, ProductArc, ProductPoint};
use crate::rational::{ceil_ratio_of_sqrt, fmt_q, serde_q, snap_to_pitch, to_f64, Q};
use crate::tree::{vertex_distance, vertex_path, TreePoint};

/// A finite set of product points, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointCloud {
    points: Vec<ProductPoint>,
    n: usize,
    m: usize,
    generation: usize,
    epsilon: Option<Q>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CloudHeader {
    n: usize,
    m: usize,
    #[serde(with = "opt_q")]
    epsilon: Option<Q>,
    generation: usize,
}

mod opt_q {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => serde_q::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| crate::rational::parse_q(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

impl PointCloud {
    /// Builds a generation-0 cloud; points must have `n` coordinates and use generators `<= m`.
    pub fn new(points: Vec<ProductPoint>, n: usize, m: usize) -> Result<Self> {
        for p in &points {
            if p.dim() != n {
                return Err(Error::Dimension { expected: n, got: p.dim() });
            }
            let g = p.tree.child().map_or(p.tree.base().max_generator(), |c| c.max_generator());
            if g > m {
                return Err(Error::LetterOutOfRange { index: g as i32, rank: m });
            }
        }
        Ok(Self::from_parts(points, n, m, 0, None))
    }

    fn from_parts(mut points: Vec<ProductPoint>, n: usize, m: usize, generation: usize, epsilon: Option<Q>) -> Self {
        points.sort_unstable();
        points.dedup();
        PointCloud { points, n, m, generation, epsilon }
    }

    pub fn points(&self) -> &[ProductPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn epsilon(&self) -> Option<&Q> {
        self.epsilon.as_ref()
    }

    pub fn contains(&self, p: &ProductPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn is_subset_of(&self, other: &PointCloud) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = CloudHeader { n: self.n, m: self.m, epsilon: self.epsilon, generation: self.generation };
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io)?;
        for p in &self.points {
            writeln!(w, "{}", serde_json::to_string(p).expect("point serializes")).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let (_, head) = lines.next().ok_or_else(|| Error::Parse("missing cloud header".into()))?;
        let head = head.map_err(|e| Error::Parse(e.to_string()))?;
        let header: CloudHeader =
            serde_json::from_str(&head).map_err(|e| Error::Parse(format!("cloud header: {e}")))?;
        let mut points = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let p: ProductPoint =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            points.push(p);
        }
        let mut cloud = PointCloud::new(points, header.n, header.m)?;
        cloud.generation = header.generation;
        cloud.epsilon = header.epsilon;
        Ok(cloud)
    }
}

fn check_eps(eps: &Q) -> Result<()> {
    if *eps <= Q::zero() {
        return Err(Error::OutOfRange(format!("sampling step {} must be positive", fmt_q(eps))));
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------------
// Grid snapping

/// Snap euclidean coordinates and the tree offset to multiples of `pitch` (half up).
pub fn snap_point(p: &ProductPoint, pitch: &Q) -> ProductPoint {
    let euclid = p.euclid.iter().map(|x| snap_to_pitch(x, pitch)).collect();
    let tree = match p.tree.dir() {
        None => p.tree.clone(),
        Some(d) => {
            let off = snap_to_pitch(p.tree.offset(), pitch).clamp(Q::zero(), Q::from_integer(1));
            TreePoint::on_edge(p.tree.base(), d, off).expect("clamped offset")
        }
    };
    ProductPoint { tree, euclid }
}

/// A snapped point in integer units of the pitch; `dir == 0` marks a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GridPoint {
    base: Word,
    dir: Letter,
    off: i64,
    e: SmallVec<[i64; 4]>,
}

#[derive(Debug, Clone)]
struct Grid {
    pitch: Q,
    // 1/pitch, needed to express whole edges in units
    units: i64,
}

impl Grid {
    fn new(eps: &Q) -> Option<Self> {
        let pitch = eps / Q::from_integer(4);
        let inv = pitch.recip();
        inv.is_integer().then(|| Grid { pitch, units: inv.to_integer() as i64 })
    }

    fn units_of(&self, x: &Q) -> Option<i64> {
        let u = x / self.pitch;
        u.is_integer().then(|| u.to_integer()).and_then(|v| v.to_i64())
    }

    fn encode(&self, p: &ProductPoint) -> Option<GridPoint> {
        let e = p.euclid.iter().map(|x| self.units_of(x)).collect::<Option<SmallVec<_>>>()?;
        let (dir, off) = match p.tree.dir() {
            None => (0, 0),
            Some(d) => (d, self.units_of(p.tree.offset())?),
        };
        Some(GridPoint { base: p.tree.base().clone(), dir, off, e })
    }

    fn decode(&self, g: &GridPoint) -> ProductPoint {
        let tree = if g.dir == 0 {
            TreePoint::vertex(g.base.clone())
        } else {
            TreePoint::on_edge(&g.base, g.dir, self.pitch * Q::from_integer(g.off as i128)).expect("grid offset")
        };
        ProductPoint { tree, euclid: g.e.iter().map(|&x| self.pitch * Q::from_integer(x as i128)).collect() }
    }
}

fn round_half_up_div(num: i128, den: i128) -> i128 {
    (2 * num + den).div_euclid(2 * den)
}

#[derive(Debug, Clone)]
struct GridSeg {
    parent: Word,
    dir: Letter,
    start: i64,
    off0: i64,
    sign: i64,
}

fn grid_anchors(p: &GridPoint, u: i64) -> SmallVec<[(Word, i64); 2]> {
    let mut out = SmallVec::new();
    out.push((p.base.clone(), p.off));
    if p.dir != 0 {
        let mut c = p.base.clone();
        c.push_reduce(p.dir);
        out.push((c, u - p.off));
    }
    out
}

/// Tree path between grid points as linear offset segments; returns its length in units.
fn grid_tree_arc(p: &GridPoint, q: &GridPoint, u: i64, segs: &mut Vec<GridSeg>) -> i64 {
    segs.clear();
    if p.dir != 0 && p.dir == q.dir && p.base == q.base {
        let sign = if q.off >= p.off { 1 } else { -1 };
        segs.push(GridSeg { parent: p.base.clone(), dir: p.dir, start: 0, off0: p.off, sign });
        return (q.off - p.off).abs();
    }
    if p.dir == 0 && q.dir == 0 && p.base == q.base {
        return 0;
    }
    let mut best: Option<(i64, Word, i64, Word)> = None;
    for (a, da) in grid_anchors(p, u) {
        for (b, db) in grid_anchors(q, u) {
            let d = da + db + u * vertex_distance(&a, &b) as i64;
            if best.as_ref().is_none_or(|x| d < x.0) {
                best = Some((d, a.clone(), da, b));
            }
        }
    }
    let (length, a, da, b) = best.unwrap();
    if p.dir != 0 {
        let sign = if a == p.base { -1 } else { 1 };
        segs.push(GridSeg { parent: p.base.clone(), dir: p.dir, start: 0, off0: p.off, sign });
    }
    let path = vertex_path(&a, &b);
    for (i, w) in path.windows(2).enumerate() {
        let start = da + u * i as i64;
        let (x, y) = (&w[0], &w[1]);
        if y.len() > x.len() {
            segs.push(GridSeg { parent: x.clone(), dir: y.last().unwrap(), start, off0: 0, sign: 1 });
        } else {
            segs.push(GridSeg { parent: y.clone(), dir: x.last().unwrap(), start, off0: u, sign: -1 });
        }
    }
    if q.dir != 0 {
        let start = da + u * (path.len() as i64 - 1);
        let (off0, sign) = if b == q.base { (0, 1) } else { (u, -1) };
        segs.push(GridSeg { parent: q.base.clone(), dir: q.dir, start, off0, sign });
    }
    length
}

/// Samples `k = 1..N-1` of the pair, snapped, written into `out`.
fn grid_pair_samples(p: &GridPoint, q: &GridPoint, u: i64, segs: &mut Vec<GridSeg>, out: &mut HashSet<GridPoint>) {
    let len = grid_tree_arc(p, q, u, segs) as i128;
    let mut s = len * len;
    for (a, b) in p.e.iter().zip(&q.e) {
        let d = (*b - *a) as i128;
        s += d * d;
    }
    if s == 0 {
        return;
    }
    let mut r = s.sqrt();
    if r * r < s {
        r += 1;
    }
    // pitch is eps/4, so N = ceil(sqrt(s) / 4)
    let n = (r + 3) / 4;
    for k in 1..n {
        let t = k * len;
        let tree = if segs.is_empty() {
            (p.base.clone(), p.dir, p.off)
        } else {
            let i = segs.partition_point(|g| g.start as i128 * n <= t).max(1) - 1;
            let g = &segs[i];
            let num = g.off0 as i128 * n + g.sign as i128 * (t - g.start as i128 * n);
            let off = round_half_up_div(num, n) as i64;
            if off <= 0 {
                (g.parent.clone(), 0, 0)
            } else if off >= u {
                let mut c = g.parent.clone();
                c.push_reduce(g.dir);
                (c, 0, 0)
            } else {
                (g.parent.clone(), g.dir, off)
            }
        };
        let e = p
            .e
            .iter()
            .zip(&q.e)
            .map(|(&a, &b)| round_half_up_div(a as i128 * n + (b - a) as i128 * k, n) as i64)
            .collect();
        out.insert(GridPoint { base: tree.0, dir: tree.1, off: tree.2, e });
    }
}

/// Snapped euclidean parts of points that all sit at one tree vertex, as a bitmap over the
/// bounding box in grid units.
#[derive(Debug, Clone)]
struct FlatSet {
    vertex: TreePoint,
    lo: SmallVec<[i64; 4]>,
    ext: SmallVec<[usize; 4]>,
    bits: Vec<u64>,
    count: usize,
}

impl FlatSet {
    const MAX_CELLS: usize = 1 << 31;

    fn new(vertex: TreePoint, lo: SmallVec<[i64; 4]>, hi: &[i64]) -> Option<Self> {
        let ext: SmallVec<[usize; 4]> = lo.iter().zip(hi).map(|(a, b)| (b - a + 1) as usize).collect();
        let cells = ext.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e)).filter(|&c| c <= Self::MAX_CELLS)?;
        Some(FlatSet { vertex, lo, ext, bits: vec![0; cells.div_ceil(64)], count: 0 })
    }

    fn insert(&mut self, e: &[i64]) {
        let mut idx = 0usize;
        for ((x, lo), ext) in e.iter().zip(&self.lo).zip(&self.ext) {
            idx = idx * ext + (x - lo) as usize;
        }
        let (w, b) = (idx / 64, 1u64 << (idx % 64));
        if self.bits[w] & b == 0 {
            self.bits[w] |= b;
            self.count += 1;
        }
    }

    fn decode(&self, pitch: &Q) -> Vec<ProductPoint> {
        let mut out = Vec::with_capacity(self.count);
        let mut coords = vec![0i64; self.ext.len()];
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let mut idx = w * 64 + rest.trailing_zeros() as usize;
                rest &= rest - 1;
                for j in (0..self.ext.len()).rev() {
                    coords[j] = self.lo[j] + (idx % self.ext[j]) as i64;
                    idx /= self.ext[j];
                }
                let euclid = coords.iter().map(|&x| pitch * Q::from_integer(x as i128)).collect();
                out.push(ProductPoint { tree: self.vertex.clone(), euclid });
            }
        }
        out
    }
}

/// [`grid_pair_samples`] for two points at the same tree vertex.
fn flat_pair_samples(a: &[i64], b: &[i64], buf: &mut [i64], out: &mut FlatSet) {
    let s: i64 = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum();
    if s == 0 {
        return;
    }
    let mut r = (s as f64).sqrt() as i64;
    while r * r < s {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= s {
        r -= 1;
    }
    let n = (r + 3) / 4;
    for k in 1..n {
        for j in 0..a.len() {
            buf[j] = (2 * (a[j] * n + (b[j] - a[j]) * k) + n).div_euclid(2 * n);
        }
        out.insert(buf);
    }
}

fn exact_pair_samples(p: &ProductPoint, q: &ProductPoint, eps: &Q, mut sink: impl FnMut(ProductPoint)) -> Result<()> {
    let arc = ProductArc::new(p, q)?;
    let n = ceil_ratio_of_sqrt(&arc.distance_sq(), eps) as i128;
    for k in 1..n {
        sink(arc.eval(&Q::new(k, n)));
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------------
// conv^1 and conv^i

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvOptions {
    /// Largest generation allowed after snapping.
    pub cap: usize,
    /// Snap to the `eps/4` grid once a generation holds more than this many points
    /// (defaults to `cap`).
    #[serde(default)]
    pub snap_above: Option<usize>,
    /// Refuse a generation whose number of pairs exceeds this bound.
    pub pair_budget: Option<u64>,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions { cap: 200_000, snap_above: None, pair_budget: None }
    }
}

impl ConvOptions {
    pub fn with_cap(cap: usize) -> Self {
        ConvOptions { cap, ..Default::default() }
    }
}

#[derive(Clone, Copy)]
struct Snap<'a> {
    above: usize,
    cap: usize,
    pinned: &'a [ProductPoint],
}

fn pair_count(len: usize) -> u64 {
    let l = len as u64;
    l * l.saturating_sub(1) / 2
}

enum Store {
    Exact(HashSet<ProductPoint>),
    Grid(HashSet<GridPoint>),
    Snapped(HashSet<ProductPoint>),
    Flat(FlatSet),
}

impl Store {
    fn len(&self) -> usize {
        match self {
            Store::Exact(s) | Store::Snapped(s) => s.len(),
            Store::Grid(s) => s.len(),
            Store::Flat(s) => s.count,
        }
    }
}

struct PassResult {
    points: Vec<ProductPoint>,
    snapped: bool,
}

/// One conv^1 pass. With `snap` set, switches to grid snapping as soon as the output exceeds
/// `snap.above`; `snap.pinned` points are kept exactly in that case.
fn conv1_pass(
    input: &[ProductPoint],
    eps: &Q,
    snap: Option<Snap>,
    budget: Option<u64>,
) -> Result<PassResult> {
    let pairs = pair_count(input.len());
    if let Some(b) = budget {
        if pairs > b {
            return Err(Error::BudgetExceeded(format!("{pairs} pairs exceed the budget of {b}")));
        }
    }
    let grid = Grid::new(eps);
    let pitch = eps / Q::from_integer(4);
    let encoded: Vec<Option<GridPoint>> = match (&snap, &grid) {
        (Some(_), Some(g)) => input.iter().map(|p| g.encode(p)).collect(),
        _ => vec![None; input.len()],
    };
    let mut store = Store::Exact(input.iter().cloned().collect());
    let mut segs = Vec::new();
    let snapped_units = |p: &ProductPoint| -> SmallVec<[i64; 4]> {
        p.euclid.iter().map(|x| (x / pitch + Q::new(1, 2)).floor().to_integer() as i64).collect()
    };
    let flat = match (&snap, &grid, input.first()) {
        (Some(_), Some(_), Some(first)) if first.tree.is_vertex() && input.iter().all(|p| p.tree == first.tree) => {
            let mut lo = snapped_units(first);
            let mut hi = lo.clone();
            for p in input {
                for (j, x) in snapped_units(p).into_iter().enumerate() {
                    lo[j] = lo[j].min(x);
                    hi[j] = hi[j].max(x);
                }
            }
            FlatSet::new(first.tree.clone(), lo, &hi)
        }
        _ => None,
    };
    let mut buf: SmallVec<[i64; 4]> = SmallVec::from_elem(0, input.first().map_or(0, |p| p.dim()));

    let switch = |store: &mut Store| {
        let Store::Exact(set) = store else { return };
        let set = std::mem::take(set);
        *store = match (&flat, &grid) {
            (Some(f), _) => {
                let mut f = f.clone();
                set.iter().for_each(|p| f.insert(&snapped_units(p)));
                Store::Flat(f)
            }
            (None, Some(g)) => {
                Store::Grid(set.iter().map(|p| g.encode(&snap_point(p, &pitch)).expect("snapped")).collect())
            }
            (None, None) => Store::Snapped(set.iter().map(|p| snap_point(p, &pitch)).collect()),
        };
    };
    let over_cap = |store: &Store| -> Result<()> {
        if let (Some(sn), Store::Grid(_) | Store::Snapped(_) | Store::Flat(_)) = (&snap, store) {
            if store.len() > sn.cap {
                return Err(Error::CapExceeded { cap: sn.cap, size: store.len() + sn.pinned.len() });
            }
        }
        Ok(())
    };
    if let Some(sn) = snap {
        if store.len() > sn.above {
            switch(&mut store);
            over_cap(&store)?;
        }
    }

    for i in 0..input.len() {
        for j in i + 1..input.len() {
            let (p, q) = (&input[i], &input[j]);
            match &mut store {
                Store::Exact(set) => {
                    exact_pair_samples(p, q, eps, |x| {
                        set.insert(x);
                    })?;
                    if let Some(sn) = snap {
                        if set.len() > sn.above {
                            switch(&mut store);
                        }
                    }
                }
                Store::Grid(set) => {
                    let g = grid.as_ref().unwrap();
                    match (&encoded[i], &encoded[j]) {
                        (Some(a), Some(b)) => grid_pair_samples(a, b, g.units, &mut segs, set),
                        _ => exact_pair_samples(p, q, eps, |x| {
                            set.insert(g.encode(&snap_point(&x, &pitch)).expect("snapped"));
                        })?,
                    }
                }
                Store::Snapped(set) => exact_pair_samples(p, q, eps, |x| {
                    set.insert(snap_point(&x, &pitch));
                })?,
                Store::Flat(set) => match (&encoded[i], &encoded[j]) {
                    (Some(a), Some(b)) => flat_pair_samples(&a.e, &b.e, &mut buf, set),
                    _ => exact_pair_samples(p, q, eps, |x| set.insert(&snapped_units(&x)))?,
                },
            }
            over_cap(&store)?;
        }
    }

    let (mut points, snapped) = match store {
        Store::Exact(set) => (set.into_iter().collect::<Vec<_>>(), false),
        Store::Grid(set) => {
            let g = grid.as_ref().unwrap();
            (set.iter().map(|x| g.decode(x)).collect(), true)
        }
        Store::Snapped(set) => (set.into_iter().collect(), true),
        Store::Flat(set) => (set.decode(&pitch), true),
    };
    if snapped {
        let sn = snap.unwrap();
        points.extend(sn.pinned.iter().cloned());
        points.sort_unstable();
        points.dedup();
        if points.len() > sn.cap {
            return Err(Error::CapExceeded { cap: sn.cap, size: points.len() });
        }
    }
    Ok(PassResult { points, snapped })
}

/// Exact sampled `conv^1`: the input plus `k/N` samples on the geodesic of every pair.
pub fn conv1_sample(cloud: &PointCloud, eps: &Q) -> Result<PointCloud> {
    check_eps(eps)?;
    let pass = conv1_pass(&cloud.points, eps, None, None)?;
    Ok(PointCloud::from_parts(pass.points, cloud.n, cloud.m, cloud.generation + 1, Some(*eps)))
}

#[derive(Debug, Clone)]
pub struct ConvIterReport {
    pub cloud: PointCloud,
    /// Generations (1-based) that were snapped to the grid.
    pub snapped_generations: Vec<usize>,
    /// Upper bound on the total displacement introduced by snapping.
    pub snap_error_bound: f64,
}

pub fn conv_iter(seed: &PointCloud, iters: usize, eps: &Q, cap: usize) -> Result<PointCloud> {
    Ok(conv_iter_with(seed, iters, eps, &ConvOptions::with_cap(cap))?.cloud)
}

/// `iters` applications of `conv1_sample`, snapping any generation larger than `opts.cap`.
///
/// Seed points are never moved, so the result always contains the seed.
pub fn conv_iter_with(seed: &PointCloud, iters: usize, eps: &Q, opts: &ConvOptions) -> Result<ConvIterReport> {
    check_eps(eps)?;
    if seed.len() > opts.cap {
        return Err(Error::Precondition(format!("seed of {} points exceeds cap {}", seed.len(), opts.cap)));
    }
    let per_snap = to_f64(eps) / 8.0 * ((seed.n + 1) as f64).sqrt();
    let mut points = seed.points.clone();
    let mut snapped_generations = Vec::new();
    for gen in 1..=iters {
        let snap = Snap { above: opts.snap_above.unwrap_or(opts.cap).min(opts.cap), cap: opts.cap, pinned: &seed.points };
        let pass = conv1_pass(&points, eps, Some(snap), opts.pair_budget)?;
        if pass.snapped {
            snapped_generations.push(gen);
        }
        let stable = !pass.snapped && pass.points.len() == points.len();
        points = pass.points;
        if stable {
            // conv^1 added nothing, so every later generation is identical
            break;
        }
    }
    let snap_error_bound = per_snap * snapped_generations.len() as f64;
    let cloud = PointCloud::from_parts(points, seed.n, seed.m, seed.generation + iters, Some(*eps));
    Ok(ConvIterReport { cloud, snapped_generations, snap_error_bound })
}

// ---------------------------------------------------------------------------------------------
// Distances between clouds

#[derive(Debug, Clone)]
struct FloatPoint {
    base: Word,
    child: Option<Word>,
    off: f64,
    e: Vec<f64>,
}

impl FloatPoint {
    fn new(p: &ProductPoint) -> Self {
        FloatPoint {
            base: p.tree.base().clone(),
            child: p.tree.child(),
            off: to_f64(p.tree.offset()),
            e: p.euclid.iter().map(to_f64).collect(),
        }
    }

    fn tree_distance(&self, o: &FloatPoint) -> f64 {
        if self.child.is_some() && self.child == o.child {
            return (self.off - o.off).abs();
        }
        let mut best = f64::INFINITY;
        let a: SmallVec<[(&Word, f64); 2]> = match &self.child {
            None => smallvec::smallvec![(&self.base, 0.0)],
            Some(c) => smallvec::smallvec![(&self.base, self.off), (c, 1.0 - self.off)],
        };
        let b: SmallVec<[(&Word, f64); 2]> = match &o.child {
            None => smallvec::smallvec![(&o.base, 0.0)],
            Some(c) => smallvec::smallvec![(&o.base, o.off), (c, 1.0 - o.off)],
        };
        for (x, dx) in &a {
            for (y, dy) in &b {
                best = best.min(dx + dy + vertex_distance(x, y) as f64);
            }
        }
        best
    }

    fn distance_sq(&self, o: &FloatPoint) -> f64 {
        let t = self.tree_distance(o);
        t * t + self.e.iter().zip(&o.e).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }
}

/// `max_{a in A} min_{b in B} d(a, b)` by brute force.
pub fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if a.n != b.n {
        return Err(Error::Dimension { expected: a.n, got: b.n });
    }
    let fb: Vec<FloatPoint> = b.points.iter().map(FloatPoint::new).collect();
    let mut worst = 0.0f64;
    for p in &a.points {
        let fp = FloatPoint::new(p);
        let mut best = f64::INFINITY;
        for q in &fb {
            let d = fp.distance_sq(q);
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        worst = worst.max(best);
    }
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance between two clouds, brute force.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

// ---------------------------------------------------------------------------------------------
// Farthest conv^1 sample from a target set

#[derive(Debug, Clone, Serialize)]
pub struct FarthestReport {
    /// Distance from the worst sample to its nearest target.
    pub value: f64,
    #[serde(with = "serde_q")]
    pub value_sq: Q,
    pub witness: ProductPoint,
    pub nearest: ProductPoint,
    pub from: ProductPoint,
    pub to: ProductPoint,
    #[serde(with = "serde_q")]
    pub param: Q,
    pub pairs: u64,
    pub pairs_pruned: u64,
    pub samples_checked: u64,
}

#[derive(Clone, Copy)]
struct Anchor {
    u: f64,
    gap: f64,
    // the anchor's nearest target sits on the tree path at `u`
    on_path: bool,
}

/// Largest distance from a point of `conv1_sample(sources, eps)` to the set `targets`.
///
/// Pairs are streamed and never stored. A pair is skipped when an upper bound built from
/// targets sitting on its tree path cannot beat the current maximum, so the value is exact
/// up to floating rounding (about 1e-12); the witness is re-evaluated exactly.
pub fn conv1_farthest(sources: &[ProductPoint], targets: &[ProductPoint], eps: &Q) -> Result<FarthestReport> {
    check_eps(eps)?;
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let n = targets[0].dim();
    for p in sources.iter().chain(targets) {
        if p.dim() != n {
            return Err(Error::Dimension { expected: n, got: p.dim() });
        }
    }
    let idx = CloudIndex::new(targets, sources);
    let eps_f = to_f64(eps);
    let pos: Vec<TreePos> = sources.iter().map(|p| idx.locate(&p.tree).expect("indexed")).collect();
    let ef: Vec<Vec<f64>> = sources.iter().map(|p| p.euclid.iter().map(to_f64).collect()).collect();
    let target_set: HashSet<&ProductPoint> = targets.iter().collect();
    let gaps: Vec<f64> = sources
        .iter()
        .enumerate()
        .map(|(i, p)| if target_set.contains(p) { 0.0 } else { idx.nearest(&pos[i], &ef[i], -1.0).0 })
        .collect();

    let mut best = -1.0f64;
    let mut wit: (usize, usize, u64, u64) = (0, 0, 0, 1);
    for (i, &g) in gaps.iter().enumerate() {
        if g > best {
            best = g;
            wit = (i, i, 0, 1);
        }
    }

    let mut arc = Arc::default();
    let mut anchors: Vec<Anchor> = Vec::new();
    let mut e = vec![0.0; n];
    let (mut pairs, mut pruned, mut checked) = (0u64, 0u64, 0u64);
    for i in 0..sources.len() {
        for j in i + 1..sources.len() {
            pairs += 1;
            let (gi, gj) = (gaps[i], gaps[j]);
            idx.arc(&pos[i], &pos[j], &mut arc);
            let lt = arc.length;
            let de2: f64 = ef[i].iter().zip(&ef[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let dist = (lt * lt + de2).sqrt();
            // nearest-target distance along the segment never exceeds this
            let mut ub = 0.5 * (dist + gi + gj);
            if ub <= best {
                pruned += 1;
                continue;
            }
            let sigma = if lt > 1e-12 { de2.sqrt() / lt } else { f64::INFINITY };
            let bound = |a: &Anchor, tau: f64| -> f64 {
                if a.on_path {
                    let s = a.gap + tau * sigma;
                    (tau * tau + s * s).sqrt()
                } else {
                    tau * (1.0 + sigma * sigma).sqrt() + a.gap
                }
            };
            anchors.clear();
            if sigma.is_finite() {
                anchors.push(Anchor { u: 0.0, gap: gi, on_path: gi == 0.0 });
                for (vi, &v) in arc.verts.iter().enumerate() {
                    let at = idx.points_at(v);
                    if at.is_empty() {
                        continue;
                    }
                    let u = arc.pos[vi];
                    let s = u / lt;
                    let mut gap = f64::INFINITY;
                    for &t in at {
                        let y = idx.euclid(t);
                        let mut g2 = 0.0;
                        for k in 0..n {
                            let d = ef[i][k] + (ef[j][k] - ef[i][k]) * s - y[k];
                            g2 += d * d;
                        }
                        gap = gap.min(g2);
                    }
                    anchors.push(Anchor { u, gap: gap.sqrt(), on_path: true });
                }
                anchors.push(Anchor { u: lt, gap: gj, on_path: gj == 0.0 });
                let mut path_ub = 0.0f64;
                for w in anchors.windows(2) {
                    let tau = 0.5 * (w[1].u - w[0].u);
                    path_ub = path_ub.max(bound(&w[0], tau).max(bound(&w[1], tau)));
                }
                ub = ub.min(path_ub);
            }
            if ub <= best {
                pruned += 1;
                continue;
            }
            let nf = dist / eps_f;
            let big_n = if (nf - nf.round()).abs() < 1e-6 {
                let d2 = distance_sq(&sources[i], &sources[j])?;
                ceil_ratio_of_sqrt(&d2, eps)
            } else {
                nf.ceil() as u64
            };
            let mut a = 0usize;
            for k in 1..big_n {
                let s = k as f64 / big_n as f64;
                let t = s * lt;
                let mut b = (s * dist + gi).min((1.0 - s) * dist + gj);
                if !anchors.is_empty() {
                    while a + 2 < anchors.len() && anchors[a + 1].u <= t {
                        a += 1;
                    }
                    let (l, r) = (&anchors[a], &anchors[a + 1]);
                    b = b.min(bound(l, t - l.u)).min(bound(r, r.u - t));
                }
                if b <= best {
                    continue;
                }
                checked += 1;
                let p = arc.at(&idx, t);
                for c in 0..n {
                    e[c] = ef[i][c] + (ef[j][c] - ef[i][c]) * s;
                }
                let (d, _) = idx.nearest(&p, &e, best);
                if d > best {
                    best = d;
                    wit = (i, j, k, big_n);
                }
            }
        }
    }

    let (i, j, k, nn) = wit;
    let param = Q::new(k as i128, nn as i128);
    let witness = ProductArc::new(&sources[i], &sources[j])?.eval(&param);
    let (nearest, value_sq) = targets
        .iter()
        .map(|y| (y, distance_sq(&witness, y).expect("dimensions checked")))
        .min_by(|a, b| a.1.cmp(&b.1))
        .map(|(y, d)| (y.clone(), d))
        .unwrap();
    Ok(FarthestReport {
        value: to_f64(&value_sq).sqrt(),
        value_sq,
        witness,
        nearest,
        from: sources[i].clone(),
        to: sources[j].clone(),
        param,
        pairs,
        pairs_pruned: pruned,
        samples_checked: checked,
    })
}

/// Least `nu` with `conv1_sample(Y, eps)` inside the closed `nu`-neighbourhood of `Y`.
pub fn nu_estimate(y: &PointCloud, eps: &Q) -> Result<FarthestReport> {
    conv1_farthest(&y.points, &y.points, eps)
}

// ---------------------------------------------------------------------------------------------
// Growth containment

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub passed: bool,
    pub iters: usize,
    pub nu: f64,
    /// Largest distance from a point of `conv^i` to `Y`.
    pub radius: f64,
    /// `radius - i*nu`; must not exceed `slack`.
    pub worst_excess: f64,
    pub slack: f64,
    pub worst_point: ProductPoint,
    pub cloud_size: usize,
    pub snapped_generations: Vec<usize>,
}

/// Checks `conv^i(Y)` against the `i*nu + i*eps` neighbourhood of `Y`.
pub fn growth_check(y: &PointCloud, iters: usize, nu: f64, eps: &Q) -> Result<GrowthReport> {
    growth_check_with(y, iters, nu, eps, &ConvOptions::default())
}

pub fn growth_check_with(y: &PointCloud, iters: usize, nu: f64, eps: &Q, opts: &ConvOptions) -> Result<GrowthReport> {
    if y.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let run = conv_iter_with(y, iters, eps, opts)?;
    let idx = CloudIndex::new(&y.points, &run.cloud.points);
    let mut radius = 0.0f64;
    let mut worst = y.points[0].clone();
    for p in run.cloud.points() {
        let pos = idx.locate(&p.tree).expect("indexed");
        let e: Vec<f64> = p.euclid.iter().map(to_f64).collect();
        let (d, _) = idx.nearest(&pos, &e, radius);
        if d > radius {
            radius = d;
            worst = p.clone();
        }
    }
    let slack = iters as f64 * to_f64(eps);
    let worst_excess = radius - iters as f64 * nu;
    Ok(GrowthReport {
        passed: worst_excess <= slack + 1e-12,
        iters,
        nu,
        radius,
        worst_excess,
        slack,
        worst_point: worst,
        cloud_size: run.cloud.len(),
        snapped_generations: run.snapped_generations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeBrunnReport {
    /// Hausdorff distance between the sampled conv^iters and conv^1.
    pub hausdorff_iter: f64,
    /// Hausdorff distance between the sampled conv^1 and a sample of the exact subtree hull.
    pub hausdorff_hull: f64,
    pub bound: f64,
    pub passed: bool,
    pub sizes: Vec<usize>,
    pub hull_edges: usize,
}

/// In a tree the union of pairwise arcs is already convex: compares sampled conv^1 and
/// conv^iters with each other and with the exact hull, against a `2 eps` tolerance.
pub fn tree_brunn_check(
    points: &[TreePoint],
    m: usize,
    iters: usize,
    eps: &Q,
    opts: &ConvOptions,
) -> Result<TreeBrunnReport> {
    if iters == 0 {
        return Err(Error::OutOfRange("iters must be at least 1".into()));
    }
    let seed = PointCloud::new(points.iter().map(|t| ProductPoint::new(t.clone(), Vec::new())).collect(), 0, m)?;
    if seed.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let one = conv_iter_with(&seed, 1, eps, opts)?.cloud;
    let last = conv_iter_with(&seed, iters, eps, opts)?.cloud;
    let hull = crate::tree::tree_hull(points);
    let sample = PointCloud::new(hull.sample(eps).into_iter().map(|t| ProductPoint::new(t, Vec::new())).collect(), 0, m)?;
    let hi = hausdorff(&last, &one)?;
    let hh = hausdorff(&one, &sample)?;
    let bound = 2.0 * to_f64(eps);
    Ok(TreeBrunnReport {
        hausdorff_iter: hi,
        hausdorff_hull: hh,
        bound,
        passed: hi <= bound && hh <= bound,
        sizes: vec![seed.len(), one.len(), last.len()],
        hull_edges: hull.edges.len(),
    })
}

/// Points of `a` that do not occur in `b`.
pub fn difference(a: &PointCloud, b: &PointCloud) -> Vec<ProductPoint> {
    let set: BTreeSet<&ProductPoint> = b.points.iter().collect();
    a.points.iter().filter(|p| !set.contains(p)).cloned().collect()
}
