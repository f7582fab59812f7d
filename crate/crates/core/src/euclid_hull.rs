//! Exact convex hulls of rational point sets in `R^n`, `n <= 3`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::convexify::{conv_iter_with, hausdorff, ConvOptions, PointCloud};
use crate::error::{Error, Result};
use crate::lattice::Span;
use crate::product::ProductPoint;
use crate::rational::{ceil_ratio_of_sqrt, serde_q, to_f64, Q};
use crate::tree::TreePoint;

pub type Vector = Vec<Q>;

/// `normal . x <= offset` (or `=` when used as an equality).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "serde_q::vec")]
    pub normal: Vector,
    #[serde(with = "serde_q")]
    pub offset: Q,
}

impl Halfspace {
    /// Signed slack: positive outside, zero on the boundary.
    pub fn value(&self, x: &[Q]) -> Q {
        dot(&self.normal, x) - self.offset
    }
}

/// Vertex and facet description of the hull of a finite set.
///
/// For lower-dimensional inputs the facets are relative to the affine span, which is cut out
/// by `equalities`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolytope {
    n: usize,
    affine_dim: usize,
    vertices: Vec<Vector>,
    facets: Vec<Halfspace>,
    equalities: Vec<Halfspace>,
}

#[derive(Serialize, Deserialize)]
struct QVec(#[serde(with = "serde_q::vec")] Vector);

#[derive(Serialize, Deserialize)]
struct PolytopeFile {
    n: usize,
    affine_dim: usize,
    vertices: Vec<QVec>,
    facets: Vec<Halfspace>,
    #[serde(default)]
    equalities: Vec<Halfspace>,
}

impl RationalPolytope {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn equalities(&self) -> &[Halfspace] {
        &self.equalities
    }

    pub fn to_json(&self) -> String {
        let f = PolytopeFile {
            n: self.n,
            affine_dim: self.affine_dim,
            vertices: self.vertices.iter().cloned().map(QVec).collect(),
            facets: self.facets.clone(),
            equalities: self.equalities.clone(),
        };
        serde_json::to_string(&f).expect("polytope serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: PolytopeFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let p = RationalPolytope {
            n: f.n,
            affine_dim: f.affine_dim,
            vertices: f.vertices.into_iter().map(|v| v.0).collect(),
            facets: f.facets,
            equalities: f.equalities,
        };
        let bad = p.vertices.iter().map(Vec::len);
        let bad = bad
            .chain(p.facets.iter().chain(&p.equalities).map(|h| h.normal.len()))
            .find(|&l| l != p.n);
        if let Some(got) = bad {
            return Err(Error::Dimension { expected: p.n, got });
        }
        Ok(p)
    }

    /// Splits the hull into at most `affine_dim + 1`-vertex simplices sharing the first vertex.
    pub fn triangulate(&self) -> Vec<Vec<Vector>> {
        let v = &self.vertices;
        match self.affine_dim {
            0 => vec![vec![v[0].clone()]],
            1 => vec![vec![v[0].clone(), v[1].clone()]],
            // vertices are kept in cyclic order
            2 => (1..v.len() - 1).map(|i| vec![v[0].clone(), v[i].clone(), v[i + 1].clone()]).collect(),
            _ => {
                let mut out = Vec::new();
                for f in &self.facets {
                    if f.value(&v[0]).is_zero() {
                        continue;
                    }
                    let on: Vec<Vector> = v.iter().filter(|x| f.value(x).is_zero()).cloned().collect();
                    let cycle = plane_cycle(&on, &f.normal);
                    for i in 1..cycle.len() - 1 {
                        out.push(vec![v[0].clone(), cycle[0].clone(), cycle[i].clone(), cycle[i + 1].clone()]);
                    }
                }
                out
            }
        }
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross(a: &[Q], b: &[Q]) -> Vector {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn cross2(o: &[Q], a: &[Q], b: &[Q]) -> Q {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Scales a halfspace so its normal is a primitive integer vector.
fn primitive(normal: Vector, offset: Q) -> Halfspace {
    let l = normal.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = normal.iter().map(|x| (x * Q::from_integer(l)).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x)).max(1);
    let scale = Q::new(l, g);
    Halfspace { normal: normal.iter().map(|x| x * scale).collect(), offset: offset * scale }
}

/// Counter-clockwise hull of 2D points (Andrew's monotone chain), collinear points dropped.
fn monotone_chain(pts: &[Vector]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].cmp(&pts[b]));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2
                && cross2(&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]], &pts[i]) <= Q::zero()
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Vertices of a planar convex polygon in `R^3` in cyclic order.
fn plane_cycle(on: &[Vector], normal: &[Q]) -> Vec<Vector> {
    let k = (0..3).find(|&k| !normal[k].is_zero()).expect("nonzero normal");
    let chart: Vec<Vector> =
        on.iter().map(|p| (0..3).filter(|&j| j != k).map(|j| p[j]).collect()).collect();
    monotone_chain(&chart).into_iter().map(|i| on[i].clone()).collect()
}

fn hull_3d(pts: &[Vector]) -> (Vec<Vector>, Vec<Halfspace>) {
    let p0 = &pts[0];
    let i1 = (1..pts.len()).find(|&i| pts[i] != *p0).expect("3-dimensional input");
    let d1 = sub(&pts[i1], p0);
    let i2 = (1..pts.len())
        .find(|&i| cross(&d1, &sub(&pts[i], p0)).iter().any(|x| !x.is_zero()))
        .expect("3-dimensional input");
    let nrm = cross(&d1, &sub(&pts[i2], p0));
    let i3 = (1..pts.len()).find(|&i| !dot(&nrm, &sub(&pts[i], p0)).is_zero()).expect("3-dimensional input");
    let four = [0, i1, i2, i3];
    let c: Vector = (0..3).map(|j| four.iter().map(|&i| pts[i][j]).sum::<Q>() / Q::from_integer(4)).collect();

    let orient = |f: &[usize; 3], x: &[Q]| {
        let (a, b, cc) = (&pts[f[0]], &pts[f[1]], &pts[f[2]]);
        dot(&cross(&sub(b, a), &sub(cc, a)), &sub(x, a))
    };
    let oriented = |f: [usize; 3]| if orient(&f, &c).is_positive() { [f[0], f[2], f[1]] } else { f };
    let mut faces: Vec<[usize; 3]> =
        vec![[0, i1, i2], [0, i1, i3], [0, i2, i3], [i1, i2, i3]].into_iter().map(oriented).collect();

    for (p, x) in pts.iter().enumerate() {
        if four.contains(&p) {
            continue;
        }
        let (visible, kept): (Vec<[usize; 3]>, Vec<[usize; 3]>) =
            faces.iter().partition(|f| orient(f, x).is_positive());
        if visible.is_empty() {
            continue;
        }
        let edges: HashSet<(usize, usize)> =
            visible.iter().flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]).collect();
        faces = kept;
        for &(a, b) in &edges {
            if !edges.contains(&(b, a)) {
                faces.push(oriented([a, b, p]));
            }
        }
    }

    let mut planes: BTreeSet<Halfspace> = BTreeSet::new();
    for f in &faces {
        let a = &pts[f[0]];
        let nrm = cross(&sub(&pts[f[1]], a), &sub(&pts[f[2]], a));
        let off = dot(&nrm, a);
        planes.insert(primitive(nrm, off));
    }
    let mut vertices: BTreeSet<Vector> = BTreeSet::new();
    for h in &planes {
        let on: Vec<Vector> = pts.iter().filter(|x| h.value(x).is_zero()).cloned().collect();
        vertices.extend(plane_cycle(&on, &h.normal));
    }
    (vertices.into_iter().collect(), planes.into_iter().collect())
}

/// Exact convex hull of rational points in `R^n`, `1 <= n <= 3`.
pub fn exact_hull(points: &[Vector]) -> Result<RationalPolytope> {
    let Some(first) = points.first() else { return Err(Error::EmptyCloud) };
    let n = first.len();
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!("exact hulls need 1 <= n <= 3, got n = {n}")));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    let mut pts: Vec<Vector> = points.to_vec();
    pts.sort();
    pts.dedup();
    let p0 = pts[0].clone();

    let mut span = Span::new(n);
    for p in &pts[1..] {
        span.insert(&sub(p, &p0));
    }
    let d = span.dim();
    let pivots: Vec<usize> =
        span.basis().iter().map(|r| r.iter().position(|x| !x.is_zero()).unwrap()).collect();
    let mut equalities = Vec::new();
    for j in (0..n).filter(|j| !pivots.contains(j)) {
        let mut normal = vec![Q::zero(); n];
        normal[j] = Q::from_integer(1);
        for (r, &pc) in span.basis().iter().zip(&pivots) {
            normal[pc] -= r[j];
        }
        let off = dot(&normal, &p0);
        equalities.push(primitive(normal, off));
    }
    let lift = |a: &[Q]| {
        let mut v = vec![Q::zero(); n];
        for (x, &pc) in a.iter().zip(&pivots) {
            v[pc] = *x;
        }
        v
    };
    let chart: Vec<Vector> = pts.iter().map(|p| pivots.iter().map(|&j| p[j]).collect()).collect();

    let (vertices, facets) = match d {
        0 => (vec![p0.clone()], Vec::new()),
        1 => {
            let lo = (0..pts.len()).min_by(|&a, &b| chart[a].cmp(&chart[b])).unwrap();
            let hi = (0..pts.len()).max_by(|&a, &b| chart[a].cmp(&chart[b])).unwrap();
            let one = Q::from_integer(1);
            let facets = vec![
                primitive(lift(&[-one]), -chart[lo][0]),
                primitive(lift(&[one]), chart[hi][0]),
            ];
            (vec![pts[lo].clone(), pts[hi].clone()], facets)
        }
        2 => {
            let cyc = monotone_chain(&chart);
            let mut facets = Vec::new();
            for k in 0..cyc.len() {
                let (u, v) = (&chart[cyc[k]], &chart[cyc[(k + 1) % cyc.len()]]);
                let nrm = vec![v[1] - u[1], u[0] - v[0]];
                let off = dot(&nrm, u);
                facets.push(primitive(lift(&nrm), off));
            }
            (cyc.iter().map(|&i| pts[i].clone()).collect(), facets)
        }
        _ => hull_3d(&pts),
    };
    Ok(RationalPolytope { n, affine_dim: d, vertices, facets, equalities })
}

/// Exact membership; boundary points count as inside.
pub fn contains(p: &RationalPolytope, x: &[Q]) -> Result<bool> {
    if x.len() != p.n {
        return Err(Error::Dimension { expected: p.n, got: x.len() });
    }
    Ok(p.equalities.iter().all(|h| h.value(x).is_zero()) && p.facets.iter().all(|h| !h.value(x).is_positive()))
}

/// Solves `sum_i lambda_i cols[i] = rhs` when the columns are independent; `None` if inconsistent.
fn solve_columns(cols: &[Vector], rhs: &[Q]) -> Option<Vector> {
    let (rows, k) = (rhs.len(), cols.len());
    let mut a: Vec<Vec<Q>> = (0..rows).map(|r| cols.iter().map(|c| c[r]).chain([rhs[r]]).collect()).collect();
    let mut row = 0;
    let mut piv = Vec::new();
    for col in 0..k {
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let lead = a[row][col];
        for x in a[row].iter_mut() {
            *x /= lead;
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..=k {
                    let t = a[row][j];
                    a[r][j] -= f * t;
                }
            }
        }
        piv.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[k].is_zero()) || piv.len() < k {
        return None;
    }
    Some((0..k).map(|i| a[i][k]).collect())
}

/// Writes `x` as a convex combination of at most `n + 1` of the given points.
pub fn caratheodory_decompose(points: &[Vector], x: &[Q]) -> Result<Vec<(Vector, Q)>> {
    let hull = exact_hull(points)?;
    if !contains(&hull, x)? {
        return Err(Error::OutsideHull);
    }
    if hull.vertices.iter().any(|v| v.as_slice() == x) {
        return Ok(vec![(x.to_vec(), Q::from_integer(1))]);
    }
    for simplex in hull.triangulate() {
        let s0 = &simplex[0];
        let cols: Vec<Vector> = simplex[1..].iter().map(|s| sub(s, s0)).collect();
        let Some(lam) = solve_columns(&cols, &sub(x, s0)) else { continue };
        let l0 = Q::from_integer(1) - lam.iter().sum::<Q>();
        if l0.is_negative() || lam.iter().any(Q::is_negative) {
            continue;
        }
        let out: Vec<(Vector, Q)> = std::iter::once((s0.clone(), l0))
            .chain(simplex[1..].iter().cloned().zip(lam))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        return Ok(out);
    }
    Err(Error::OutsideHull)
}

/// Exact points of the hull, `eps`-dense: barycentric grids on every simplex of a triangulation.
pub fn hull_sample(p: &RationalPolytope, eps: &Q) -> Vec<Vector> {
    let mut out: BTreeSet<Vector> = BTreeSet::new();
    for s in p.triangulate() {
        let mut diam_sq = Q::zero();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let d = sub(&s[i], &s[j]);
                diam_sq = diam_sq.max(dot(&d, &d));
            }
        }
        let big_n = ceil_ratio_of_sqrt(&diam_sq, eps).max(1) as i128;
        let mut parts = vec![0i128; s.len()];
        compositions(big_n, 0, &mut parts, &mut |c| {
            let x = (0..p.n).map(|j| s.iter().zip(c).map(|(v, &k)| v[j] * Q::new(k, big_n)).sum()).collect();
            out.insert(x);
        });
    }
    out.into_iter().collect()
}

fn compositions(rest: i128, i: usize, parts: &mut [i128], f: &mut impl FnMut(&[i128])) {
    if i + 1 == parts.len() {
        parts[i] = rest;
        f(parts);
        return;
    }
    for k in 0..=rest {
        parts[i] = k;
        compositions(rest - k, i + 1, parts, f);
    }
}

fn euclid_cloud(points: &[Vector], n: usize) -> Result<PointCloud> {
    PointCloud::new(points.iter().map(|p| ProductPoint::new(TreePoint::root(), p.clone())).collect(), n, 0)
}

#[derive(Debug, Clone, Serialize)]
pub struct BrunnReport {
    pub n: usize,
    pub affine_dim: usize,
    /// Hausdorff distance between the `n`-fold sampled hull and the exact hull sample.
    pub hausdorff: f64,
    pub bound: f64,
    pub passed: bool,
    pub cloud_size: usize,
    pub hull_sample_size: usize,
    pub snapped_generations: Vec<usize>,
    pub snap_error_bound: f64,
    /// Hull point farthest from the `(n - 1)`-fold sampled hull, when farther than `3 eps`.
    pub witness: Option<StrictnessWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictnessWitness {
    #[serde(with = "serde_q::vec")]
    pub point: Vector,
    pub margin: f64,
}

/// Samples `conv^n(points)` and compares it with the exact hull; also looks for a hull point
/// that `conv^{n-1}` misses.
pub fn brunn_verify_rn(points: &[Vector], eps: &Q, opts: &ConvOptions) -> Result<BrunnReport> {
    let hull = exact_hull(points)?;
    let n = hull.n;
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("Brunn verification needs n in {{2, 3}}, got {n}")));
    }
    let seed = euclid_cloud(points, n)?;
    let full = conv_iter_with(&seed, n, eps, opts)?;
    let partial = conv_iter_with(&seed, n - 1, eps, opts)?;
    let sample = hull_sample(&hull, eps);
    let h = hausdorff(&full.cloud, &euclid_cloud(&sample, n)?)?;

    let fpartial: Vec<Vec<f64>> =
        partial.cloud.points().iter().map(|p| p.euclid.iter().map(to_f64).collect()).collect();
    let mut best: (f64, Option<&Vector>) = (0.0, None);
    for x in &sample {
        let fx: Vec<f64> = x.iter().map(to_f64).collect();
        let mut d2 = f64::INFINITY;
        for y in &fpartial {
            d2 = d2.min(fx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum());
            if d2 <= best.0 {
                break;
            }
        }
        if d2 > best.0 {
            best = (d2, Some(x));
        }
    }
    let bound = 3.0 * to_f64(eps);
    let margin = best.0.sqrt();
    let witness = best.1.filter(|_| margin > bound).map(|x| StrictnessWitness { point: x.clone(), margin });
    Ok(BrunnReport {
        n,
        affine_dim: hull.affine_dim,
        hausdorff: h,
        bound,
        passed: h <= bound,
        cloud_size: full.cloud.len(),
        hull_sample_size: sample.len(),
        snapped_generations: full.snapped_generations,
        snap_error_bound: full.snap_error_bound,
        witness,
    })
}

/// Number of hull facets incident to each vertex, for diagnostics.
pub fn vertex_degrees(p: &RationalPolytope) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (i, v) in p.vertices.iter().enumerate() {
        out.insert(i, p.facets.iter().filter(|h| h.value(v).is_zero()).count());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn pts(xs: &[&[i128]]) -> Vec<Vector> {
        xs.iter().map(|p| p.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn square_and_segment() {
        let sq = exact_hull(&pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1], &[1, 0]])).unwrap();
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(sq.facets().len(), 4);
        assert!(contains(&sq, &[q(1, 2), q(1, 2)]).unwrap());
        assert!(!contains(&sq, &[qi(2), qi(0)]).unwrap());
        assert!(contains(&sq, &[qi(1), q(1, 3)]).unwrap());
        let seg = exact_hull(&pts(&[&[0, 0], &[1, 1], &[3, 3]])).unwrap();
        assert_eq!(seg.affine_dim(), 1);
        assert_eq!(seg.vertices(), &pts(&[&[0, 0], &[3, 3]])[..]);
        assert!(contains(&seg, &[qi(2), qi(2)]).unwrap());
        assert!(!contains(&seg, &[qi(2), qi(1)]).unwrap());
        assert!(!contains(&seg, &[qi(4), qi(4)]).unwrap());
    }

    #[test]
    fn cube_with_face_points() {
        let mut p = Vec::new();
        for x in 0..=2 {
            for y in 0..=2 {
                for z in 0..=2 {
                    p.push(vec![qi(x), qi(y), qi(z)]);
                }
            }
        }
        let h = exact_hull(&p).unwrap();
        assert_eq!(h.affine_dim(), 3);
        assert_eq!(h.vertices().len(), 8);
        assert_eq!(h.facets().len(), 6);
        assert!(vertex_degrees(&h).values().all(|&d| d == 3));
        let tri = h.triangulate();
        assert_eq!(tri.iter().map(|s| s.len()).collect::<BTreeSet<_>>(), BTreeSet::from([4]));
    }

    #[test]
    fn flat_in_space() {
        let h = exact_hull(&pts(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]])).unwrap();
        assert_eq!(h.affine_dim(), 2);
        assert_eq!(h.equalities().len(), 1);
        assert!(contains(&h, &[q(1, 2), q(1, 2), qi(1)]).unwrap());
        assert!(!contains(&h, &[q(1, 2), q(1, 2), qi(0)]).unwrap());
        let w = caratheodory_decompose(h.vertices(), &[q(1, 4), q(1, 2), qi(1)]).unwrap();
        assert!(w.len() <= 3);
    }

    #[test]
    fn caratheodory_examples() {
        let tri = pts(&[&[0, 0], &[3, 0], &[0, 3]]);
        let w = caratheodory_decompose(&tri, &[qi(1), qi(1)]).unwrap();
        assert_eq!(w.iter().map(|x| x.1).collect::<Vec<_>>(), vec![q(1, 3); 3]);
        let w = caratheodory_decompose(&tri, &[qi(3), qi(0)]).unwrap();
        assert_eq!(w, vec![(vec![qi(3), qi(0)], qi(1))]);
        assert!(matches!(caratheodory_decompose(&tri, &[qi(3), qi(3)]), Err(Error::OutsideHull)));
        let sq = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let w = caratheodory_decompose(&sq, &[q(1, 2), q(1, 2)]).unwrap();
        let sum: Vector = (0..2).map(|j| w.iter().map(|(p, l)| p[j] * l).sum()).collect();
        assert_eq!(sum, vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn json_round_trip() {
        let h = exact_hull(&pts(&[&[0, 0], &[2, 0], &[0, 1]])).unwrap();
        let s = h.to_json();
        assert!(s.contains(r#""vertices":[["0","0"],["2","0"],["0","1"]]"#), "{s}");
        assert_eq!(RationalPolytope::from_json(&s).unwrap(), h);
    }

    #[test]
    fn dimension_limits() {
        assert!(matches!(exact_hull(&[vec![qi(0); 4]]), Err(Error::Unsupported(_))));
        assert!(matches!(exact_hull(&[]), Err(Error::EmptyCloud)));
        let sq = exact_hull(&pts(&[&[0, 0], &[1, 0]])).unwrap();
        assert!(contains(&sq, &[qi(0)]).is_err());
    }

    #[test]
    fn sample_is_dense_and_inside() {
        let tri = exact_hull(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        let s = hull_sample(&tri, &q(1, 4));
        assert!(s.iter().all(|x| contains(&tri, x).unwrap()));
        assert_eq!(s.len(), 28);
    }

    #[test]
    fn triangle_needs_two_rounds() {
        let tri = vec![vec![qi(0), qi(0)], vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        let r = brunn_verify_rn(&tri, &q(1, 20), &ConvOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        let w = r.witness.expect("conv^1 misses the interior");
        assert!(w.margin > 0.15);
    }
}
