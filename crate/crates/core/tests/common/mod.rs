//! Slow reference implementations shared by the oracle and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_integer::Integer;

pub type W = Vec<i8>;

pub fn push(w: &mut W, x: i8) {
    if w.last() == Some(&-x) {
        w.pop();
    } else {
        w.push(x);
    }
}

pub fn all_words(max_len: usize) -> Vec<W> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for x in [1i8, -1, 2, -2] {
                if w.last() != Some(&-x) {
                    let mut v: W = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn vdist(u: &[i8], v: &[i8]) -> usize {
    let c = u.iter().zip(v).take_while(|(a, b)| a == b).count();
    u.len() + v.len() - 2 * c
}

pub fn path(u: &[i8], v: &[i8]) -> Vec<W> {
    let c = u.iter().zip(v).take_while(|(a, b)| a == b).count();
    let mut out: Vec<W> = (c..=u.len()).rev().map(|k| u[..k].to_vec()).collect();
    out.extend((c + 1..=v.len()).map(|k| v[..k].to_vec()));
    out
}

/// Orbit of the origin under `<(a, s), (b, t)>`, which is free on its generators, so the ball of
/// radius `l` is every reduced word of length `<= l` with euclidean part `s * #a + t * #b`.
pub fn orbit(l: usize, s: f64, t: f64) -> Vec<(W, f64)> {
    all_words(l)
        .into_iter()
        .map(|w| {
            let e = w.iter().map(|&x| x.signum() as f64 * if x.abs() == 1 { s } else { t }).sum();
            (w, e)
        })
        .collect()
}

/// Largest distance from a sample of the pairwise geodesics of `sources` to `targets`; sample
/// spacing is at most `h`, so the true supremum lies within `h / 2` above the returned value.
pub fn sampled_sup(sources: &[(W, f64)], targets: &[(W, f64)], h: f64) -> f64 {
    let mut best = 0.0f64;
    for (i, (u, eu)) in sources.iter().enumerate() {
        for (v, ev) in &sources[i + 1..] {
            let verts = path(u, v);
            let dt = (verts.len() - 1) as f64;
            let len = dt.hypot(ev - eu);
            let n = (len / h).ceil().max(1.0) as usize;
            for k in 0..=n {
                let s = k as f64 / n as f64;
                let t = s * dt;
                let i = (t.floor() as usize).min(verts.len().saturating_sub(2));
                let f = t - i as f64;
                let e = (1.0 - s) * eu + s * ev;
                let (a, b) = (&verts[i], verts.get(i + 1).unwrap_or(&verts[i]));
                let d = targets
                    .iter()
                    .map(|(y, ey)| {
                        let tree = (vdist(a, y) as f64 + f).min(vdist(b, y) as f64 + 1.0 - f);
                        tree.hypot(e - ey)
                    })
                    .fold(f64::INFINITY, f64::min);
                best = best.max(d);
            }
        }
    }
    best
}

/// Every element reachable as a product of `gens` (and inverses) whose partial products all
/// stay within `bound` letters.
pub fn ball_members(gens: &[W], bound: usize) -> BTreeSet<W> {
    let letters: Vec<W> = gens
        .iter()
        .flat_map(|g| [g.clone(), g.iter().rev().map(|x| -x).collect()])
        .collect();
    let mut seen: BTreeSet<W> = BTreeSet::from([vec![]]);
    let mut frontier = vec![W::new()];
    while let Some(w) = frontier.pop() {
        for g in &letters {
            let mut v = w.clone();
            for &x in g {
                push(&mut v, x);
            }
            if v.len() <= bound && seen.insert(v.clone()) {
                frontier.push(v);
            }
        }
    }
    seen
}

pub fn cross(a: &[i128], b: &[i128]) -> [i128; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rank(vs: &[[i128; 3]]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let mut best = 1;
    for a in vs {
        for b in vs {
            let c = cross(a, b);
            if c != [0, 0, 0] {
                best = 2;
                if vs.iter().any(|d| dot(&c, d) != 0) {
                    return 3;
                }
            }
        }
    }
    best
}

pub type Plane = ([i128; 3], i128);

/// Facet planes `n.x <= off` (primitive `n`) and vertices of the hull of integer points in R^3,
/// from every plane through three input points; `None` when the points are coplanar.
pub fn triples_oracle(pts: &[[i128; 3]]) -> Option<(BTreeSet<Plane>, BTreeSet<[i128; 3]>)> {
    let mut planes: BTreeSet<Plane> = BTreeSet::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let u: Vec<i128> = (0..3).map(|c| pts[j][c] - pts[i][c]).collect();
                let v: Vec<i128> = (0..3).map(|c| pts[k][c] - pts[i][c]).collect();
                let mut n = cross(&u, &v);
                if n == [0, 0, 0] {
                    continue;
                }
                let g = n.iter().fold(0i128, |a, x| a.gcd(x));
                n = n.map(|x| x / g);
                let off = dot(&n, &pts[i]);
                let vals: Vec<i128> = pts.iter().map(|p| dot(&n, p) - off).collect();
                if vals.iter().all(|&x| x <= 0) {
                    planes.insert((n, off));
                } else if vals.iter().all(|&x| x >= 0) {
                    planes.insert((n.map(|x| -x), -off));
                }
            }
        }
    }
    if planes.len() < 4 || planes.iter().any(|(n, off)| pts.iter().all(|p| dot(n, p) == *off)) {
        return None;
    }
    // a vertex lies on facet planes whose normals span space; edge and face points do not
    let vertices = pts
        .iter()
        .filter(|p| {
            let on: Vec<[i128; 3]> = planes.iter().filter(|(n, off)| dot(n, *p) == *off).map(|(n, _)| *n).collect();
            rank(&on) == 3
        })
        .copied()
        .collect();
    Some((planes, vertices))
}

pub const MEMBERSHIP_SUBGROUPS: [&[&str]; 4] = [&["aa", "bb", "ab"], &["ab", "bA"], &["a", "bab"], &["aab", "bbA", "abA"]];

fn letters_of(w: &str) -> W {
    let word: qchull::freegroup::Word = w.parse().unwrap();
    word.letters().to_vec()
}

/// Stallings membership against the reference ball, on `per_subgroup` queries of length `<= 6`
/// for each subgroup (half drawn from the subgroup): `(agreements, queries)`.
pub fn membership_agreement(seed: u64, per_subgroup: usize) -> (usize, usize) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let everything = all_words(6);
    let (mut agree, mut total) = (0, 0);
    for gens in MEMBERSHIP_SUBGROUPS {
        let words: Vec<qchull::freegroup::Word> = gens.iter().map(|w| w.parse().unwrap()).collect();
        let graph = qchull::freegroup::fold(&words);
        let seen = ball_members(&gens.iter().map(|w| letters_of(w)).collect::<Vec<_>>(), 10);
        let inside: Vec<&W> = seen.iter().filter(|w| w.len() <= 6).collect();
        for k in 0..per_subgroup {
            let q: &W = if k % 2 == 0 {
                inside[rng.gen_range(0..inside.len())]
            } else {
                &everything[rng.gen_range(0..everything.len())]
            };
            let w = qchull::freegroup::Word::from_letters(&q.iter().map(|&x| x as i32).collect::<Vec<_>>(), 2).unwrap();
            total += 1;
            if qchull::freegroup::member(&graph, &w) == seen.contains(q) {
                agree += 1;
            }
        }
    }
    (agree, total)
}

/// Compares `exact_hull` with [`triples_oracle`] on `count` full-dimensional random sets of nine
/// lattice points in `[-5, 5]^3`: `(vertex sets equal, facet sets equal)` counts.
pub fn hull_agreement(seed: u64, count: usize) -> (usize, usize) {
    use rand::{Rng, SeedableRng};
    use qchull::rational::Q;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut same_vertices, mut same_facets, mut done) = (0, 0, 0);
    while done < count {
        let pts: BTreeSet<[i128; 3]> = (0..9).map(|_| [0; 3].map(|_: i128| rng.gen_range(-5i128..=5))).collect();
        let pts: Vec<[i128; 3]> = pts.into_iter().collect();
        let Some((planes, vertices)) = triples_oracle(&pts) else { continue };
        let input: Vec<Vec<Q>> = pts.iter().map(|p| p.iter().map(|&x| Q::from_integer(x)).collect()).collect();
        let hull = qchull::euclid_hull::exact_hull(&input).unwrap();
        let got: BTreeSet<[i128; 3]> = hull.vertices().iter().map(|v| [0, 1, 2].map(|c| v[c].to_integer())).collect();
        let facets: BTreeSet<Plane> = hull
            .facets()
            .iter()
            .filter(|f| f.normal.iter().all(|x| x.is_integer()) && f.offset.is_integer())
            .map(|f| ([0, 1, 2].map(|c| f.normal[c].to_integer()), f.offset.to_integer()))
            .collect();
        same_vertices += usize::from(got == vertices && hull.affine_dim() == 3);
        same_facets += usize::from(facets == planes && facets.len() == hull.facets().len());
        done += 1;
    }
    (same_vertices, same_facets)
}
