//! Finitely generated subgroups `H <= F_m x Z^n`: orbit balls, pure translations, the
//! virtually-product classifier, and hull structure probes.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bound::sup_distance_over_hull;
use crate::convexify::{conv1_farthest, conv_iter_with, ConvOptions, PointCloud};
use crate::error::{Error, Result};
use crate::freegroup::{fold, member, same_axis, StallingsGraph, Word, MAX_RANK};
use crate::index::CloudIndex;
use crate::lattice::{Lattice, Span};
use crate::product::{apply, ProductArc, ProductPoint};
use crate::rational::{ceil_ratio_of_sqrt, to_f64, Q};
use crate::tree::{tree_hull, TreeHull};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub word: Word,
    #[serde(default)]
    pub trans: Vec<i64>,
}

/// A generating set `(f_i, z_i)` of a subgroup of `F_m x Z^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGens {
    m: usize,
    n: usize,
    gens: Vec<crate::product::GroupElement>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SubgroupFile {
    m: usize,
    n: usize,
    gens: Vec<GeneratorSpec>,
}

use crate::product::GroupElement;

impl SubgroupGens {
    pub fn new(m: usize, n: usize, gens: Vec<GroupElement>) -> Result<Self> {
        if m > MAX_RANK {
            return Err(Error::OutOfRange(format!("free rank {m} exceeds {MAX_RANK}")));
        }
        if gens.is_empty() {
            return Err(Error::Precondition("a subgroup needs at least one generator".into()));
        }
        for (i, g) in gens.iter().enumerate() {
            if g.trans.len() != n {
                return Err(Error::Parse(format!(
                    "gens[{i}].trans: expected {n} entries, found {}",
                    g.trans.len()
                )));
            }
            if g.free.max_generator() > m {
                return Err(Error::Parse(format!("gens[{i}].word: {} uses a generator beyond rank {m}", g.free)));
            }
        }
        Ok(SubgroupGens { m, n, gens })
    }

    /// Convenience constructor from `(word, trans)` pairs.
    pub fn parse(m: usize, n: usize, gens: &[(&str, &[i64])]) -> Result<Self> {
        let gens = gens
            .iter()
            .enumerate()
            .map(|(i, (w, t))| {
                let free = w.parse().map_err(|e| Error::Parse(format!("gens[{i}].word: {e}")))?;
                Ok(GroupElement::new(free, t.to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, n, gens)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SubgroupFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        f.into_gens()
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let f: SubgroupFile = toml::from_str(s).map_err(|e| Error::Parse(e.message().to_string() + &field_hint(&e)))?;
        f.into_gens()
    }

    pub fn to_json(&self) -> String {
        let f = SubgroupFile {
            m: self.m,
            n: self.n,
            gens: self.gens.iter().map(|g| GeneratorSpec { word: g.free.clone(), trans: g.trans.clone() }).collect(),
        };
        serde_json::to_string(&f).expect("subgroup serializes")
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &[GroupElement] {
        &self.gens
    }

    /// Evaluates a word in the generators, given as signed 1-based generator indices.
    pub fn evaluate(&self, word: &[i32]) -> Result<GroupElement> {
        let mut acc = GroupElement::identity(self.n);
        for &x in word {
            let i = x.unsigned_abs() as usize;
            if x == 0 || i > self.gens.len() {
                return Err(Error::OutOfRange(format!("generator index {x}")));
            }
            let g = &self.gens[i - 1];
            acc = acc.mul(&if x > 0 { g.clone() } else { g.inverse() });
        }
        Ok(acc)
    }
}

fn field_hint(e: &toml::de::Error) -> String {
    e.span().map(|s| format!(" (at bytes {}..{})", s.start, s.end)).unwrap_or_default()
}

impl SubgroupFile {
    fn into_gens(self) -> Result<SubgroupGens> {
        let gens = self.gens.into_iter().map(|g| GroupElement::new(g.word, g.trans)).collect();
        SubgroupGens::new(self.m, self.n, gens)
    }
}

// ---------------------------------------------------------------------------------------------
// Balls in the generators

/// Elements that are products of at most `L` generators or inverses, with shortest spellings.
#[derive(Debug, Clone)]
pub struct Ball {
    elements: Vec<GroupElement>,
    parent: Vec<(u32, i32)>,
    depth: Vec<u32>,
    index: HashMap<GroupElement, u32>,
}

impl Ball {
    pub fn enumerate(h: &SubgroupGens, l: usize) -> Ball {
        let id = GroupElement::identity(h.n);
        let mut ball = Ball {
            elements: vec![id.clone()],
            parent: vec![(u32::MAX, 0)],
            depth: vec![0],
            index: HashMap::from([(id, 0)]),
        };
        let steps: Vec<(i32, GroupElement)> = h
            .gens
            .iter()
            .enumerate()
            .flat_map(|(i, g)| [((i + 1) as i32, g.clone()), (-((i + 1) as i32), g.inverse())])
            .collect();
        let mut frontier = vec![0u32];
        for d in 1..=l {
            let mut next = Vec::new();
            for &e in &frontier {
                for (label, s) in &steps {
                    let x = ball.elements[e as usize].mul(s);
                    if ball.index.contains_key(&x) {
                        continue;
                    }
                    let id = ball.elements.len() as u32;
                    ball.index.insert(x.clone(), id);
                    ball.elements.push(x);
                    ball.parent.push((e, *label));
                    ball.depth.push(d as u32);
                    next.push(id);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        ball
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i] as usize
    }

    /// A shortest spelling of element `i` as signed 1-based generator indices.
    pub fn spelling(&self, i: usize) -> Vec<i32> {
        let mut out = Vec::new();
        let mut cur = i as u32;
        while self.parent[cur as usize].0 != u32::MAX {
            let (p, label) = self.parent[cur as usize];
            out.push(label);
            cur = p;
        }
        out.reverse();
        out
    }
}

#[derive(Debug, Clone)]
pub struct OrbitBall {
    pub cloud: PointCloud,
    /// Group element for every orbit point, aligned with `cloud.points()`.
    pub labels: Vec<GroupElement>,
}

/// `{h x0 : h a product of at most L generators or inverses}`.
pub fn orbit_ball(h: &SubgroupGens, x0: &ProductPoint, l: usize) -> Result<OrbitBall> {
    if x0.dim() != h.n {
        return Err(Error::Dimension { expected: h.n, got: x0.dim() });
    }
    let ball = Ball::enumerate(h, l);
    let mut pairs: BTreeMap<ProductPoint, GroupElement> = BTreeMap::new();
    for g in ball.elements() {
        let p = apply(g, x0)?;
        pairs.entry(p).or_insert_with(|| g.clone());
    }
    let (points, labels): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let m = h.m.max(x0.tree.child().map_or(x0.tree.base().max_generator(), |c| c.max_generator()));
    Ok(OrbitBall { cloud: PointCloud::new(points, h.n, m)?, labels })
}

// ---------------------------------------------------------------------------------------------
// Pure translations

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationWitness {
    /// 1-based generator whose direction this translation is a power of, if any.
    pub generator: Option<usize>,
    /// Least `k > 0` with `k * z_i` found, when `generator` is set.
    pub k: Option<i64>,
    pub trans: Vec<i64>,
    /// Spelling in the generators (signed 1-based indices).
    pub witness: Vec<i32>,
}

fn positive_multiple(v: &[i64], z: &[i64]) -> Option<i64> {
    let (j, &zj) = z.iter().enumerate().find(|(_, &x)| x != 0)?;
    if v[j] % zj != 0 {
        return None;
    }
    let k = v[j] / zj;
    (k > 0 && v.iter().zip(z).all(|(a, b)| *a == k * b)).then_some(k)
}

/// Pure translations `(1, v)` among products of at most `L` generators.
///
/// Reports, for every generator direction `z_i`, the least `k_i > 0` with `(1, k_i z_i)` found,
/// followed by every other nonzero pure translation found (deduplicated). All witnesses are
/// re-verified by multiplying out their spelling.
pub fn find_translation_powers(h: &SubgroupGens, l: usize) -> Result<Vec<TranslationWitness>> {
    let ball = Ball::enumerate(h, l);
    find_translations_in(h, &ball)
}

fn find_translations_in(h: &SubgroupGens, ball: &Ball) -> Result<Vec<TranslationWitness>> {
    let mut pure: Vec<(usize, &GroupElement)> = ball
        .elements()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.free.is_identity() && g.trans.iter().any(|&x| x != 0))
        .collect();
    pure.sort_by(|a, b| (ball.depth(a.0), &a.1.trans).cmp(&(ball.depth(b.0), &b.1.trans)));
    let mut out = Vec::new();
    let mut used = vec![false; pure.len()];
    for (gi, g) in h.gens.iter().enumerate() {
        if g.trans.iter().all(|&x| x == 0) {
            continue;
        }
        let best = pure
            .iter()
            .enumerate()
            .filter_map(|(pi, (_, e))| positive_multiple(&e.trans, &g.trans).map(|k| (k, pi)))
            .min();
        if let Some((k, pi)) = best {
            used[pi] = true;
            let (idx, e) = pure[pi];
            out.push(TranslationWitness {
                generator: Some(gi + 1),
                k: Some(k),
                trans: e.trans.clone(),
                witness: ball.spelling(idx),
            });
        }
    }
    for (pi, (idx, e)) in pure.iter().enumerate() {
        if !used[pi] && !out.iter().any(|w| w.trans == e.trans) {
            out.push(TranslationWitness { generator: None, k: None, trans: e.trans.clone(), witness: ball.spelling(*idx) });
        }
    }
    for w in &out {
        let g = h.evaluate(&w.witness)?;
        if !g.free.is_identity() || g.trans != w.trans {
            return Err(Error::Precondition(format!("translation witness {:?} failed to verify", w.witness)));
        }
    }
    Ok(out)
}

/// Whether two generators with non-identity free parts fail to commute.
pub fn distinct_axes(h: &SubgroupGens) -> Result<bool> {
    let free: Vec<&Word> = h.gens.iter().map(|g| &g.free).filter(|w| !w.is_identity()).collect();
    if free.is_empty() {
        return Err(Error::Precondition("all free parts are trivial".into()));
    }
    for i in 0..free.len() {
        for j in i + 1..free.len() {
            if !same_axis(free[i], free[j])? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------------------------
// Classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    VirtuallyProduct,
    GraphLikeNoWitness,
    SingleAxis,
    PureFree,
    PureAbelian,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::VirtuallyProduct => "virtually-product",
            Verdict::GraphLikeNoWitness => "graph-like-no-witness",
            Verdict::SingleAxis => "single-axis",
            Verdict::PureFree => "pure-free",
            Verdict::PureAbelian => "pure-abelian",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerWitness {
    /// 1-based generator index.
    pub generator: usize,
    pub exponent: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// Free basis of the recovered `H ∩ F_m`.
    pub a_gens: Vec<Word>,
    /// Basis of the recovered lattice `H ∩ Z^n`.
    pub b_gens: Vec<Vec<i64>>,
    pub powers: Vec<PowerWitness>,
    pub bound: usize,
    pub image_rank: usize,
    pub translations: Vec<TranslationWitness>,
}

/// Decides, up to the search bound `L`, whether `H` is virtually `A x B` with `A <= F_m`,
/// `B <= Z^n`.
pub fn classify(h: &SubgroupGens, l: usize) -> Result<ClassificationReport> {
    let image = fold(&h.gens.iter().map(|g| g.free.clone()).collect::<Vec<_>>());
    let image_rank = image.rank();
    let all_trivial_free = h.gens.iter().all(|g| g.free.is_identity());
    let all_zero_trans = h.gens.iter().all(|g| g.trans.iter().all(|&x| x == 0));
    let unit_powers = || (1..=h.gens.len()).map(|i| PowerWitness { generator: i, exponent: 1 }).collect();

    if all_trivial_free {
        let lattice = Lattice::generated_by(h.n, h.gens.iter().map(|g| &g.trans));
        return Ok(ClassificationReport {
            verdict: Verdict::PureAbelian,
            a_gens: Vec::new(),
            b_gens: lattice.basis().to_vec(),
            powers: unit_powers(),
            bound: l,
            image_rank,
            translations: Vec::new(),
        });
    }
    if all_zero_trans {
        return Ok(ClassificationReport {
            verdict: Verdict::PureFree,
            a_gens: image.free_basis(),
            b_gens: Vec::new(),
            powers: unit_powers(),
            bound: l,
            image_rank,
            translations: Vec::new(),
        });
    }
    if image_rank <= 1 || !distinct_axes(h)? {
        return Ok(ClassificationReport {
            verdict: Verdict::SingleAxis,
            a_gens: Vec::new(),
            b_gens: Vec::new(),
            powers: Vec::new(),
            bound: l,
            image_rank,
            translations: Vec::new(),
        });
    }

    let ball = Ball::enumerate(h, l);
    let translations = find_translations_in(h, &ball)?;
    let lattice = Lattice::generated_by(h.n, translations.iter().map(|w| &w.trans));
    let kernel: Vec<Word> = ball
        .elements()
        .iter()
        .filter(|g| g.trans.iter().all(|&x| x == 0) && !g.free.is_identity())
        .map(|g| g.free.clone())
        .collect();
    let f_graph: StallingsGraph = fold(&kernel);

    let mut powers = Vec::new();
    for (i, g) in h.gens.iter().enumerate() {
        let found = (1..=l as i64).find(|&s| {
            let gs = g.pow(s);
            member(&f_graph, &gs.free) && lattice.contains(&gs.trans)
        });
        if let Some(s) = found {
            powers.push(PowerWitness { generator: i + 1, exponent: s });
        }
    }
    // re-verify every power witness
    for p in &powers {
        let gs = h.gens[p.generator - 1].pow(p.exponent);
        if !(member(&f_graph, &gs.free) && lattice.contains(&gs.trans)) {
            return Err(Error::Precondition(format!("power witness for generator {} failed", p.generator)));
        }
    }
    let verdict =
        if powers.len() == h.gens.len() { Verdict::VirtuallyProduct } else { Verdict::GraphLikeNoWitness };
    Ok(ClassificationReport {
        verdict,
        a_gens: f_graph.free_basis(),
        b_gens: lattice.basis().to_vec(),
        powers,
        bound: l,
        image_rank,
        translations,
    })
}

// ---------------------------------------------------------------------------------------------
// Hull structure

/// How a reported quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Every generation was materialised (with grid snapping if the cap required it).
    Enumerated,
    /// conv^1 was streamed exactly; later generations are covered by a convexity certificate.
    Certified,
    /// Only a lower and an upper bound are available.
    Bounds,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullProductReport {
    pub violations: usize,
    pub examples: Vec<ProductPoint>,
    pub points_checked: u64,
    pub dim_v: usize,
    pub v_basis: Vec<Vec<String>>,
    pub iterations: usize,
    pub method: Method,
    pub enumerated_generations: usize,
    pub orbit_size: usize,
    pub tree_hull_edges: usize,
}

#[derive(Debug, Clone)]
pub struct HullOptions {
    pub conv: ConvOptions,
    /// Largest pair count attempted for literal enumeration of a generation.
    pub literal_pair_budget: u64,
    pub bound_tolerance: f64,
    pub max_cells: u64,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            conv: ConvOptions::default(),
            literal_pair_budget: 2_000_000,
            bound_tolerance: 1e-6,
            max_cells: 20_000_000,
        }
    }
}

fn translation_span(h: &SubgroupGens, l: usize) -> Result<(Span, Vec<TranslationWitness>)> {
    let t = find_translation_powers(h, l)?;
    Ok((Span::of_integer_vectors(h.n, t.iter().map(|w| &w.trans)), t))
}

struct ProductSet {
    hull: TreeHull,
    span: Span,
    x0: Vec<Q>,
}

impl ProductSet {
    fn contains(&self, p: &ProductPoint) -> bool {
        let v: Vec<Q> = p.euclid.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        self.span.contains(&v) && self.hull.contains(&p.tree)
    }
}

/// Checks that the sampled hull of an orbit ball lies in `tree_hull(p(orbit)) x (x0 + V)`.
///
/// When the `1 + dim V` generations are too large to materialise, conv^1 is checked exactly by
/// streaming; the target set is convex, so it then contains every later generation too.
pub fn hull_product_check(
    h: &SubgroupGens,
    x0: &ProductPoint,
    l: usize,
    eps: &Q,
    opts: &HullOptions,
) -> Result<HullProductReport> {
    if !distinct_axes(h)? {
        return Err(Error::Precondition("all free parts share an axis".into()));
    }
    let (span, _) = translation_span(h, l)?;
    let orbit = orbit_ball(h, x0, l)?;
    let trees: Vec<_> = orbit.cloud.points().iter().map(|p| p.tree.clone()).collect();
    let set = ProductSet { hull: tree_hull(&trees), span, x0: x0.euclid.clone() };
    let iterations = 1 + set.span.dim();

    let mut violations = 0usize;
    let mut examples = Vec::new();
    let mut checked = 0u64;
    let mut check = |p: &ProductPoint| {
        checked += 1;
        if !set.contains(p) {
            violations += 1;
            if examples.len() < 10 {
                examples.push(p.clone());
            }
        }
    };

    let conv = ConvOptions { pair_budget: Some(opts.literal_pair_budget), ..opts.conv.clone() };
    let (method, enumerated) = match conv_iter_with(&orbit.cloud, iterations, eps, &conv) {
        Ok(run) => {
            run.cloud.points().iter().for_each(&mut check);
            (Method::Enumerated, iterations)
        }
        Err(Error::BudgetExceeded(_)) | Err(Error::CapExceeded { .. }) => {
            let pts = orbit.cloud.points();
            pts.iter().for_each(&mut check);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let arc = ProductArc::new(&pts[i], &pts[j])?;
                    let n = ceil_ratio_of_sqrt(&arc.distance_sq(), eps) as i128;
                    for k in 1..n {
                        check(&arc.eval(&Q::new(k, n)));
                    }
                }
            }
            (Method::Certified, 1)
        }
        Err(e) => return Err(e),
    };
    let v_basis = set.span.basis().iter().map(|r| r.iter().map(crate::rational::fmt_q).collect()).collect();
    Ok(HullProductReport {
        violations,
        examples,
        points_checked: checked,
        dim_v: set.span.dim(),
        v_basis,
        iterations,
        method,
        enumerated_generations: enumerated,
        orbit_size: orbit.cloud.len(),
        tree_hull_edges: set.hull.edges.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CocompactnessReport {
    pub bound: usize,
    /// `R(L)`: the largest distance found from the sampled hull to the orbit ball at `L + 2`.
    pub radius: f64,
    /// Upper bound over the whole hull; equals `radius` up to tolerance when certified.
    pub upper_bound: f64,
    pub method: Method,
    pub dim_v: usize,
    pub iterations: usize,
    pub orbit_size: usize,
    pub target_size: usize,
    pub witness: ProductPoint,
}

/// `R(L)`: how far the `(1 + dim V)`-fold sampled hull of the orbit ball at `L` strays from the
/// orbit ball at `L + 2`.
pub fn cocompactness_radius(
    h: &SubgroupGens,
    x0: &ProductPoint,
    l: usize,
    eps: &Q,
    opts: &HullOptions,
) -> Result<CocompactnessReport> {
    let (span, _) = translation_span(h, l)?;
    let dim_v = span.dim();
    let iterations = 1 + dim_v;
    let orbit = orbit_ball(h, x0, l)?;
    let target = orbit_ball(h, x0, l + 2)?;
    let sources = orbit.cloud.points();
    let targets = target.cloud.points();

    let streamed = conv1_farthest(sources, targets, eps)?;
    let base = |radius: f64, upper: f64, method: Method, witness: ProductPoint| CocompactnessReport {
        bound: l,
        radius,
        upper_bound: upper,
        method,
        dim_v,
        iterations,
        orbit_size: sources.len(),
        target_size: targets.len(),
        witness,
    };
    if iterations == 1 {
        return Ok(base(streamed.value, streamed.value, Method::Enumerated, streamed.witness));
    }

    let conv = ConvOptions { pair_budget: Some(opts.literal_pair_budget), ..opts.conv.clone() };
    match conv_iter_with(&orbit.cloud, iterations, eps, &conv) {
        Ok(run) => {
            let idx = CloudIndex::new(targets, run.cloud.points());
            let mut best = (streamed.value, streamed.witness.clone());
            for p in run.cloud.points() {
                let pos = idx.locate(&p.tree).expect("indexed");
                let e: Vec<f64> = p.euclid.iter().map(to_f64).collect();
                let (d, _) = idx.nearest(&pos, &e, best.0);
                if d > best.0 {
                    best = (d, p.clone());
                }
            }
            Ok(base(best.0, best.0, Method::Enumerated, best.1))
        }
        Err(Error::BudgetExceeded(_)) | Err(Error::CapExceeded { .. }) => {
            let sup = sup_distance_over_hull(
                sources,
                targets,
                x0,
                streamed.value,
                opts.bound_tolerance,
                opts.max_cells,
            );
            let method = if sup.converged && sup.upper - streamed.value <= opts.bound_tolerance + 1e-9 {
                Method::Certified
            } else {
                Method::Bounds
            };
            Ok(base(streamed.value, sup.upper.max(streamed.value), method, streamed.witness))
        }
        Err(e) => Err(e),
    }
}
