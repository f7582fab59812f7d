//! The product space `T_{2m} x R^n` with the l2 product metric, and the action of `F_m x Z^n`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freegroup::Word;
use crate::rational::{fmt_q, serde_q, to_f64, unit_interval_contains, Q};
use crate::tree::{tree_distance, TreeArc, TreePoint};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductPoint {
    pub tree: TreePoint,
    #[serde(with = "serde_q::vec")]
    pub euclid: Vec<Q>,
}

impl ProductPoint {
    pub fn new(tree: TreePoint, euclid: Vec<Q>) -> Self {
        ProductPoint { tree, euclid }
    }

    /// The default basepoint `(root, 0)`.
    pub fn origin(n: usize) -> Self {
        ProductPoint { tree: TreePoint::root(), euclid: vec![Q::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.euclid.len()
    }
}

impl fmt::Debug for ProductPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.euclid.iter().map(fmt_q).collect();
        write!(f, "({}; {})", self.tree, e.join(", "))
    }
}

/// An element `(f, z)` of `F_m x Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    #[serde(rename = "word")]
    pub free: Word,
    pub trans: Vec<i64>,
}

impl GroupElement {
    pub fn new(free: Word, trans: Vec<i64>) -> Self {
        GroupElement { free, trans }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { free: Word::identity(), trans: vec![0; n] }
    }

    pub fn is_identity(&self) -> bool {
        self.free.is_identity() && self.trans.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.trans.len(), other.trans.len());
        GroupElement {
            free: self.free.mul(&other.free),
            trans: self.trans.iter().zip(&other.trans).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { free: self.free.inverse(), trans: self.trans.iter().map(|x| -x).collect() }
    }

    pub fn pow(&self, k: i64) -> GroupElement {
        GroupElement { free: self.free.pow(k), trans: self.trans.iter().map(|x| x * k).collect() }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.trans.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, [{}])", if self.free.is_identity() { "1".into() } else { self.free.to_string() }, t.join(","))
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension { expected: a, got: b });
    }
    Ok(())
}

pub fn euclid_distance_sq(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| {
        let d = x - y;
        acc + d * d
    })
}

pub fn distance_sq(p: &ProductPoint, q: &ProductPoint) -> Result<Q> {
    check_dims(p.dim(), q.dim())?;
    let t = tree_distance(&p.tree, &q.tree);
    Ok(t * t + euclid_distance_sq(&p.euclid, &q.euclid))
}

pub fn distance(p: &ProductPoint, q: &ProductPoint) -> Result<f64> {
    Ok(to_f64(&distance_sq(p, q)?).sqrt())
}

/// Geodesic between two product points, prepared for evaluation at many parameters.
#[derive(Debug, Clone)]
pub struct ProductArc<'a> {
    p: &'a ProductPoint,
    q: &'a ProductPoint,
    tree: TreeArc,
}

impl<'a> ProductArc<'a> {
    pub fn new(p: &'a ProductPoint, q: &'a ProductPoint) -> Result<Self> {
        check_dims(p.dim(), q.dim())?;
        Ok(ProductArc { p, q, tree: TreeArc::new(&p.tree, &q.tree) })
    }

    pub fn distance_sq(&self) -> Q {
        let t = *self.tree.length();
        t * t + euclid_distance_sq(&self.p.euclid, &self.q.euclid)
    }

    /// Point at parameter `s` in `[0, 1]` (unchecked).
    pub fn eval(&self, s: &Q) -> ProductPoint {
        if s.is_zero() {
            return self.p.clone();
        }
        if s.is_one() {
            return self.q.clone();
        }
        let tree = self.tree.point_at(&(*self.tree.length() * s));
        let euclid = self.p.euclid.iter().zip(&self.q.euclid).map(|(a, b)| a + (b - a) * s).collect();
        ProductPoint { tree, euclid }
    }
}

pub fn geodesic_eval(p: &ProductPoint, q: &ProductPoint, s: &Q) -> Result<ProductPoint> {
    if !unit_interval_contains(s) {
        return Err(Error::OutOfRange(format!("geodesic parameter {} not in [0,1]", fmt_q(s))));
    }
    Ok(ProductArc::new(p, q)?.eval(s))
}

pub fn apply(g: &GroupElement, p: &ProductPoint) -> Result<ProductPoint> {
    check_dims(g.trans.len(), p.dim())?;
    Ok(ProductPoint {
        tree: p.tree.translate(&g.free),
        euclid: p.euclid.iter().zip(&g.trans).map(|(x, t)| x + Q::from_integer(*t as i128)).collect(),
    })
}
