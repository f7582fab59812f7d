//! Exact linear algebra for translation vectors: integer lattices and rational spans.

use num_traits::Zero;
use serde::Serialize;

use crate::rational::Q;

/// A sublattice of `Z^n` kept as a row-style Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lattice {
    n: usize,
    rows: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn new(n: usize) -> Self {
        Lattice { n, rows: Vec::new() }
    }

    pub fn generated_by<'a>(n: usize, vs: impl IntoIterator<Item = &'a Vec<i64>>) -> Self {
        let mut l = Lattice::new(n);
        for v in vs {
            l.insert(v);
        }
        l
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn pivot(v: &[i64]) -> Option<usize> {
        v.iter().position(|&x| x != 0)
    }

    /// Adds a generator, keeping echelon form with positive pivots and reduced entries above them.
    pub fn insert(&mut self, v: &[i64]) {
        assert_eq!(v.len(), self.n);
        let mut cur = v.to_vec();
        let mut k = 0;
        while k < self.rows.len() {
            let Some(p) = Self::pivot(&cur) else { return };
            let rp = Self::pivot(&self.rows[k]).unwrap();
            if rp < p {
                k += 1;
                continue;
            }
            if rp > p {
                break;
            }
            // same pivot column: Euclid on the pivot entries
            let mut a = std::mem::take(&mut self.rows[k]);
            while cur[p] != 0 {
                let qt = a[p].div_euclid(cur[p]);
                for j in 0..self.n {
                    a[j] -= qt * cur[j];
                }
                std::mem::swap(&mut a, &mut cur);
            }
            self.rows[k] = a;
            k += 1;
        }
        if Self::pivot(&cur).is_some() {
            self.rows.push(cur);
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        self.rows.retain(|r| Self::pivot(r).is_some());
        self.rows.sort_by_key(|r| Self::pivot(r).unwrap());
        for i in 0..self.rows.len() {
            let p = Self::pivot(&self.rows[i]).unwrap();
            if self.rows[i][p] < 0 {
                for x in self.rows[i].iter_mut() {
                    *x = -*x;
                }
            }
            let piv = self.rows[i].clone();
            for k in 0..i {
                let qt = self.rows[k][p].div_euclid(piv[p]);
                if qt != 0 {
                    for j in 0..self.n {
                        self.rows[k][j] -= qt * piv[j];
                    }
                }
            }
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut cur = v.to_vec();
        for r in &self.rows {
            let p = Self::pivot(r).unwrap();
            if cur[p] % r[p] != 0 {
                return false;
            }
            let qt = cur[p] / r[p];
            for j in 0..self.n {
                cur[j] -= qt * r[j];
            }
        }
        cur.iter().all(|&x| x == 0)
    }
}

/// Row-echelon basis of a rational subspace of `Q^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    n: usize,
    rows: Vec<Vec<Q>>,
}

impl Span {
    pub fn new(n: usize) -> Self {
        Span { n, rows: Vec::new() }
    }

    pub fn of_integer_vectors<'a>(n: usize, vs: impl IntoIterator<Item = &'a Vec<i64>>) -> Self {
        let mut s = Span::new(n);
        for v in vs {
            s.insert(&v.iter().map(|&x| Q::from_integer(x as i128)).collect::<Vec<_>>());
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.rows
    }

    fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut cur = v.to_vec();
        for r in &self.rows {
            let p = r.iter().position(|x| !x.is_zero()).unwrap();
            if !cur[p].is_zero() {
                let f = cur[p] / r[p];
                for j in 0..self.n {
                    cur[j] -= f * r[j];
                }
            }
        }
        cur
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        let cur = self.reduce(v);
        let Some(p) = cur.iter().position(|x| !x.is_zero()) else { return false };
        let lead = cur[p];
        let cur: Vec<Q> = cur.iter().map(|x| x / lead).collect();
        for r in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p];
                for j in 0..self.n {
                    r[j] -= f * cur[j];
                }
            }
        }
        self.rows.push(cur);
        self.rows.sort_by_key(|r| r.iter().position(|x| !x.is_zero()).unwrap());
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }
}

/// Rank of a list of rational vectors.
pub fn rational_rank(vs: &[Vec<Q>]) -> usize {
    let n = vs.first().map_or(0, |v| v.len());
    let mut s = Span::new(n);
    for v in vs {
        s.insert(v);
    }
    s.dim()
}
