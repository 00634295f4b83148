//! Sparse exact linear algebra: incremental row echelon over ordered keys.
//!
//! Vectors are sparse maps from an ordered key (usually a monomial) to a
//! rational.  Every inserted vector gets a running index, and each stored row
//! remembers which combination of inserted vectors produced it, so the same
//! structure answers rank, kernel, membership and solve queries.

use std::collections::BTreeMap;
use std::ops::Bound::{Excluded, Unbounded};

use num_traits::{One, Zero};

use crate::rational::Q;

pub type SparseVec<K> = BTreeMap<K, Q>;

/// `y += a * x`, dropping cancelled entries.
pub fn axpy<K: Ord + Clone>(y: &mut SparseVec<K>, a: &Q, x: &SparseVec<K>) {
    if a.is_zero() {
        return;
    }
    for (k, c) in x {
        let v = a * c;
        match y.get_mut(k) {
            Some(e) => {
                *e += v;
                if e.is_zero() {
                    y.remove(k);
                }
            }
            None => {
                y.insert(k.clone(), v);
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Row<K> {
    vec: SparseVec<K>,
    combo: SparseVec<usize>,
}

/// Outcome of inserting a vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Insert<K> {
    /// New pivot at this key.
    Pivot(K),
    /// Dependent; the combination of inserted vectors that vanishes.
    Dependent(SparseVec<usize>),
}

#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    inserted: usize,
    kernel: Vec<SparseVec<usize>>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: BTreeMap::new(), inserted: 0, kernel: Vec::new() }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a list of vectors inserted in order.
    pub fn from_vectors<'a, I>(vs: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseVec<K>>,
        K: 'a,
    {
        let mut e = Self::new();
        for v in vs {
            e.insert(v.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Kernel vectors found so far, one per dependent insertion.
    pub fn kernel(&self) -> &[SparseVec<usize>] {
        &self.kernel
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    pub fn is_pivot(&self, k: &K) -> bool {
        self.rows.contains_key(k)
    }

    /// Eliminate pivots from `v` in increasing key order.  Returns the
    /// remainder and the combination `c` with `v - remainder = sum c_j v_j`.
    pub fn reduce(&self, v: &SparseVec<K>) -> (SparseVec<K>, SparseVec<usize>) {
        let mut rem = v.clone();
        let mut combo = SparseVec::new();
        let mut cursor: Option<K> = None;
        loop {
            let next = match &cursor {
                None => rem.keys().next().cloned(),
                Some(c) => rem.range((Excluded(c), Unbounded)).next().map(|(k, _)| k.clone()),
            };
            let Some(k) = next else { break };
            if let Some(row) = self.rows.get(&k) {
                let c = rem[&k].clone();
                axpy(&mut rem, &-c.clone(), &row.vec);
                axpy(&mut combo, &c, &row.combo);
            }
            cursor = Some(k);
        }
        (rem, combo)
    }

    /// Insert the next vector.
    pub fn insert(&mut self, v: SparseVec<K>) -> Insert<K> {
        let idx = self.inserted;
        self.inserted += 1;
        let (mut rem, combo) = self.reduce(&v);
        // rem = v - sum combo_j v_j
        let mut own = SparseVec::new();
        own.insert(idx, Q::one());
        axpy(&mut own, &-Q::one(), &combo);
        match rem.keys().next().cloned() {
            None => {
                self.kernel.push(own.clone());
                Insert::Dependent(own)
            }
            Some(p) => {
                let inv = Q::one() / &rem[&p];
                for c in rem.values_mut() {
                    *c *= &inv;
                }
                for c in own.values_mut() {
                    *c *= &inv;
                }
                self.rows.insert(p.clone(), Row { vec: rem, combo: own });
                Insert::Pivot(p)
            }
        }
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v).0.is_empty()
    }

    /// Coefficients `c` with `sum c_j v_j = target`, if any.
    pub fn solve(&self, target: &SparseVec<K>) -> Option<SparseVec<usize>> {
        let (rem, combo) = self.reduce(target);
        if rem.is_empty() {
            Some(combo)
        } else {
            None
        }
    }
}

/// Rank of a list of sparse vectors.
pub fn rank<K: Ord + Clone>(vs: &[SparseVec<K>]) -> usize {
    Echelon::from_vectors(vs.iter()).rank()
}

/// Dense rational matrix helpers used by small problems and oracles.
pub mod dense {
    use super::*;

    pub type Matrix = Vec<Vec<Q>>;

    pub fn identity(n: usize) -> Matrix {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect()
    }

    pub fn mul(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.len();
        let m = b.first().map_or(0, |r| r.len());
        let k = b.len();
        let mut out = vec![vec![Q::zero(); m]; n];
        for i in 0..n {
            for l in 0..k {
                if a[i][l].is_zero() {
                    continue;
                }
                for j in 0..m {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
        out
    }

    /// Gauss-Jordan inverse; `None` if singular.
    pub fn inverse(a: &Matrix) -> Option<Matrix> {
        let n = a.len();
        let mut m: Matrix = a.clone();
        let mut inv = identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, piv);
            inv.swap(col, piv);
            let s = Q::one() / &m[col][col];
            for j in 0..n {
                m[col][j] *= &s;
                inv[col][j] *= &s;
            }
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for j in 0..n {
                        let a = &f * &m[col][j];
                        m[r][j] -= a;
                        let b = &f * &inv[col][j];
                        inv[r][j] -= b;
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn rank(a: &Matrix) -> usize {
        let rows: Vec<SparseVec<usize>> = a
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j, c.clone())).collect())
            .collect();
        super::rank(&rows)
    }
}
