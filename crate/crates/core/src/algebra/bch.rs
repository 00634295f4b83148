//! Lie structure constants and the star product obtained from the
//! symmetrization map into the universal enveloping algebra with
//! `XY - YX = nu [X, Y]`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::element::{GradedElement, Monomial};
use super::table::GeneratorTable;
use crate::error::{Error, Result};
use crate::rational::{inv_factorial, q, Q};

/// Structure constants `[e_a, e_b] = sum_c f^c_{ab} e_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lie {
    dim: usize,
    f: Vec<Q>,
}

impl Lie {
    /// `f[(a * dim + b) * dim + c] = f^c_{ab}`.
    pub fn new(dim: usize, f: Vec<Q>) -> Result<Self> {
        if f.len() != dim * dim * dim {
            return Err(Error::Argument(format!("expected {} structure constants, got {}", dim * dim * dim, f.len())));
        }
        let lie = Lie { dim, f };
        lie.validate()?;
        Ok(lie)
    }

    pub fn abelian(dim: usize) -> Self {
        Lie { dim, f: vec![Q::zero(); dim * dim * dim] }
    }

    /// From a list of nonzero `(a, b, c, value)` with `a < b`; antisymmetry is filled in.
    pub fn from_brackets(dim: usize, entries: &[(usize, usize, usize, Q)]) -> Result<Self> {
        let mut f = vec![Q::zero(); dim * dim * dim];
        for (a, b, c, v) in entries {
            if a >= b || *b >= dim || *c >= dim {
                return Err(Error::Argument(format!("bad structure constant index ({a}, {b}, {c})")));
            }
            f[(a * dim + b) * dim + c] = v.clone();
            f[(b * dim + a) * dim + c] = -v.clone();
        }
        Self::new(dim, f)
    }

    /// `so(3)`: `[e_1, e_2] = e_3` and cyclic.
    pub fn so3() -> Self {
        Self::from_brackets(3, &[(0, 1, 2, q(1)), (1, 2, 0, q(1)), (0, 2, 1, q(-1))]).expect("so(3)")
    }

    /// Heisenberg: `[e_1, e_2] = e_3`.
    pub fn heisenberg() -> Self {
        Self::from_brackets(3, &[(0, 1, 2, q(1))]).expect("heisenberg")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `f^c_{ab}`.
    pub fn c(&self, a: usize, b: usize, c: usize) -> Q {
        self.f[(a * self.dim + b) * self.dim + c].clone()
    }

    pub fn is_abelian(&self) -> bool {
        self.f.iter().all(|v| v.is_zero())
    }

    /// Trace form `sum_b f^b_{ab}`.
    pub fn trace(&self, a: usize) -> Q {
        (0..self.dim).map(|b| self.c(a, b, b)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.c(a, b, c) != -self.c(b, a, c) {
                        return Err(Error::Argument(format!(
                            "structure constants not antisymmetric at ({}, {}, {})",
                            a + 1,
                            b + 1,
                            c + 1
                        )));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let mut s = Q::zero();
                        for d in 0..n {
                            s += self.c(a, b, d) * self.c(d, c, e)
                                + self.c(b, c, d) * self.c(d, a, e)
                                + self.c(c, a, d) * self.c(d, b, e);
                        }
                        if !s.is_zero() {
                            return Err(Error::Argument(format!(
                                "structure constants violate Jacobi at ({}, {}, {})",
                                a + 1,
                                b + 1,
                                c + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

type Word = SmallVec<[u8; 8]>;
/// Element of the enveloping algebra: ordered words with a `nu` power.
type Env = BTreeMap<(Word, u16), Q>;

fn env_add(e: &mut Env, k: (Word, u16), v: Q) {
    if v.is_zero() {
        return;
    }
    let slot = e.entry(k.clone()).or_insert_with(Q::zero);
    *slot += v;
    if slot.is_zero() {
        e.remove(&k);
    }
}

/// Straightening engine with a cache of normal-ordered words.
pub struct Enveloping<'a> {
    lie: &'a Lie,
    nu_order: u16,
    cache: HashMap<Word, Env>,
}

impl<'a> Enveloping<'a> {
    pub fn new(lie: &'a Lie, nu_order: u32) -> Self {
        Enveloping { lie, nu_order: nu_order as u16, cache: HashMap::new() }
    }

    /// Rewrite a word in nondecreasing order.
    fn normal(&mut self, w: &Word) -> Env {
        if let Some(e) = self.cache.get(w) {
            return e.clone();
        }
        let mut out = Env::new();
        match (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1]) {
            None => {
                out.insert((w.clone(), 0), Q::one());
            }
            Some(i) => {
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                for (k, v) in self.normal(&swapped) {
                    env_add(&mut out, k, v);
                }
                if self.nu_order > 0 {
                    let (x, y) = (w[i] as usize, w[i + 1] as usize);
                    for c in 0..self.lie.dim() {
                        let f = self.lie.c(x, y, c);
                        if f.is_zero() {
                            continue;
                        }
                        let mut shorter: Word = w[..i].iter().copied().collect();
                        shorter.push(c as u8);
                        shorter.extend(w[i + 2..].iter().copied());
                        for ((word, n), v) in self.normal(&shorter) {
                            if n + 1 <= self.nu_order {
                                env_add(&mut out, (word, n + 1), v * &f);
                            }
                        }
                    }
                }
            }
        }
        self.cache.insert(w.clone(), out.clone());
        out
    }

    fn mul(&mut self, a: &Env, b: &Env) -> Env {
        let mut out = Env::new();
        for ((wa, na), ca) in a {
            for ((wb, nb), cb) in b {
                if na + nb > self.nu_order {
                    continue;
                }
                let mut w = wa.clone();
                w.extend(wb.iter().copied());
                for ((wn, nn), v) in self.normal(&w) {
                    if nn + na + nb <= self.nu_order {
                        env_add(&mut out, (wn, nn + na + nb), v * ca * cb);
                    }
                }
            }
        }
        out
    }

    /// Symmetrization of a base monomial.
    fn sym(&mut self, exps: &[u16]) -> Env {
        let mut letters: Word = Word::new();
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                letters.push(i as u8);
            }
        }
        let k = letters.len() as u32;
        let mut out = Env::new();
        let norm = inv_factorial(k);
        let mut arrangements = Vec::new();
        distinct_permutations(&mut letters.clone(), 0, &mut arrangements);
        // Each distinct arrangement appears prod(e_i!) times among all k! orderings.
        let mut mult = Q::one();
        for &e in exps {
            mult /= inv_factorial(e as u32);
        }
        let w = norm * mult;
        for arr in arrangements {
            for (key, v) in self.normal(&arr) {
                env_add(&mut out, key, v * &w);
            }
        }
        out
    }

    fn from_poly(&mut self, f: &GradedElement) -> Env {
        let bd = f.table().base_dim();
        let mut out = Env::new();
        for (m, c) in f.terms() {
            for ((w, n), v) in self.sym(&m.exps[..bd]) {
                if n + m.nu <= self.nu_order {
                    env_add(&mut out, (w, n + m.nu), v * c);
                }
            }
        }
        out
    }

    /// Inverse of the symmetrization, peeling longest words first.
    fn to_poly(&mut self, mut e: Env, table: &Arc<GeneratorTable>) -> GradedElement {
        let mut out = GradedElement::zero(table);
        let n = self.lie.dim();
        while let Some(((w, nu), c)) = e
            .iter()
            .max_by(|a, b| a.0 .0.len().cmp(&b.0 .0.len()).then_with(|| b.0.cmp(&a.0)))
            .map(|(k, v)| (k.clone(), v.clone()))
        {
            let mut exps = vec![0u16; n];
            for &l in &w {
                exps[l as usize] += 1;
            }
            let mut m = Monomial::one(table);
            m.exps[..n].copy_from_slice(&exps);
            m.nu = nu;
            out.add_term(m, c.clone());
            for ((w2, n2), v) in self.sym(&exps) {
                if n2 + nu <= self.nu_order {
                    env_add(&mut e, (w2, n2 + nu), -(v * &c));
                }
            }
        }
        out
    }
}

fn distinct_permutations(w: &mut Word, start: usize, out: &mut Vec<Word>) {
    if start == w.len() {
        out.push(w.clone());
        return;
    }
    let mut used: SmallVec<[u8; 8]> = SmallVec::new();
    for i in start..w.len() {
        if used.contains(&w[i]) {
            continue;
        }
        used.push(w[i]);
        w.swap(start, i);
        distinct_permutations(w, start + 1, out);
        w.swap(start, i);
    }
}

/// Star product on polynomials in `dim` base coordinates identified with
/// the symmetric algebra of the Lie algebra.
pub fn bch_star(f: &GradedElement, g: &GradedElement, lie: &Lie, nu_order: u32) -> Result<GradedElement> {
    let t = f.table();
    if **g.table() != **t {
        return Err(Error::TableMismatch);
    }
    if t.base_dim() != lie.dim() || !f.is_ghost_free() || !g.is_ghost_free() {
        return Err(Error::Argument("BCH product acts on ghost-free polynomials over the Lie algebra dual".into()));
    }
    let mut env = Enveloping::new(lie, nu_order);
    let a = env.from_poly(f);
    let b = env.from_poly(g);
    let ab = env.mul(&a, &b);
    Ok(env.to_poly(ab, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn abelian_is_commutative_product() {
        let lie = Lie::abelian(2);
        let t = GeneratorTable::base(2);
        let x = GradedElement::base_var(&t, 0);
        let y = GradedElement::base_var(&t, 1);
        let f = &(&x * &x) + &y;
        let g = &x * &y;
        assert_eq!(bch_star(&f, &g, &lie, 3).unwrap(), &f * &g);
    }

    #[test]
    fn linear_pair() {
        let lie = Lie::so3();
        let t = GeneratorTable::base(3);
        let x = GradedElement::base_var(&t, 0);
        let y = GradedElement::base_var(&t, 1);
        let z = GradedElement::base_var(&t, 2);
        let want = &(&x * &y) + &(&z * &GradedElement::nu(&t)).scale(&qf(1, 2));
        assert_eq!(bch_star(&x, &y, &lie, 3).unwrap(), want);
    }

    #[test]
    fn jacobi_rejected() {
        let bad = Lie::from_brackets(3, &[(0, 1, 2, q(1)), (1, 2, 1, q(1))]);
        assert!(bad.is_err());
    }
}
