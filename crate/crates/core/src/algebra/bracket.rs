//! Poisson structures on the base and the graded brackets built from them.

use std::sync::Arc;

use num_traits::Zero;

use super::element::{GradedElement, Var};
use super::table::{GeneratorTable, Kind};
use crate::error::{Error, Result};
use crate::rational::{q, Q};

/// Bivector `Pi^{ij}` with polynomial coefficients in the base coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Poisson {
    dim: usize,
    /// Nonzero entries, both orientations stored.
    entries: Vec<(usize, usize, GradedElement)>,
}

impl Poisson {
    /// From a dense antisymmetric rational matrix.
    pub fn constant(matrix: &[Vec<Q>]) -> Result<Self> {
        let n = matrix.len();
        let table = GeneratorTable::base(n);
        let mut entries = Vec::new();
        for i in 0..n {
            if matrix[i].len() != n {
                return Err(Error::Argument("Poisson matrix must be square".into()));
            }
            for j in 0..n {
                if matrix[i][j] != -matrix[j][i].clone() {
                    return Err(Error::Argument(format!("Poisson matrix not antisymmetric at ({}, {})", i + 1, j + 1)));
                }
                if !matrix[i][j].is_zero() {
                    entries.push((i, j, GradedElement::constant(&table, matrix[i][j].clone())));
                }
            }
        }
        Ok(Poisson { dim: n, entries })
    }

    /// From upper-triangle polynomial entries `(i, j, Pi^{ij})`, `i < j`.
    pub fn from_upper(dim: usize, upper: Vec<(usize, usize, GradedElement)>) -> Result<Self> {
        let table = GeneratorTable::base(dim);
        let mut entries = Vec::new();
        for (i, j, p) in upper {
            if i >= j || j >= dim {
                return Err(Error::Argument(format!("entry ({}, {}) is not in the upper triangle", i + 1, j + 1)));
            }
            let p = p.embed(&table)?;
            if !p.is_ghost_free() || p.max_nu().unwrap_or(0) > 0 {
                return Err(Error::Argument("Poisson coefficients must be base polynomials".into()));
            }
            if p.is_zero() {
                continue;
            }
            entries.push((j, i, -&p));
            entries.push((i, j, p));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        Ok(Poisson { dim, entries })
    }

    /// Canonical structure on coordinates `(q_1..q_n, p_1..p_n)` with
    /// `{p_i, q_i} = 1`.
    pub fn canonical(n: usize) -> Self {
        let mut m = vec![vec![Q::zero(); 2 * n]; 2 * n];
        for i in 0..n {
            m[i][n + i] = q(-1);
            m[n + i][i] = q(1);
        }
        Self::constant(&m).expect("antisymmetric")
    }

    /// Linear structure `Pi^{ij} = sum_k f^k_{ij} x_k`.
    pub fn linear(f: &super::bch::Lie) -> Self {
        let n = f.dim();
        let table = GeneratorTable::base(n);
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut p = GradedElement::zero(&table);
                for k in 0..n {
                    p.add_scaled(&f.c(i, j, k), &GradedElement::base_var(&table, k));
                }
                upper.push((i, j, p));
            }
        }
        Self::from_upper(n, upper).expect("valid entries")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, GradedElement)] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&GradedElement> {
        self.entries.iter().find(|e| e.0 == i && e.1 == j).map(|e| &e.2)
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|(_, _, p)| p.max_base_degree().unwrap_or(0) == 0)
    }

    /// Constant entries `(i, j, value)`; errors when some entry is not constant.
    pub fn constant_entries(&self) -> Result<Vec<(usize, usize, Q)>> {
        if !self.is_constant() {
            return Err(Error::Unsupported("Moyal product needs a constant Poisson tensor".into()));
        }
        Ok(self
            .entries
            .iter()
            .map(|(i, j, p)| (*i, *j, p.coeff(&super::element::Monomial::one(p.table()))))
            .collect())
    }

    /// `sum Pi^{ij} d_i a d_j b`.
    pub fn base_bracket(&self, a: &GradedElement, b: &GradedElement) -> GradedElement {
        let t = a.table().clone();
        assert!(t.base_dim() >= self.dim, "table too small for the Poisson tensor");
        let mut out = GradedElement::zero(&t);
        for (i, j, p) in &self.entries {
            let da = a.partial(Var::Base(*i));
            if da.is_zero() {
                continue;
            }
            let db = b.partial(Var::Base(*j));
            if db.is_zero() {
                continue;
            }
            let prod = &da * &db;
            if p.max_base_degree().unwrap_or(0) == 0 {
                out.add_scaled(&p.coeff(&super::element::Monomial::one(p.table())), &prod);
            } else {
                let pe = lift(p, &t);
                out = &out + &(&pe * &prod);
            }
        }
        out
    }
}

fn lift(p: &GradedElement, t: &Arc<GeneratorTable>) -> GradedElement {
    p.embed(t).expect("base polynomial embeds")
}

fn sign(odd: bool) -> Q {
    if odd {
        q(-1)
    } else {
        q(1)
    }
}

/// Signed ghost/antighost pairing summed over levels accepted by `levels`:
/// `(-1)^{(|a|+1)i} da/dG db/dA - (-1)^{|a||b|}(-1)^{(|b|+1)i} db/dG da/dA`.
pub fn ghost_pairing<F: Fn(u32) -> bool>(a: &GradedElement, b: &GradedElement, levels: F) -> GradedElement {
    let t = a.table().clone();
    let mut out = GradedElement::zero(&t);
    let pairs: Vec<(usize, usize, u32)> = t
        .gens()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind == Kind::Ghost && levels(g.level))
        .filter_map(|(gi, g)| t.antighost(g.level, g.index).map(|ai| (gi, ai, g.level)))
        .collect();
    if pairs.is_empty() {
        return out;
    }
    let (a0, a1) = a.parity_parts();
    let (b0, b1) = b.parity_parts();
    for (pa, ap) in [(false, &a0), (true, &a1)] {
        if ap.is_zero() {
            continue;
        }
        for (pb, bp) in [(false, &b0), (true, &b1)] {
            if bp.is_zero() {
                continue;
            }
            for &(g, an, level) in &pairs {
                let io = level % 2 == 1;
                let dag = ap.partial(Var::Gen(g));
                let dba = bp.partial(Var::Gen(an));
                if !dag.is_zero() && !dba.is_zero() {
                    out.add_scaled(&sign(!pa && io), &(&dag * &dba));
                }
                let dbg = bp.partial(Var::Gen(g));
                let daa = ap.partial(Var::Gen(an));
                if !dbg.is_zero() && !daa.is_zero() {
                    let s = -(sign(pa && pb) * sign(!pb && io));
                    out.add_scaled(&s, &(&dbg * &daa));
                }
            }
        }
    }
    out
}

fn level_one_only(t: &GeneratorTable) -> Result<()> {
    if t.gens().iter().any(|g| g.level != 1 || g.kind == Kind::Vector) {
        return Err(Error::Unsupported(
            "super Poisson bracket is defined for level-one ghosts and antighosts; use rothstein_flat".into(),
        ));
    }
    Ok(())
}

/// Even super-Poisson bracket with `{antighost_a, ghost^b} = 2 delta`.
pub fn super_poisson(a: &GradedElement, b: &GradedElement, pi: &Poisson) -> Result<GradedElement> {
    if a.table() != b.table() && **a.table() != **b.table() {
        return Err(Error::TableMismatch);
    }
    level_one_only(a.table())?;
    let mut out = pi.base_bracket(a, b);
    out.add_scaled(&q(2), &ghost_pairing(a, b, |_| true));
    Ok(out)
}

/// Flat bracket over all levels with unit pairing.
pub fn rothstein_flat(a: &GradedElement, b: &GradedElement, pi: &Poisson) -> Result<GradedElement> {
    if **a.table() != **b.table() {
        return Err(Error::TableMismatch);
    }
    let mut out = pi.base_bracket(a, b);
    out.add_scaled(&q(1), &ghost_pairing(a, b, |_| true));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antighost_ghost_pair_is_two() {
        let t = GeneratorTable::brst(2, 2);
        let pi = Poisson::canonical(1);
        for a in 0..2 {
            for b in 0..2 {
                let x = GradedElement::antighost(&t, a);
                let y = GradedElement::ghost(&t, b);
                let r = super_poisson(&x, &y, &pi).unwrap();
                let want = if a == b { GradedElement::constant(&t, q(2)) } else { GradedElement::zero(&t) };
                assert_eq!(r, want);
                assert_eq!(super_poisson(&y, &x, &pi).unwrap(), want);
            }
        }
    }

    #[test]
    fn cotangent_sign() {
        let t = GeneratorTable::base(2);
        let pi = Poisson::canonical(1);
        let qv = GradedElement::base_var(&t, 0);
        let pv = GradedElement::base_var(&t, 1);
        assert_eq!(super_poisson(&pv, &qv, &pi).unwrap(), GradedElement::one(&t));
    }

    #[test]
    fn higher_levels_refused() {
        let t = GeneratorTable::levels(2, &[1, 1], true);
        let x = GradedElement::one(&t);
        assert!(super_poisson(&x, &x, &Poisson::canonical(1)).is_err());
    }

    #[test]
    fn level_two_pair() {
        let t = GeneratorTable::levels(2, &[1, 1], true);
        let pi = Poisson::canonical(1);
        let g = GradedElement::gen(&t, t.ghost(2, 0).unwrap());
        let a = GradedElement::gen(&t, t.antighost(2, 0).unwrap());
        // even generators, level 2: {G, A} = +1, {A, G} = -1
        assert_eq!(rothstein_flat(&g, &a, &pi).unwrap(), GradedElement::one(&t));
        assert_eq!(rothstein_flat(&a, &g, &pi).unwrap(), -GradedElement::one(&t));
        let one = GradedElement::one(&t);
        assert!(rothstein_flat(&one, &g, &pi).unwrap().is_zero());
    }
}
