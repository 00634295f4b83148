//! Moyal product on the base tensored with the formal Clifford product on
//! level-one ghosts and antighosts:
//! `a * b = mu exp(P)(a (x) b)` with
//! `P = (nu/2) sum Pi^{ij} d_i (x) d_j - 2 nu sum_a d/dghost_a (x) d/dantighost_a`.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::bracket::Poisson;
use super::element::{mul_monomials, GradedElement, Monomial};
use super::table::Kind;
use crate::error::{Error, Result};
use crate::rational::{q, qf, Q};

type Pair = (Monomial, Monomial);

/// Star product truncated after `nu^nu_order`.
pub fn star(a: &GradedElement, b: &GradedElement, pi: &Poisson, nu_order: u32) -> Result<GradedElement> {
    let t = a.table().clone();
    if **b.table() != *t {
        return Err(Error::TableMismatch);
    }
    if t.gens().iter().any(|g| g.level != 1 || g.kind == Kind::Vector) {
        return Err(Error::Unsupported("star product needs level-one generators only".into()));
    }
    let half: Vec<(usize, usize, Q)> =
        pi.constant_entries()?.into_iter().map(|(i, j, c)| (i, j, c * qf(1, 2))).collect();
    let bd = t.base_dim();
    let pairs: Vec<(usize, usize)> = t
        .gens()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind == Kind::Ghost)
        .filter_map(|(gi, g)| t.antighost(1, g.index).map(|ai| (gi, ai)))
        .collect();
    let left_sign = |m: &Monomial, g: usize| -> bool {
        (0..g).filter(|&h| t.is_odd(h) && m.exps[bd + h] > 0).count() % 2 == 1
    };

    let mut out = GradedElement::zero(&t);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let base_nu = (ma.nu + mb.nu) as u32;
            if base_nu > nu_order {
                continue;
            }
            let coef = ca * cb;
            let mut x0 = ma.clone();
            x0.nu = 0;
            let mut y0 = mb.clone();
            y0.nu = 0;
            let mut current: BTreeMap<Pair, Q> = BTreeMap::new();
            current.insert((x0, y0), Q::from_integer(1.into()));
            let mut k = 0u32;
            loop {
                for ((x, y), c) in &current {
                    if let Some((neg, mut m)) = mul_monomials(&t, x, y) {
                        m.nu = (base_nu + k) as u16;
                        let v = &coef * c;
                        out.add_term(m, if neg { -v } else { v });
                    }
                }
                k += 1;
                if base_nu + k > nu_order || current.is_empty() {
                    break;
                }
                let inv_k = qf(1, k as i64);
                let mut next: BTreeMap<Pair, Q> = BTreeMap::new();
                let mut push = |key: Pair, v: Q| {
                    if v.is_zero() {
                        return;
                    }
                    let e = next.entry(key).or_insert_with(Q::zero);
                    *e += v;
                };
                for ((x, y), c) in &current {
                    for (i, j, p) in &half {
                        let (ex, ey) = (x.exps[*i], y.exps[*j]);
                        if ex == 0 || ey == 0 {
                            continue;
                        }
                        let mut x2 = x.clone();
                        x2.exps[*i] -= 1;
                        let mut y2 = y.clone();
                        y2.exps[*j] -= 1;
                        push((x2, y2), c * p * q(ex as i64 * ey as i64) * &inv_k);
                    }
                    for &(g, an) in &pairs {
                        if x.exps[bd + g] == 0 || y.exps[bd + an] == 0 {
                            continue;
                        }
                        let mut s = left_sign(x, g) ^ left_sign(y, an);
                        s ^= x.is_odd(&t);
                        let mut x2 = x.clone();
                        x2.exps[bd + g] -= 1;
                        let mut y2 = y.clone();
                        y2.exps[bd + an] -= 1;
                        let v = c * q(-2) * &inv_k;
                        push((x2, y2), if s { -v } else { v });
                    }
                }
                current = next;
            }
        }
    }
    Ok(out)
}

/// Graded star commutator `a*b - (-1)^{|a||b|} b*a` for homogeneous inputs,
/// summed over parity components otherwise.
pub fn star_commutator(a: &GradedElement, b: &GradedElement, pi: &Poisson, nu_order: u32) -> Result<GradedElement> {
    let (a0, a1) = a.parity_parts();
    let (b0, b1) = b.parity_parts();
    let mut out = GradedElement::zero(a.table());
    for (pa, x) in [(false, &a0), (true, &a1)] {
        for (pb, y) in [(false, &b0), (true, &b1)] {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let xy = star(x, y, pi, nu_order)?;
            let yx = star(y, x, pi, nu_order)?;
            out = &out + &xy;
            out.add_scaled(&if pa && pb { q(1) } else { q(-1) }, &yx);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::table::GeneratorTable;

    #[test]
    fn clifford_relation() {
        let t = GeneratorTable::brst(2, 2);
        let pi = Poisson::canonical(1);
        for a in 0..2 {
            for b in 0..2 {
                let x = GradedElement::antighost(&t, a);
                let y = GradedElement::ghost(&t, b);
                let s = &star(&x, &y, &pi, 3).unwrap() + &star(&y, &x, &pi, 3).unwrap();
                let want = if a == b { GradedElement::nu(&t).scale(&q(2)) } else { GradedElement::zero(&t) };
                assert_eq!(s, want);
            }
        }
    }

    #[test]
    fn canonical_commutator() {
        let t = GeneratorTable::base(2);
        let pi = Poisson::canonical(1);
        let qv = GradedElement::base_var(&t, 0);
        let pv = GradedElement::base_var(&t, 1);
        let c = &star(&qv, &pv, &pi, 3).unwrap() - &star(&pv, &qv, &pi, 3).unwrap();
        // nu {q, p} = -nu
        assert_eq!(c, -GradedElement::nu(&t));
    }

    #[test]
    fn unit_is_neutral() {
        let t = GeneratorTable::brst(2, 1);
        let pi = Poisson::canonical(1);
        let f = &(&GradedElement::base_var(&t, 0) * &GradedElement::ghost(&t, 0)) + &GradedElement::antighost(&t, 0);
        assert_eq!(star(&f, &GradedElement::one(&t), &pi, 4).unwrap(), f);
        assert_eq!(star(&GradedElement::one(&t), &f, &pi, 4).unwrap(), f);
    }

    #[test]
    fn ghost_left_acts_as_derivative() {
        let t = GeneratorTable::brst(0, 1);
        let pi = Poisson::constant(&[]).unwrap();
        let g = GradedElement::ghost(&t, 0);
        let a = GradedElement::antighost(&t, 0);
        let r = star(&g, &a, &pi, 2).unwrap();
        let want = &(&g * &a) + &GradedElement::nu(&t).scale(&q(2));
        assert_eq!(r, want);
    }
}
