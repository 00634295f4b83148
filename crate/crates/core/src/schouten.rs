//! Polyvector fields with the Schouten-Nijenhuis bracket.
//!
//! A polyvector is a graded element over a table whose odd generators
//! `d1..dm` stand for the coordinate vector fields.  The bracket of two
//! monomials `c d_{i1}..d_{ir}` and `e d_{j1}..d_{js}` sums over one factor
//! from each side; the chosen factors are moved next to each other with
//! Koszul signs and replaced by their elementary bracket
//! (`[d_k, g] = dg/dx_k`, `[f, d_k] = -df/dx_k`, all others zero).

use std::sync::Arc;


use crate::algebra::{GeneratorTable, GradedElement, Kind, Monomial, Poisson, Var};
use crate::error::{Error, Result};
use crate::rational::q;

pub type Polyvector = GradedElement;

/// Polyvector table on `n` coordinates.
pub fn table(n: usize) -> Arc<GeneratorTable> {
    GeneratorTable::polyvector(n)
}

/// Coordinate vector field `d/dx_{k+1}`.
pub fn vector(t: &Arc<GeneratorTable>, k: usize) -> Polyvector {
    GradedElement::gen(t, t.find(Kind::Vector, 1, k).expect("vector generator"))
}

/// Arity when all terms share it.
pub fn arity(x: &Polyvector) -> Option<u32> {
    let t = x.table();
    let mut it = x.terms().keys().map(|m| m.arity(t));
    let first = it.next()?;
    it.all(|a| a == first).then_some(first)
}

enum Factor {
    Coeff(Monomial),
    Vec(usize),
}

fn split(t: &Arc<GeneratorTable>, m: &Monomial) -> Vec<Factor> {
    let bd = t.base_dim();
    let mut c = m.clone();
    for e in c.exps[bd..].iter_mut() {
        *e = 0;
    }
    let mut out = vec![Factor::Coeff(c)];
    for g in 0..t.n_gens() {
        if m.exps[bd + g] > 0 {
            out.push(Factor::Vec(g));
        }
    }
    out
}

fn factor_element(t: &Arc<GeneratorTable>, f: &Factor) -> GradedElement {
    match f {
        Factor::Coeff(m) => GradedElement::term(t, m.clone(), q(1)),
        Factor::Vec(g) => GradedElement::gen(t, *g),
    }
}

fn product_except(t: &Arc<GeneratorTable>, fs: &[Factor], skip: usize) -> GradedElement {
    let mut out = GradedElement::one(t);
    for (k, f) in fs.iter().enumerate() {
        if k != skip {
            out = &out * &factor_element(t, f);
        }
    }
    out
}

fn elementary(t: &Arc<GeneratorTable>, a: &Factor, b: &Factor) -> GradedElement {
    match (a, b) {
        (Factor::Vec(g), Factor::Coeff(m)) => {
            let k = t.gen(*g).index;
            GradedElement::term(t, m.clone(), q(1)).partial(Var::Base(k))
        }
        (Factor::Coeff(m), Factor::Vec(g)) => {
            let k = t.gen(*g).index;
            -GradedElement::term(t, m.clone(), q(1)).partial(Var::Base(k))
        }
        _ => GradedElement::zero(t),
    }
}

fn degree(f: &Factor) -> usize {
    match f {
        Factor::Coeff(_) => 0,
        Factor::Vec(_) => 1,
    }
}

/// Schouten-Nijenhuis bracket.
pub fn schouten_bracket(x: &Polyvector, y: &Polyvector) -> Result<Polyvector> {
    let t = x.table().clone();
    if **y.table() != *t {
        return Err(Error::TableMismatch);
    }
    if t.gens().iter().any(|g| g.kind != Kind::Vector) {
        return Err(Error::Argument("polyvector table expected".into()));
    }
    let mut out = GradedElement::zero(&t);
    for (mx, cx) in x.terms() {
        let fx = split(&t, mx);
        for (my, cy) in y.terms() {
            let fy = split(&t, my);
            let c = cx * cy;
            for (i, xi) in fx.iter().enumerate() {
                let after: usize = fx[i + 1..].iter().map(degree).sum();
                for (j, yj) in fy.iter().enumerate() {
                    let br = elementary(&t, xi, yj);
                    if br.is_zero() {
                        continue;
                    }
                    let before: usize = fy[..j].iter().map(degree).sum();
                    let odd = (degree(xi) * after + degree(yj) * before) % 2 == 1;
                    let term = &(&product_except(&t, &fx, i) * &br) * &product_except(&t, &fy, j);
                    out.add_scaled(&if odd { -c.clone() } else { c.clone() }, &term);
                }
            }
        }
    }
    Ok(out)
}

/// `sum_{i<j} Pi^{ij} d_i d_j`.
pub fn bivector(pi: &Poisson) -> Polyvector {
    let t = table(pi.dim());
    let mut out = GradedElement::zero(&t);
    for (i, j, p) in pi.entries() {
        if i < j {
            let pe = lift_coeff(p, &t);
            out = &out + &(&pe * &(&vector(&t, *i) * &vector(&t, *j)));
        }
    }
    out
}

fn lift_coeff(p: &GradedElement, t: &Arc<GeneratorTable>) -> GradedElement {
    p.embed(t).expect("base polynomial embeds")
}

/// Read back an arity-2 polyvector as a Poisson tensor.
pub fn to_poisson(pi: &Polyvector) -> Result<Poisson> {
    if arity(pi).is_some_and(|a| a != 2) {
        return Err(Error::Argument("bivector expected".into()));
    }
    let t = pi.table();
    let n = t.base_dim();
    let base = GeneratorTable::base(n);
    let bd = n;
    let mut upper: Vec<(usize, usize, GradedElement)> = Vec::new();
    for (m, c) in pi.terms() {
        let vs: Vec<usize> = (0..t.n_gens()).filter(|&g| m.exps[bd + g] > 0).map(|g| t.gen(g).index).collect();
        let mut cm = Monomial::one(&base);
        cm.exps[..n].copy_from_slice(&m.exps[..n]);
        let (i, j) = (vs[0], vs[1]);
        let term = GradedElement::term(&base, cm, c.clone());
        match upper.iter_mut().find(|e| e.0 == i && e.1 == j) {
            Some(e) => e.2 = &e.2 + &term,
            None => upper.push((i, j, term)),
        }
    }
    Poisson::from_upper(n, upper)
}

/// Whether `[Pi, Pi] = 0`, with the residual trivector.
pub fn check_poisson_tensor(pi: &Polyvector) -> Result<(bool, Polyvector)> {
    if arity(pi).is_some_and(|a| a != 2) {
        return Err(Error::Argument("check_poisson_tensor needs arity 2".into()));
    }
    let r = schouten_bracket(pi, pi)?;
    Ok((r.is_zero(), r))
}

/// `-[[Pi, f], g]` for base polynomials given in the base table.
pub fn derived_bracket(f: &GradedElement, g: &GradedElement, pi: &Polyvector) -> Result<GradedElement> {
    let (ok, _) = check_poisson_tensor(pi)?;
    if !ok {
        return Err(Error::Refused("bivector is not Poisson".into()));
    }
    let t = pi.table();
    let fe = f.embed(t)?;
    let ge = g.embed(t)?;
    let r = -schouten_bracket(&schouten_bracket(pi, &fe)?, &ge)?;
    r.embed(f.table())
}

/// Lichnerowicz differential `[Pi, .]`.
pub fn lichnerowicz(pi: &Polyvector, x: &Polyvector) -> Result<Polyvector> {
    schouten_bracket(pi, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Lie;

    #[test]
    fn vector_on_function() {
        let t = table(2);
        let x1 = GradedElement::base_var(&t, 0);
        let f = &(&x1 * &x1) * &GradedElement::base_var(&t, 1);
        let d1 = vector(&t, 0);
        let r = schouten_bracket(&d1, &f).unwrap();
        assert_eq!(r, (&x1 * &GradedElement::base_var(&t, 1)).scale(&q(2)));
    }

    #[test]
    fn constant_and_so3_are_poisson() {
        let pc = bivector(&Poisson::canonical(1));
        assert!(check_poisson_tensor(&pc).unwrap().0);
        let pl = bivector(&Poisson::linear(&Lie::so3()));
        assert!(check_poisson_tensor(&pl).unwrap().0);
    }

    #[test]
    fn non_poisson_example() {
        // x1 d1 d2 + x2 d2 d3 on R^3.
        let t = table(3);
        let x = |i| GradedElement::base_var(&t, i);
        let d = |i| vector(&t, i);
        let pi = &(&x(0) * &(&d(0) * &d(1))) + &(&x(1) * &(&d(1) * &d(2)));
        let (ok, r) = check_poisson_tensor(&pi).unwrap();
        // Direct expansion: Jacobiator {x1,{x2,x3}} + cyclic = {x1, x2} = x1 != 0.
        assert!(!ok);
        assert_eq!(r.len(), 1);
        assert!(to_poisson(&pi).is_ok());
    }

    #[test]
    fn derived_matches_coordinates() {
        let p = Poisson::canonical(1);
        let pv = bivector(&p);
        let b = GeneratorTable::base(2);
        let qv = GradedElement::base_var(&b, 0);
        let pp = GradedElement::base_var(&b, 1);
        assert_eq!(derived_bracket(&pp, &qv, &pv).unwrap(), GradedElement::one(&b));
        assert_eq!(derived_bracket(&qv, &pp, &pv).unwrap(), p.base_bracket(&qv, &pp));
    }
}
