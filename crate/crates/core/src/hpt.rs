//! Contractions and the two perturbation lemmas over functional operators.
//!
//! Identities are never proved symbolically; they are checked on the probe
//! basis each complex enumerates.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::GradedElement;
use crate::error::{Error, Result};
use crate::rational::{q, Q};

type OpFn = dyn Fn(&GradedElement) -> GradedElement + Send + Sync;

/// Linear operator on graded elements with a declared degree shift.
#[derive(Clone)]
pub struct Operator {
    name: String,
    degree: i64,
    f: Arc<OpFn>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}, degree {})", self.name, self.degree)
    }
}

impl Operator {
    pub fn new<F>(name: &str, degree: i64, f: F) -> Self
    where
        F: Fn(&GradedElement) -> GradedElement + Send + Sync + 'static,
    {
        Operator { name: name.to_string(), degree, f: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Self::new("id", 0, |x| x.clone())
    }

    pub fn zero(degree: i64) -> Self {
        Self::new("0", degree, |x| GradedElement::zero(x.table()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn apply(&self, x: &GradedElement) -> GradedElement {
        (self.f)(x)
    }

    /// `self` after `inner`.
    pub fn after(&self, inner: &Operator) -> Operator {
        let (a, b) = (self.clone(), inner.clone());
        Operator::new(&format!("{}{}", a.name, b.name), a.degree + b.degree, move |x| a.apply(&b.apply(x)))
    }

    pub fn plus(&self, other: &Operator) -> Operator {
        let (a, b) = (self.clone(), other.clone());
        Operator::new(&format!("({}+{})", a.name, b.name), a.degree, move |x| &a.apply(x) + &b.apply(x))
    }

    pub fn minus(&self, other: &Operator) -> Operator {
        let (a, b) = (self.clone(), other.clone());
        Operator::new(&format!("({}-{})", a.name, b.name), a.degree, move |x| &a.apply(x) - &b.apply(x))
    }

    pub fn scaled(&self, c: Q) -> Operator {
        let a = self.clone();
        Operator::new(&format!("{}{}", crate::rational::fmt_q(&c), a.name), a.degree, move |x| a.apply(x).scale(&c))
    }

    /// Truncate every output at `nu^n`.
    pub fn truncated(&self, n: u32) -> Operator {
        let a = self.clone();
        Operator::new(&a.name.clone(), a.degree, move |x| a.apply(x).truncate_nu(n))
    }

    pub fn renamed(mut self, name: &str) -> Operator {
        self.name = name.to_string();
        self
    }
}

type BasisFn = dyn Fn() -> Vec<GradedElement> + Send + Sync;

/// Complex with a differential and a finite probe basis.
#[derive(Clone)]
pub struct Complex {
    pub name: String,
    pub differential: Operator,
    basis: Arc<BasisFn>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Complex({})", self.name)
    }
}

impl Complex {
    pub fn new<F>(name: &str, differential: Operator, basis: F) -> Self
    where
        F: Fn() -> Vec<GradedElement> + Send + Sync + 'static,
    {
        Complex { name: name.to_string(), differential, basis: Arc::new(basis) }
    }

    pub fn probe(&self) -> Vec<GradedElement> {
        (self.basis)()
    }

    pub fn with_differential(&self, d: Operator) -> Complex {
        Complex { name: self.name.clone(), differential: d, basis: self.basis.clone() }
    }

    pub fn check_square_zero(&self) -> Result<()> {
        first_failure(&self.probe(), |x| {
            let d = &self.differential;
            d.apply(&d.apply(x)).is_zero()
        })
        .map_or(Ok(()), |x| Err(Error::ContractViolation(format!("d^2 != 0 on {x} in {}", self.name))))
    }
}

fn first_failure<F>(probe: &[GradedElement], ok: F) -> Option<GradedElement>
where
    F: Fn(&GradedElement) -> bool + Sync,
{
    probe.par_iter().find_first(|x| !ok(x)).cloned()
}

/// Side conditions `h^2 = 0`, `h i = 0`, `p h = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SideConditions {
    pub sc1: bool,
    pub sc2: bool,
    pub sc3: bool,
}

impl SideConditions {
    pub fn all() -> Self {
        SideConditions { sc1: true, sc2: true, sc3: true }
    }

    pub fn is_all(&self) -> bool {
        self.sc1 && self.sc2 && self.sc3
    }
}

/// Outcome of checking the contraction identities on probe bases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractionReport {
    pub p_i_identity: bool,
    pub homotopy: bool,
    pub inject_chain: bool,
    pub project_chain: bool,
    pub differentials_square_zero: bool,
    pub side: SideConditions,
    /// First failing identity with the offending probe element.
    pub failure: Option<String>,
    pub probes: usize,
}

impl ContractionReport {
    /// The five contraction identities.
    pub fn identities_hold(&self) -> bool {
        self.p_i_identity && self.homotopy && self.inject_chain && self.project_chain && self.differentials_square_zero
    }
}

/// Small complex `X`, big complex `Y`, `i: X -> Y`, `p: Y -> X`, `h: Y -> Y`.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub small: Complex,
    pub big: Complex,
    pub inject: Operator,
    pub project: Operator,
    pub homotopy: Operator,
    /// Side conditions the contraction is declared to satisfy.
    pub flags: SideConditions,
}

impl Contraction {
    /// Check all identities and the actual side conditions.
    pub fn verify(&self) -> ContractionReport {
        let xs = self.small.probe();
        let ys = self.big.probe();
        let (i, p, h) = (&self.inject, &self.project, &self.homotopy);
        let (dx, dy) = (&self.small.differential, &self.big.differential);
        let mut failure = None;
        let mut note = |name: &str, bad: Option<GradedElement>| -> bool {
            match bad {
                None => true,
                Some(x) => {
                    if failure.is_none() {
                        failure = Some(format!("{name} fails on {x}"));
                    }
                    false
                }
            }
        };
        let p_i_identity = note("p i = id", first_failure(&xs, |x| p.apply(&i.apply(x)) == *x));
        let homotopy = note(
            "d h + h d = id - i p",
            first_failure(&ys, |y| {
                let lhs = &dy.apply(&h.apply(y)) + &h.apply(&dy.apply(y));
                let rhs = y - &i.apply(&p.apply(y));
                lhs == rhs
            }),
        );
        let inject_chain = note("d i = i d", first_failure(&xs, |x| dy.apply(&i.apply(x)) == i.apply(&dx.apply(x))));
        let project_chain =
            note("p d = d p", first_failure(&ys, |y| p.apply(&dy.apply(y)) == dx.apply(&p.apply(y))));
        let dsq = note("d_Y^2 = 0", first_failure(&ys, |y| dy.apply(&dy.apply(y)).is_zero()))
            & note("d_X^2 = 0", first_failure(&xs, |x| dx.apply(&dx.apply(x)).is_zero()));
        let side = SideConditions {
            sc1: first_failure(&ys, |y| h.apply(&h.apply(y)).is_zero()).is_none(),
            sc2: first_failure(&xs, |x| h.apply(&i.apply(x)).is_zero()).is_none(),
            sc3: first_failure(&ys, |y| p.apply(&h.apply(y)).is_zero()).is_none(),
        };
        ContractionReport {
            p_i_identity,
            homotopy,
            inject_chain,
            project_chain,
            differentials_square_zero: dsq,
            side,
            failure,
            probes: xs.len() + ys.len(),
        }
    }

    /// Every operator truncated at `nu^n`.
    pub fn truncated(&self, n: u32) -> Contraction {
        Contraction {
            small: self.small.with_differential(self.small.differential.truncated(n)),
            big: self.big.with_differential(self.big.differential.truncated(n)),
            inject: self.inject.truncated(n),
            project: self.project.truncated(n),
            homotopy: self.homotopy.truncated(n),
            flags: self.flags,
        }
    }

    fn require_valid(&self) -> Result<ContractionReport> {
        let r = self.verify();
        if !r.identities_hold() {
            return Err(Error::ContractViolation(r.failure.clone().unwrap_or_default()));
        }
        Ok(r)
    }
}

/// Replace `h` by `h' = (dh+hd) h (dh+hd)` and then `h'' = h' d h'`.
pub fn normalize_side_conditions(c: &Contraction) -> Result<Contraction> {
    c.require_valid()?;
    let d = &c.big.differential;
    let h = &c.homotopy;
    let pi = d.after(h).plus(&h.after(d));
    let h1 = pi.after(h).after(&pi);
    let h2 = h1.after(d).after(&h1).renamed(&format!("{}''", h.name()));
    let out = Contraction { homotopy: h2, flags: SideConditions::all(), ..c.clone() };
    let r = out.verify();
    if !r.identities_hold() || !r.side.is_all() {
        return Err(Error::Internal(format!("normalization left {:?}", r.side)));
    }
    Ok(out)
}

/// Evaluate `sum_k (-A)^k x`, stopping when a term vanishes.
pub fn neumann(a: &Operator, x: &GradedElement, max_terms: usize) -> Result<GradedElement> {
    let mut sum = x.clone();
    let mut term = x.clone();
    for _ in 0..max_terms {
        term = -a.apply(&term);
        if term.is_zero() {
            return Ok(sum);
        }
        sum = &sum + &term;
    }
    Err(Error::Divergence(format!("element {x} after {max_terms} terms")))
}

/// `(id + t h + h t)^{-1}` as an operator; panics with a divergence message
/// when the series does not terminate, so callers probe with `try_series`.
fn inverse_series(t: &Operator, h: &Operator, max_terms: usize) -> Operator {
    let a = t.after(h).plus(&h.after(t));
    Operator::new("(1+th+ht)^-1", 0, move |x| match neumann(&a, x, max_terms) {
        Ok(v) => v,
        Err(e) => panic!("{e}"),
    })
}

/// Check that the series terminates on every probe element.
fn try_series(t: &Operator, h: &Operator, probe: &[GradedElement], max_terms: usize) -> Result<()> {
    let a = t.after(h).plus(&h.after(t));
    probe.par_iter().try_for_each(|y| neumann(&a, y, max_terms).map(|_| ()))
}

/// Perturbation lemma keeping the projection.
pub fn perturb_keep_p(c: &Contraction, t: &Operator, max_terms: usize) -> Result<Contraction> {
    if !c.flags.sc3 {
        return Err(Error::Refused("perturbation keeping p needs p h = 0".into()));
    }
    let (i, p, h) = (&c.inject, &c.project, &c.homotopy);
    let tx = p.after(t).after(i).renamed("t_X");
    let ys = c.big.probe();
    if let Some(y) = first_failure(&ys, |y| tx.apply(&p.apply(y)) == p.apply(&t.apply(y))) {
        return Err(Error::Refused(format!("t_X p != p t on {y}")));
    }
    try_series(t, h, &ys, max_terms)?;
    let inv = inverse_series(t, h, max_terms);
    let big_h = h.after(&inv).renamed("H");
    let defect = t.after(i).minus(&i.after(&tx));
    let big_i = i.minus(&big_h.after(&defect)).renamed("I");
    let flags = if c.flags.is_all() { SideConditions::all() } else { SideConditions { sc3: true, ..Default::default() } };
    Ok(Contraction {
        small: c.small.with_differential(c.small.differential.plus(&tx)),
        big: c.big.with_differential(c.big.differential.plus(t)),
        inject: big_i,
        project: p.clone(),
        homotopy: big_h,
        flags,
    })
}

/// Perturbation lemma keeping the injection.
pub fn perturb_keep_i(c: &Contraction, t: &Operator, max_terms: usize) -> Result<Contraction> {
    if !c.flags.sc2 {
        return Err(Error::Refused("perturbation keeping i needs h i = 0".into()));
    }
    let (i, p, h) = (&c.inject, &c.project, &c.homotopy);
    let tx = p.after(t).after(i).renamed("t_X");
    let xs = c.small.probe();
    if let Some(x) = first_failure(&xs, |x| t.apply(&i.apply(x)) == i.apply(&tx.apply(x))) {
        return Err(Error::Refused(format!("t i != i t_X on {x}")));
    }
    let ys = c.big.probe();
    try_series(t, h, &ys, max_terms)?;
    let inv = inverse_series(t, h, max_terms);
    let flags = if c.flags.is_all() { SideConditions::all() } else { SideConditions { sc2: true, ..Default::default() } };
    Ok(Contraction {
        small: c.small.with_differential(c.small.differential.plus(&tx)),
        big: c.big.with_differential(c.big.differential.plus(t)),
        inject: i.clone(),
        project: p.after(&inv).renamed("P"),
        homotopy: h.after(&inv).renamed("H'"),
        flags,
    })
}

/// Scale the differential of the big and small complex by `c`, adjusting
/// the homotopy by `1/c`.
pub fn rescale(cn: &Contraction, c: Q) -> Contraction {
    let inv = q(1) / &c;
    Contraction {
        small: cn.small.with_differential(cn.small.differential.scaled(c.clone())),
        big: cn.big.with_differential(cn.big.differential.scaled(c)),
        homotopy: cn.homotopy.scaled(inv),
        ..cn.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GeneratorTable, Monomial};
    use std::collections::HashMap;

    // Basis a, b (degree 0), e, f (degree 1), g (degree 2), small x:
    // d e = a, d g = f.  Coordinates x1..x5 = a, b, e, f, g, x6 = x.
    fn toy(bad: bool) -> Contraction {
        let t = GeneratorTable::base(6);
        let v = |k: usize| GradedElement::base_var(&t, k);
        let table_op = |name: &str, deg: i64, pairs: Vec<(usize, GradedElement)>| {
            let map: HashMap<usize, GradedElement> = pairs.into_iter().collect();
            let tt = t.clone();
            Operator::new(name, deg, move |y| {
                let mut out = GradedElement::zero(&tt);
                for (m, c) in y.terms() {
                    let k = m.exps.iter().position(|&e| e == 1).unwrap();
                    let mut unit = Monomial::one(&tt);
                    unit.nu = m.nu;
                    if let Some(img) = map.get(&k) {
                        let shifted = &GradedElement::term(&tt, unit, q(1)) * img;
                        out.add_scaled(c, &shifted);
                    }
                }
                out
            })
        };
        let d = table_op("d", -1, vec![(2, v(0)), (4, v(3))]);
        let i = table_op("i", 0, vec![(5, v(1))]);
        let p = table_op("p", 0, vec![(1, v(5))]);
        let h = if bad {
            table_op("h", 1, vec![(0, &v(2) + &v(3)), (1, v(3)), (2, -v(4)), (3, v(4))])
        } else {
            table_op("h", 1, vec![(0, v(2)), (3, v(4))])
        };
        let tb = t.clone();
        let tx = t.clone();
        Contraction {
            small: Complex::new("X", Operator::zero(-1), move || vec![GradedElement::base_var(&tx, 5)]),
            big: Complex::new("Y", d, move || (0..5).map(|k| GradedElement::base_var(&tb, k)).collect()),
            inject: i,
            project: p,
            homotopy: h,
            flags: SideConditions::default(),
        }
    }

    #[test]
    fn bad_homotopy_is_fixed() {
        let c = toy(true);
        let r = c.verify();
        assert!(r.identities_hold());
        assert!(!r.side.sc1 && !r.side.sc2);
        let n = normalize_side_conditions(&c).unwrap();
        assert!(n.verify().side.is_all());
    }

    #[test]
    fn good_homotopy_unchanged() {
        let c = toy(false);
        assert!(c.verify().side.is_all());
        let n = normalize_side_conditions(&c).unwrap();
        for y in c.big.probe() {
            assert_eq!(n.homotopy.apply(&y), c.homotopy.apply(&y));
        }
    }

    #[test]
    fn zero_perturbation() {
        let mut c = toy(false);
        c.flags = SideConditions::all();
        let z = Operator::zero(-1);
        let c1 = perturb_keep_p(&c, &z, 10).unwrap();
        let c2 = perturb_keep_i(&c, &z, 10).unwrap();
        for y in c.big.probe() {
            assert_eq!(c1.homotopy.apply(&y), c.homotopy.apply(&y));
            assert_eq!(c2.project.apply(&y), c.project.apply(&y));
        }
        assert!(c1.verify().identities_hold());
    }

    fn nu_times(c: &Contraction, from: usize, to: usize, n: u32) -> Operator {
        let t = c.big.probe()[0].table().clone();
        let img = &GradedElement::nu(&t) * &GradedElement::base_var(&t, to);
        Operator::new("t", -1, move |y| {
            let mut out = GradedElement::zero(y.table());
            for (m, k) in y.terms() {
                if m.exps[from] == 1 {
                    let mut unit = Monomial::one(y.table());
                    unit.nu = m.nu;
                    out.add_scaled(k, &(&GradedElement::term(y.table(), unit, q(1)) * &img));
                }
            }
            out.truncate_nu(n)
        })
    }

    fn geometric(t: &std::sync::Arc<GeneratorTable>, k: usize, n: u32) -> GradedElement {
        // sum_{j<=n} (-nu)^j x_k
        let mut out = GradedElement::zero(t);
        let mut p = GradedElement::base_var(t, k);
        for j in 0..=n {
            out.add_scaled(&q(if j % 2 == 0 { 1 } else { -1 }), &p);
            p = &p * &GradedElement::nu(t);
        }
        out.truncate_nu(n)
    }

    #[test]
    fn keep_projection_lemma() {
        let n = 5;
        let mut c = toy(false);
        c.flags = SideConditions::all();
        let t = nu_times(&c, 2, 0, n);
        let out = perturb_keep_p(&c, &t, 50).unwrap().truncated(n);
        let r = out.verify();
        assert!(r.identities_hold(), "{:?}", r.failure);
        assert!(r.side.is_all());
        let tab = c.big.probe()[0].table().clone();
        // (1 + th + ht) acts on a as (1 + nu); H(a) = e / (1 + nu).
        assert_eq!(out.homotopy.apply(&GradedElement::base_var(&tab, 0)), geometric(&tab, 2, n));
        let sc3_only = perturb_keep_p(&toy(false), &t, 50);
        assert!(sc3_only.is_err());
    }

    #[test]
    fn keep_injection_lemma() {
        let n = 5;
        let mut c = toy(false);
        c.flags = SideConditions::all();
        let t = nu_times(&c, 2, 1, n);
        let out = perturb_keep_i(&c, &t, 50).unwrap().truncated(n);
        let r = out.verify();
        assert!(r.identities_hold(), "{:?}", r.failure);
        assert!(r.side.is_all());
        let tab = c.big.probe()[0].table().clone();
        // (th + ht)(a) = t(e) = nu b, and (th + ht)(b) = 0.
        let a = GradedElement::base_var(&tab, 0);
        let expect = (&GradedElement::nu(&tab) * &GradedElement::base_var(&tab, 5)).scale(&q(-1));
        assert_eq!(out.project.apply(&a), expect);
    }

    #[test]
    fn divergence_is_reported() {
        let mut c = toy(false);
        c.flags = SideConditions::all();
        let t = nu_times(&c, 2, 0, 200);
        match perturb_keep_p(&c, &t, 4) {
            Err(Error::Divergence(_)) => {}
            other => panic!("{other:?}"),
        }
    }
}
