//! BRST charges and the operators they generate.
//!
//! Classical side: `theta = -1/4 f ghost ghost antighost + J ghost` with the
//! doubled ghost pairing, its adjoint action, and the split into twice the
//! Koszul differential plus the vertical part.  A recursion over a Tate
//! table produces charges for ideals that are first class but not moment
//! maps.  Quantum side: the charge built from a quantum moment map, its
//! star-adjoint action and the five pieces that make it up.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{
    rothstein_flat, star, star_commutator, super_poisson, GeneratorTable, GradedElement, Kind, Monomial,
    TruncationPolicy, Var,
};
use crate::error::{Error, Result};
use crate::hpt::Operator;
use crate::koszul::{ghost_grouped, KoszulComplex};
use crate::rational::{q, qf, Q};
use crate::setup::Setup;
use crate::tate::TateResolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeKind {
    Classical,
    Quantum,
}

#[derive(Clone, Debug)]
pub struct Charge {
    pub element: GradedElement,
    pub kind: ChargeKind,
    /// Contributions by recursion step (a single entry for closed formulas).
    pub parts: Vec<GradedElement>,
    /// Lowest ghost filtration degree left in the square, `None` when the
    /// square vanishes.
    pub residual_filtration: Option<u32>,
}

impl Charge {
    pub fn table(&self) -> &Arc<GeneratorTable> {
        self.element.table()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.residual_filtration.is_none()
    }
}

/// `{J_a, J_b} - sum_c f^c_{ab} J_c` for every `a < b` that fails.
pub fn equivariance_residuals(setup: &Setup) -> Vec<(usize, usize, GradedElement)> {
    let t = setup.base_table();
    let mut out = Vec::new();
    for a in 0..setup.l() {
        for b in a + 1..setup.l() {
            let r = &setup.poisson.base_bracket(&setup.moment[a], &setup.moment[b]) - &setup.structure_combination(a, b, t);
            if !r.is_zero() {
                out.push((a, b, r));
            }
        }
    }
    out
}

fn ghost(t: &Arc<GeneratorTable>, a: usize) -> GradedElement {
    GradedElement::gen(t, t.ghost(1, a).expect("ghost declared"))
}

fn anti(t: &Arc<GeneratorTable>, a: usize) -> GradedElement {
    GradedElement::gen(t, t.antighost(1, a).expect("antighost declared"))
}

fn ghost_var(t: &GeneratorTable, a: usize) -> Option<Var> {
    t.ghost(1, a).map(Var::Gen)
}

fn anti_var(t: &GeneratorTable, a: usize) -> Option<Var> {
    t.antighost(1, a).map(Var::Gen)
}

/// `sum f^c_{ab} ghost^a ghost^b antighost_c`.
fn cubic(setup: &Setup, t: &Arc<GeneratorTable>) -> GradedElement {
    let mut out = GradedElement::zero(t);
    let l = setup.l();
    for a in 0..l {
        for b in 0..l {
            for c in 0..l {
                let f = setup.lie.c(a, b, c);
                if f != q(0) {
                    out.add_scaled(&f, &(&(&ghost(t, a) * &ghost(t, b)) * &anti(t, c)));
                }
            }
        }
    }
    out
}

/// Closed-form charge of a moment map.
pub fn classical_charge_ci(setup: &Setup) -> Result<Charge> {
    let res = equivariance_residuals(setup);
    if let Some((a, b, r)) = res.first() {
        return Err(Error::Refused(format!("moment map is not equivariant: {{J{}, J{}}} residual {r}", a + 1, b + 1)));
    }
    let t = GeneratorTable::brst(setup.base_dim(), setup.l());
    let js = setup.moment_in(&t);
    let mut theta = cubic(setup, &t).scale(&qf(-1, 4));
    for (a, j) in js.iter().enumerate() {
        theta = &theta + &(j * &ghost(&t, a));
    }
    let sq = super_poisson(&theta, &theta, &setup.poisson)?;
    if !sq.is_zero() {
        return Err(Error::Internal(format!("{{theta, theta}} = {sq}")));
    }
    Ok(Charge { parts: vec![theta.clone()], element: theta, kind: ChargeKind::Classical, residual_filtration: None })
}

/// Monomials with base degree plus generator count at most `d`.
pub fn slice_probes(t: &Arc<GeneratorTable>, d: u32) -> Vec<GradedElement> {
    let mut out = Vec::new();
    let mut m = Monomial::one(t);
    fn rec(t: &Arc<GeneratorTable>, pos: usize, left: u32, m: &mut Monomial, out: &mut Vec<GradedElement>) {
        if pos == m.exps.len() {
            out.push(GradedElement::term(t, m.clone(), q(1)));
            return;
        }
        let bd = t.base_dim();
        let top = if pos >= bd && t.is_odd(pos - bd) { left.min(1) } else { left };
        for e in 0..=top {
            m.exps[pos] = e as u16;
            rec(t, pos + 1, left - e, m, out);
        }
        m.exps[pos] = 0;
    }
    rec(t, 0, d, &mut m, &mut out);
    out
}

/// First probe where two operators disagree, after truncation in `nu`.
pub fn first_mismatch(probes: &[GradedElement], lhs: &Operator, rhs: &Operator, nu: u32) -> Option<String> {
    probes.par_iter().find_map_any(|x| {
        let a = lhs.apply(x).truncate_nu(nu);
        let b = rhs.apply(x).truncate_nu(nu);
        (a != b).then(|| format!("{} vs {} on {x}: {a} != {b}", lhs.name(), rhs.name()))
    })
}

/// Ghost-free base factor and generator factor of a monomial; base
/// coordinates are even and sit first, so no sign appears.
fn split(t: &Arc<GeneratorTable>, m: &Monomial, c: &Q) -> (GradedElement, GradedElement) {
    let bd = t.base_dim();
    let mut base = Monomial::one(t);
    base.exps[..bd].copy_from_slice(&m.exps[..bd]);
    base.nu = m.nu;
    let mut gens = m.clone();
    gens.nu = 0;
    for e in gens.exps[..bd].iter_mut() {
        *e = 0;
    }
    (GradedElement::term(t, base, c.clone()), GradedElement::term(t, gens, q(1)))
}

/// Apply `f(base, gens)` to every monomial and sum.
fn per_monomial<F>(x: &GradedElement, f: F) -> GradedElement
where
    F: Fn(&GradedElement, &GradedElement) -> GradedElement,
{
    let t = x.table().clone();
    let mut out = GradedElement::zero(&t);
    for (m, c) in x.terms() {
        let (b, v) = split(&t, m, c);
        out = &out + &f(&b, &v);
    }
    out
}

fn d_by(v: &GradedElement, var: Option<Var>) -> GradedElement {
    match var {
        Some(var) => v.partial(var),
        None => GradedElement::zero(v.table()),
    }
}

/// Koszul differential `sum J_a d/d antighost_a` on any table carrying
/// level-one antighosts.
pub fn koszul_operator(setup: &Setup) -> Operator {
    let s = setup.clone();
    Operator::new("koszul", -1, move |x| {
        let t = x.table().clone();
        let js = s.moment_in(&t);
        let mut out = GradedElement::zero(&t);
        for (a, j) in js.iter().enumerate() {
            let d = d_by(x, anti_var(&t, a));
            if !d.is_zero() {
                out = &out + &(j * &d);
            }
        }
        out
    })
}

/// The classical operator bundle.
#[derive(Clone, Debug)]
pub struct ClassicalOperators {
    pub koszul: Operator,
    pub vertical: Operator,
    pub brst: Operator,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityReport {
    pub checks: Vec<(String, bool)>,
    pub probes: usize,
    pub failure: Option<String>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    fn record(&mut self, name: &str, mismatch: Option<String>) {
        if self.failure.is_none() {
            self.failure = mismatch.clone();
        }
        self.checks.push((name.to_string(), mismatch.is_none()));
    }
}

/// Vertical differential
/// `-1/2 f^c_{ab} g^a g^b d/dg^c + f^c_{ab} g^a a_c d/da_b + g^a {J_a, .}`.
pub fn vertical_operator(setup: &Setup) -> Operator {
    let s = setup.clone();
    Operator::new("vertical", 1, move |x| {
        let t = x.table().clone();
        let l = s.l();
        let js = s.moment_in(&t);
        let mut out = GradedElement::zero(&t);
        for a in 0..l {
            for b in 0..l {
                for c in 0..l {
                    let f = s.lie.c(a, b, c);
                    if f == q(0) {
                        continue;
                    }
                    let dg = d_by(x, ghost_var(&t, c));
                    if !dg.is_zero() {
                        out.add_scaled(&(&f * qf(-1, 2)), &(&(&ghost(&t, a) * &ghost(&t, b)) * &dg));
                    }
                    let da = d_by(x, anti_var(&t, b));
                    if !da.is_zero() {
                        out.add_scaled(&f, &(&(&ghost(&t, a) * &anti(&t, c)) * &da));
                    }
                }
            }
            let br = s.poisson.base_bracket(&js[a], x);
            if !br.is_zero() {
                out = &out + &(&ghost(&t, a) * &br);
            }
        }
        out
    })
}

pub fn classical_differential(setup: &Setup, charge: &Charge) -> Result<ClassicalOperators> {
    if charge.kind != ChargeKind::Classical {
        return Err(Error::Argument("classical differential needs a classical charge".into()));
    }
    let theta = charge.element.clone();
    let pi = setup.poisson.clone();
    let brst = Operator::new("brst", 1, move |x| {
        let y = x.embed(theta.table()).expect("brst table");
        super_poisson(&theta, &y, &pi).expect("level-one table")
    });
    Ok(ClassicalOperators { koszul: koszul_operator(setup), vertical: vertical_operator(setup), brst })
}

impl ClassicalOperators {
    /// `D = 2 koszul + vertical` and the three square and anticommutator
    /// identities on the probe elements.
    pub fn verify(&self, probes: &[GradedElement]) -> IdentityReport {
        let mut r = IdentityReport { probes: probes.len(), ..Default::default() };
        let split = self.koszul.scaled(q(2)).plus(&self.vertical).renamed("2 koszul + vertical");
        r.record("brst = 2 koszul + vertical", first_mismatch(probes, &self.brst, &split, u32::MAX));
        let zero = Operator::zero(0);
        let anti = self.koszul.after(&self.vertical).plus(&self.vertical.after(&self.koszul)).renamed("[koszul, vertical]");
        r.record("koszul vertical + vertical koszul = 0", first_mismatch(probes, &anti, &zero, u32::MAX));
        let vv = self.vertical.after(&self.vertical).renamed("vertical^2");
        r.record("vertical^2 = 0", first_mismatch(probes, &vv, &zero, u32::MAX));
        let kk = self.koszul.after(&self.koszul).renamed("koszul^2");
        r.record("koszul^2 = 0", first_mismatch(probes, &kk, &zero, u32::MAX));
        let bb = self.brst.after(&self.brst).renamed("brst^2");
        r.record("brst^2 = 0", first_mismatch(probes, &bb, &zero, u32::MAX));
        r
    }
}

/// Antighost number: sum of levels of antighost factors.
fn antighost_number(t: &GeneratorTable, m: &Monomial) -> u32 {
    m.antighost_degree(t)
}

fn component(x: &GradedElement, k: u32) -> GradedElement {
    let t = x.table().clone();
    x.filter(|m| antighost_number(&t, m) == k)
}

fn lowest_antighost(x: &GradedElement) -> Option<u32> {
    let t = x.table();
    x.terms().keys().map(|m| antighost_number(t, m)).min()
}

/// Solve `d y = r` on each weight component of a ghost-free `r`.
fn solve_weighted(kc: &KoszulComplex, r: &GradedElement, k: u32) -> Option<GradedElement> {
    let t = r.table().clone();
    let mut by_w: std::collections::BTreeMap<u32, GradedElement> = Default::default();
    for (m, c) in r.terms() {
        by_w.entry(kc.weight(m)).or_insert_with(|| GradedElement::zero(&t)).add_term(m.clone(), c.clone());
    }
    let mut out = GradedElement::zero(&t);
    for (w, part) in by_w {
        out = &out + &kc.solve_boundary(&part, w, k)?;
    }
    Some(out)
}

/// Recursive charge on a Tate table with ghosts and the flat bracket.
///
/// Start from `sum_j sum_a d(antighost^{(j)}_a) ghost^a_{(j)}` and, step by
/// step, cancel the lowest antighost-number part of the square by a term
/// one antighost number higher, found by a slice solve against the Tate
/// differential.  Stops when the square vanishes or after
/// `max(policy.filtration, top level + 1)` steps.
pub fn charge_recursion(setup: &Setup, tate: &TateResolution, policy: &TruncationPolicy) -> Result<Charge> {
    let (t, kc) = tate.with_ghosts()?;
    let pi = setup.poisson.clone();
    let mut theta = GradedElement::zero(&t);
    for (g, gen) in t.gens().iter().enumerate() {
        if gen.kind != Kind::Antighost {
            continue;
        }
        let img = kc.images().iter().find(|(i, _)| *i == g).map(|(_, e)| e.clone()).expect("image");
        let gh = GradedElement::gen(&t, t.ghost(gen.level, gen.index).expect("paired ghost"));
        theta = &theta + &(&img * &gh);
    }
    let mut parts = vec![theta.clone()];
    let steps = policy.filtration.max(tate.top_level() + 1);
    let cap = tate.cap;
    for _ in 0..steps {
        let sq = rothstein_flat(&theta, &theta, &pi)?;
        let Some(k) = lowest_antighost(&sq) else { break };
        let s = component(&sq, k);
        if s.terms().keys().any(|m| kc.weight(&strip_ghosts(&t, m)) > cap) {
            return Err(Error::CapExhausted(format!("square has antighost-number {k} terms beyond slice cap {cap}")));
        }
        // Candidate with the right shape, then fix the overall scale.
        let Some(cand) = ghost_grouped(&s, true, |r| solve_weighted(&kc, r, k)) else {
            return Err(Error::Internal(format!("antighost-number {k} part of the square is not a boundary: {s}")));
        };
        let lin = |x: &GradedElement| component(&rothstein_flat(&theta, x, &pi).expect("same table").scale(&q(2)), k);
        let got = lin(&cand);
        let x = match scale_to(&got, &s) {
            Some(lambda) => cand.scale(&(q(-1) / lambda)),
            None => {
                return Err(Error::Internal(format!("antighost-number {k} part of the square is not a boundary: {s}")));
            }
        };
        theta = &theta + &x;
        parts.push(x);
    }
    let sq = rothstein_flat(&theta, &theta, &pi)?;
    Ok(Charge {
        element: theta,
        kind: ChargeKind::Classical,
        parts,
        residual_filtration: sq.filtration_degree().filter(|_| !sq.is_zero()),
    })
}

fn strip_ghosts(t: &GeneratorTable, m: &Monomial) -> Monomial {
    let bd = t.base_dim();
    let mut r = m.clone();
    for (g, gen) in t.gens().iter().enumerate() {
        if gen.kind == Kind::Ghost {
            r.exps[bd + g] = 0;
        }
    }
    r
}

/// `lambda` with `a = lambda b`, if any.
fn scale_to(a: &GradedElement, b: &GradedElement) -> Option<Q> {
    let (m, c) = b.terms().iter().next()?;
    let lambda = a.coeff(m) / c;
    (a == &b.scale(&lambda) && lambda != q(0)).then_some(lambda)
}

/// Lowest ghost filtration degree of the square of a charge under the flat
/// bracket, `None` when it vanishes.
pub fn square_filtration(setup: &Setup, theta: &GradedElement) -> Result<Option<u32>> {
    let sq = rothstein_flat(theta, theta, &setup.poisson)?;
    Ok(if sq.is_zero() { None } else { sq.filtration_degree() })
}

/// `Theta_a * Theta_b - Theta_b * Theta_a - nu sum_c f^c_{ab} Theta_c`
/// for the first failing pair.
pub fn representation_residual(setup: &Setup, qmoment: &[GradedElement], nu_order: u32) -> Result<Option<GradedElement>> {
    let l = setup.l();
    for a in 0..l {
        for b in a + 1..l {
            let lhs = star_commutator(&qmoment[a], &qmoment[b], &setup.poisson, nu_order)?;
            let mut rhs = GradedElement::zero(qmoment[a].table());
            for (c, th) in qmoment.iter().enumerate() {
                rhs.add_scaled(&setup.lie.c(a, b, c), th);
            }
            let r = (&lhs - &rhs.shift_nu(1)).truncate_nu(nu_order);
            if !r.is_zero() {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Quantum moment map shifted by half the trace form.
pub fn unimodular_shift(setup: &Setup, qmoment: &[GradedElement]) -> Vec<GradedElement> {
    qmoment
        .iter()
        .enumerate()
        .map(|(a, th)| {
            let c = GradedElement::nu(th.table()).scale(&(setup.lie.trace(a) * qf(1, 2)));
            th + &c
        })
        .collect()
}

/// `-1/4 f g g a + sum Theta_a g^a + nu/2 sum f^b_{ab} g^a`.
pub fn quantum_charge(setup: &Setup, qmoment: &[GradedElement], nu_order: u32) -> Result<Charge> {
    if qmoment.len() != setup.l() {
        return Err(Error::Argument(format!("{} quantum moment components for l = {}", qmoment.len(), setup.l())));
    }
    let base = setup.base_table();
    let qm: Vec<GradedElement> = qmoment.iter().map(|x| x.embed(base)).collect::<Result<_>>()?;
    if let Some(r) = representation_residual(setup, &qm, nu_order)? {
        return Err(Error::Refused(format!("quantum moment map fails the representation property: {r}")));
    }
    let t = GeneratorTable::brst(setup.base_dim(), setup.l());
    let mut theta = cubic(setup, &t).scale(&qf(-1, 4));
    let nu = GradedElement::nu(&t);
    for (a, th) in qm.iter().enumerate() {
        let g = ghost(&t, a);
        theta = &theta + &(&th.embed(&t)? * &g);
        let tr = setup.lie.trace(a);
        if tr != q(0) {
            theta = &theta + &(&nu * &g).scale(&(tr * qf(1, 2)));
        }
    }
    let sq = star(&theta, &theta, &setup.poisson, nu_order)?;
    if !sq.is_zero() {
        return Err(Error::Internal(format!("Theta * Theta = {sq}")));
    }
    Ok(Charge { parts: vec![theta.clone()], element: theta, kind: ChargeKind::Quantum, residual_filtration: None })
}

/// The quantum operator bundle, `nu`-truncated at `nu_order`.
#[derive(Clone, Debug)]
pub struct QuantumOperators {
    pub brst: Operator,
    pub vertical: Operator,
    pub koszul: Operator,
    pub right: Operator,
    pub quadratic: Operator,
    pub unimodular: Operator,
    pub nu_order: u32,
}

/// `(1/nu)(Theta * x - (-1)^{|x|} x * Theta)`.
fn star_adjoint(theta: &GradedElement, x: &GradedElement, setup: &Setup, n: u32) -> GradedElement {
    let y = x.embed(theta.table()).expect("table");
    star_commutator(theta, &y, &setup.poisson, n + 1)
        .expect("level-one table")
        .unshift_nu(1)
        .expect("commutator is O(nu)")
        .truncate_nu(n)
}

/// `(1/nu)[a, f]_*` for even `a`.
fn star_bracket(a: &GradedElement, f: &GradedElement, setup: &Setup, n: u32) -> GradedElement {
    star_commutator(a, f, &setup.poisson, n + 1)
        .expect("constant Poisson tensor")
        .unshift_nu(1)
        .expect("commutator is O(nu)")
        .truncate_nu(n)
}

fn qmoment_in(qm: &[GradedElement], t: &Arc<GeneratorTable>) -> Vec<GradedElement> {
    qm.iter().map(|x| x.embed(t).expect("base polynomial")).collect()
}

/// Multiplication part `sum (Theta_a * f) dv/d antighost_a`; with the
/// bracket sign used here this is the side that makes the split exact.
pub fn right_operator(setup: &Setup, qmoment: &[GradedElement], n: u32) -> Operator {
    let s = setup.clone();
    let qm = qmoment.to_vec();
    Operator::new("right", -1, move |x| {
        let t = x.table().clone();
        let th = qmoment_in(&qm, &t);
        per_monomial(x, |f, v| {
            let mut out = GradedElement::zero(&t);
            for (a, tha) in th.iter().enumerate() {
                let dv = d_by(v, anti_var(&t, a));
                if dv.is_zero() {
                    continue;
                }
                let fs = star(tha, f, &s.poisson, n).expect("constant Poisson tensor");
                out = &out + &(&fs * &dv);
            }
            out
        })
    })
}

/// `-1/2 sum f^c_{ab} f antighost_c d_b d_a v`, left derivatives in the
/// antighosts, innermost first.
pub fn quadratic_operator(setup: &Setup) -> Operator {
    let s = setup.clone();
    Operator::new("quadratic", -1, move |x| {
        let t = x.table().clone();
        let l = s.l();
        per_monomial(x, |f, v| {
            let mut out = GradedElement::zero(&t);
            for a in 0..l {
                for b in 0..l {
                    let ddv = d_by(&d_by(v, anti_var(&t, a)), anti_var(&t, b));
                    if ddv.is_zero() {
                        continue;
                    }
                    for c in 0..l {
                        let fc = s.lie.c(a, b, c);
                        if fc != q(0) {
                            out.add_scaled(&(fc * qf(-1, 2)), &(&(f * &anti(&t, c)) * &ddv));
                        }
                    }
                }
            }
            out
        })
    })
}

/// `sum f^b_{ab} dv/d antighost_a`.
pub fn unimodular_operator(setup: &Setup) -> Operator {
    let s = setup.clone();
    Operator::new("unimodular", -1, move |x| {
        let t = x.table().clone();
        let mut out = GradedElement::zero(&t);
        for a in 0..s.l() {
            let tr = s.lie.trace(a);
            if tr == q(0) {
                continue;
            }
            out.add_scaled(&tr, &d_by(x, anti_var(&t, a)));
        }
        out
    })
}

/// Quantum vertical differential.
pub fn quantum_vertical(setup: &Setup, qmoment: &[GradedElement], n: u32) -> Operator {
    let s = setup.clone();
    let qm = qmoment.to_vec();
    Operator::new("vertical_q", 1, move |x| {
        let t = x.table().clone();
        let l = s.l();
        let th = qmoment_in(&qm, &t);
        per_monomial(x, |f, v| {
            let mut out = GradedElement::zero(&t);
            for a in 0..l {
                for b in 0..l {
                    for c in 0..l {
                        let fc = s.lie.c(a, b, c);
                        if fc == q(0) {
                            continue;
                        }
                        let dg = d_by(v, ghost_var(&t, c));
                        if !dg.is_zero() {
                            out.add_scaled(&(&fc * qf(-1, 2)), &(&(&(f * &ghost(&t, a)) * &ghost(&t, b)) * &dg));
                        }
                        let da = d_by(v, anti_var(&t, b));
                        if !da.is_zero() {
                            out.add_scaled(&fc, &(&(&(f * &ghost(&t, a)) * &anti(&t, c)) * &da));
                        }
                    }
                }
                let br = star_bracket(&th[a], f, &s, n);
                if !br.is_zero() {
                    out = &out + &(&(&br * &ghost(&t, a)) * v);
                }
            }
            out
        })
    })
}

/// Quantum Koszul differential `right + nu (unimodular / 2 - quadratic)`.
pub fn quantum_koszul(setup: &Setup, qmoment: &[GradedElement], n: u32) -> Operator {
    let right = right_operator(setup, qmoment, n);
    let quadratic = quadratic_operator(setup);
    let unimodular = unimodular_operator(setup);
    let nu_op = |op: &Operator, c: Q| {
        let op = op.clone();
        Operator::new("nu", -1, move |x| op.apply(x).shift_nu(1).scale(&c).truncate_nu(n))
    };
    right
        .plus(&nu_op(&unimodular, qf(1, 2)))
        .minus(&nu_op(&quadratic, q(1)))
        .truncated(n)
        .renamed("koszul_q")
}

pub fn quantum_differentials(
    setup: &Setup,
    charge: &Charge,
    qmoment: &[GradedElement],
    policy: &TruncationPolicy,
) -> Result<QuantumOperators> {
    if charge.kind != ChargeKind::Quantum {
        return Err(Error::Argument("quantum differentials need a quantum charge".into()));
    }
    let n = policy.nu_order;
    let theta = charge.element.clone();
    let s = setup.clone();
    let brst = Operator::new("brst_q", 1, move |x| star_adjoint(&theta, x, &s, n));
    let right = right_operator(setup, qmoment, n);
    let quadratic = quadratic_operator(setup);
    let unimodular = unimodular_operator(setup);
    let koszul = quantum_koszul(setup, qmoment, n);
    Ok(QuantumOperators {
        brst,
        vertical: quantum_vertical(setup, qmoment, n),
        koszul,
        right,
        quadratic,
        unimodular,
        nu_order: n,
    })
}

impl QuantumOperators {
    pub fn verify(&self, probes: &[GradedElement]) -> IdentityReport {
        let n = self.nu_order;
        let mut r = IdentityReport { probes: probes.len(), ..Default::default() };
        let zero = Operator::zero(0);
        let split = self.vertical.plus(&self.koszul.scaled(q(2))).renamed("vertical + 2 koszul");
        r.record("brst = vertical + 2 koszul", first_mismatch(probes, &self.brst, &split, n));
        let kk = self.koszul.after(&self.koszul).renamed("koszul^2");
        r.record("koszul^2 = 0", first_mismatch(probes, &kk, &zero, n));
        let vv = self.vertical.after(&self.vertical).renamed("vertical^2");
        r.record("vertical^2 = 0", first_mismatch(probes, &vv, &zero, n));
        let anti = self.vertical.after(&self.koszul).plus(&self.koszul.after(&self.vertical)).renamed("anticommutator");
        r.record("vertical koszul + koszul vertical = 0", first_mismatch(probes, &anti, &zero, n));
        r
    }
}

/// Deformed representation on the Koszul table:
/// `rho_X(f v) = f ad_X(v) + (1/nu)(Theta(X) * f - f * Theta(X)) v`.
pub fn rho(setup: &Setup, qmoment: &[GradedElement], a: usize, n: u32) -> Operator {
    let s = setup.clone();
    let qm = qmoment.to_vec();
    Operator::new("rho", 0, move |x| {
        let t = x.table().clone();
        let th = qmoment_in(&qm, &t);
        let l = s.l();
        per_monomial(x, |f, v| {
            let mut out = &star_bracket(&th[a], f, &s, n) * v;
            for b in 0..l {
                let dv = d_by(v, anti_var(&t, b));
                if dv.is_zero() {
                    continue;
                }
                let mut img = GradedElement::zero(&t);
                for c in 0..l {
                    img.add_scaled(&s.lie.c(a, b, c), &anti(&t, c));
                }
                out = &out + &(&(f * &img) * &dv);
            }
            out
        })
    })
}

/// `[rho_X, koszul] = 0` for every basis vector `X`.
pub fn check_equivariance(setup: &Setup, qmoment: &[GradedElement], koszul: &Operator, probes: &[GradedElement], n: u32) -> Option<String> {
    (0..setup.l()).find_map(|a| {
        let r = rho(setup, qmoment, a, n);
        let comm = r.after(koszul).minus(&koszul.after(&r)).renamed("[rho, koszul]");
        first_mismatch(probes, &comm, &Operator::zero(0), n)
    })
}

/// Probe elements for the quantum checks: monomials up to `d` times `nu^0`.
pub fn quantum_probes(t: &Arc<GeneratorTable>, d: u32) -> Vec<GradedElement> {
    slice_probes(t, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Lie, Poisson};

    fn angular() -> Setup {
        let t = GeneratorTable::base(6);
        let x = |i| GradedElement::base_var(&t, i);
        let j1 = &(&x(1) * &x(5)) - &(&x(2) * &x(4));
        let j2 = &(&x(2) * &x(3)) - &(&x(0) * &x(5));
        let j3 = &(&x(0) * &x(4)) - &(&x(1) * &x(3));
        Setup::new("am", Poisson::canonical(3), Lie::so3(), vec![j1, j2, j3]).unwrap()
    }

    fn angular_equivariant() -> Setup {
        let s = angular();
        let m: Vec<GradedElement> = s.moment.iter().map(|j| -j).collect();
        let lie = s.lie.clone();
        Setup::new("am", s.poisson, lie, m).unwrap()
    }

    #[test]
    fn sign_of_angular_momentum() {
        let bad = equivariance_residuals(&angular()).len();
        let good = equivariance_residuals(&angular_equivariant()).len();
        assert!(bad > 0 || good > 0);
        assert!(bad == 0 || good == 0);
    }

    fn so3_setup() -> Setup {
        if equivariance_residuals(&angular()).is_empty() {
            angular()
        } else {
            angular_equivariant()
        }
    }

    #[test]
    fn so3_charge_is_nilpotent() {
        let s = so3_setup();
        let c = classical_charge_ci(&s).unwrap();
        assert!(c.is_nilpotent());
    }

    #[test]
    fn so3_classical_identities() {
        let s = so3_setup();
        let c = classical_charge_ci(&s).unwrap();
        let ops = classical_differential(&s, &c).unwrap();
        let probes = slice_probes(c.table(), 3);
        let r = ops.verify(&probes);
        assert!(r.holds(), "{:?}", r);
    }

    #[test]
    fn so3_quantum_identities() {
        let s = so3_setup();
        let qm = s.moment.clone();
        let c = quantum_charge(&s, &qm, 3).unwrap();
        let ops = quantum_differentials(&s, &c, &qm, &TruncationPolicy::nu(3)).unwrap();
        let probes = slice_probes(c.table(), 3);
        let r = ops.verify(&probes);
        assert!(r.holds(), "{:?}", r);
    }

    #[test]
    fn so3_rho_commutes_with_koszul() {
        let s = so3_setup();
        let qm = s.moment.clone();
        let c = quantum_charge(&s, &qm, 2).unwrap();
        let ops = quantum_differentials(&s, &c, &qm, &TruncationPolicy::nu(2)).unwrap();
        let kt = GeneratorTable::koszul(6, 3);
        let probes = slice_probes(&kt, 3);
        assert_eq!(check_equivariance(&s, &qm, &ops.koszul, &probes, 2), None);
    }

    #[test]
    fn structure_function_recursion() {
        // J1 = p1, J2 = p2 + q1^2 p1 on (q1, q2, p1, p2).
        let t = GeneratorTable::base(4);
        let x = |i| GradedElement::base_var(&t, i);
        let j1 = x(2);
        let j2 = &x(3) + &(&(&x(0) * &x(0)) * &x(2));
        let s = Setup::new("toy", Poisson::canonical(2), Lie::abelian(2), vec![j1, j2])
            .unwrap()
            .with_base_weights(vec![1, 1, 1, 3])
            .unwrap();
        let p = TruncationPolicy { poly_degree: Some(6), ..Default::default() };
        let tate = TateResolution::from_setup(&s, &p).unwrap();
        let c = charge_recursion(&s, &tate, &p).unwrap();
        assert!(c.is_nilpotent(), "{}", c.element);
        assert!(c.parts.len() >= 2 && !c.parts[1].is_zero());
        let ct = c.table().clone();
        let q1 = GradedElement::base_var(&ct, 0);
        let g = |a| GradedElement::gen(&ct, ct.ghost(1, a).unwrap());
        let an = GradedElement::gen(&ct, ct.antighost(1, 0).unwrap());
        let shape = &(&(&q1 * &g(0)) * &g(1)) * &an;
        let lambda = scale_to(&c.parts[1], &shape).expect("single structure-function term");
        assert!(lambda == q(2) || lambda == q(-2), "{lambda}");
    }
}
