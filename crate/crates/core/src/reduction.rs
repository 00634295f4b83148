//! Reduction to the zero fibre: the quantum contraction with its deformed
//! restriction, the reduced star product, the classical BRST contraction
//! and its bracket, and torus invariants.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::algebra::{star, super_poisson, GeneratorTable, GradedElement, Monomial, TruncationPolicy, Var};
use crate::brst::{quantum_koszul, vertical_operator};
use crate::error::{Error, Result};
use crate::hpt::{self, Contraction, Operator};
use crate::koszul::{base_monomials, KoszulContraction};
use crate::linalg::{Echelon, Insert};
use crate::rational::q;
use crate::setup::Setup;

/// Quantum deformation of a Koszul contraction with a cached deformed
/// restriction `qres = res (1 + t h)^{-1}`, `t = Delta - d`.
#[derive(Clone)]
pub struct QuantumContraction {
    setup: Setup,
    kos: KoszulContraction,
    perturbation: Operator,
    nu_order: u32,
    cache: Arc<Mutex<HashMap<Monomial, GradedElement>>>,
}

impl std::fmt::Debug for QuantumContraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QuantumContraction(nu^{})", self.nu_order)
    }
}

pub fn quantum_contraction(
    setup: &Setup,
    kos: &KoszulContraction,
    qmoment: &[GradedElement],
    policy: &TruncationPolicy,
) -> Result<QuantumContraction> {
    if kos.table().count(crate::algebra::Kind::Ghost, 1) > 0 {
        return Err(Error::Argument("quantum contraction acts on the ghost-free Koszul table".into()));
    }
    let n = policy.nu_order;
    let delta = quantum_koszul(setup, qmoment, n);
    let k = kos.clone();
    let d = Operator::new("d", -1, move |x| k.d(x));
    let perturbation = delta.minus(&d).truncated(n).renamed("Delta - d");
    // The defining side condition: h vanishes on the model.
    let model = kos.model_basis();
    if let Some(x) = model.iter().find(|x| !kos.h(x).is_zero()) {
        return Err(Error::Refused(format!("h prol != 0 on {x}")));
    }
    Ok(QuantumContraction {
        setup: setup.clone(),
        kos: kos.clone(),
        perturbation,
        nu_order: n,
        cache: Arc::new(Mutex::new(HashMap::new())),
    })
}

impl QuantumContraction {
    pub fn koszul(&self) -> &KoszulContraction {
        &self.kos
    }

    pub fn nu_order(&self) -> u32 {
        self.nu_order
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        self.kos.table()
    }

    /// `t = Delta - d`.
    pub fn perturbation(&self) -> &Operator {
        &self.perturbation
    }

    fn qres_monomial(&self, m: &Monomial) -> GradedElement {
        if let Some(r) = self.cache.lock().expect("lock").get(m) {
            return r.clone();
        }
        let t = self.table().clone();
        let mut y = GradedElement::term(&t, m.clone(), q(1));
        let mut acc = self.kos.res(&y);
        for _ in 0..=self.nu_order {
            y = -self.perturbation.apply(&self.kos.h(&y)).truncate_nu(self.nu_order);
            if y.is_zero() {
                break;
            }
            acc = &acc + &self.kos.res(&y);
        }
        self.cache.lock().expect("lock").insert(m.clone(), acc.clone());
        acc
    }

    /// Deformed restriction of a degree-zero element.
    pub fn qres(&self, x: &GradedElement) -> GradedElement {
        let t = self.table().clone();
        let x = x.embed(&t).expect("base or Koszul element");
        let mut out = GradedElement::zero(&t);
        for (m, c) in x.terms() {
            let mut m0 = m.clone();
            let k = m0.nu;
            m0.nu = 0;
            out.add_scaled(c, &self.qres_monomial(&m0).shift_nu(k));
        }
        out.truncate_nu(self.nu_order)
    }

    /// The perturbed contraction from the perturbation lemma that keeps
    /// the injection, truncated in `nu`.
    pub fn contraction(&self) -> Result<Contraction> {
        let base = self.kos.contraction();
        let c = hpt::perturb_keep_i(&base, &self.perturbation, self.nu_order as usize + 2)?;
        Ok(c.truncated(self.nu_order))
    }

    /// Deformed representation `rho(e_a)` on the Koszul table.
    pub fn rho(&self, qmoment: &[GradedElement], a: usize) -> Operator {
        crate::brst::rho(&self.setup, qmoment, a, self.nu_order)
    }
}

/// `{J_a, f}` for the first `a` where it does not vanish.
pub fn invariance_defect(setup: &Setup, f: &GradedElement) -> Option<(usize, GradedElement)> {
    let t = setup.base_table();
    let f = f.embed(t).ok()?;
    (0..setup.l()).find_map(|a| {
        let r = setup.poisson.base_bracket(&setup.moment[a], &f);
        (!r.is_zero()).then_some((a, r))
    })
}

fn check_invariant(setup: &Setup, f: &GradedElement) -> Result<()> {
    if let Some((a, r)) = invariance_defect(setup, f) {
        return Err(Error::Refused(format!("input {f} is not invariant: {{J{}, f}} = {r}", a + 1)));
    }
    Ok(())
}

/// `f * g = qres(prol f star prol g)` as a base element.
pub fn reduced_star(qc: &QuantumContraction, f: &GradedElement, g: &GradedElement) -> Result<GradedElement> {
    let setup = &qc.setup;
    check_invariant(setup, f)?;
    check_invariant(setup, g)?;
    Ok(reduced_star_unchecked(qc, f, g))
}

fn reduced_star_unchecked(qc: &QuantumContraction, f: &GradedElement, g: &GradedElement) -> GradedElement {
    let base = qc.setup.base_table();
    let f = f.embed(base).expect("base element");
    let g = g.embed(base).expect("base element");
    let fg = star(&f, &g, &qc.setup.poisson, qc.nu_order).expect("constant Poisson tensor");
    qc.qres(&fg).embed(base).expect("degree zero")
}

/// `(f * g - g * f) / nu` at order zero.
pub fn semiclassical_bracket(qc: &QuantumContraction, f: &GradedElement, g: &GradedElement) -> Result<GradedElement> {
    let a = reduced_star(qc, f, g)?;
    let b = reduced_star(qc, g, f)?;
    Ok((&a - &b).nu_part(1))
}

/// Classical BRST contraction: the Koszul contraction on the BRST table,
/// with differential `2 d`, perturbed by the vertical differential.
#[derive(Clone)]
pub struct ClassicalContraction {
    setup: Setup,
    kos: KoszulContraction,
    pub contraction: Contraction,
}

impl std::fmt::Debug for ClassicalContraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ClassicalContraction({})", self.setup.name)
    }
}

pub fn classical_contraction(setup: &Setup, kos: &KoszulContraction) -> Result<ClassicalContraction> {
    if kos.table().count(crate::algebra::Kind::Ghost, 1) != setup.l() {
        return Err(Error::Argument("classical contraction needs the BRST table".into()));
    }
    let base = hpt::rescale(&kos.contraction(), q(2));
    let c = hpt::perturb_keep_p(&base, &vertical_operator(setup), setup.l() + 2)?;
    Ok(ClassicalContraction { setup: setup.clone(), kos: kos.clone(), contraction: c })
}

impl ClassicalContraction {
    /// Vertical (cochain) differential on the model.
    pub fn vertical(&self, a: &GradedElement) -> GradedElement {
        self.contraction.small.differential.apply(a)
    }

    pub fn lift(&self, a: &GradedElement) -> GradedElement {
        self.contraction.inject.apply(a)
    }

    pub fn res(&self, x: &GradedElement) -> GradedElement {
        self.kos.res(x)
    }
}

/// `{[a], [b]} = [res {Phi a, Phi b}]` for cocycles `a`, `b`.
pub fn classical_reduced_bracket(cc: &ClassicalContraction, a: &GradedElement, b: &GradedElement) -> Result<GradedElement> {
    let t = cc.kos.table().clone();
    let a = a.embed(&t)?;
    let b = b.embed(&t)?;
    for x in [&a, &b] {
        let r = cc.vertical(x);
        if !r.is_zero() {
            return Err(Error::Refused(format!("{x} is not a cocycle: d = {r}")));
        }
    }
    let br = super_poisson(&cc.lift(&a), &cc.lift(&b), &cc.setup.poisson)?;
    Ok(cc.res(&br))
}

/// `res {prol f, prol g}`.
pub fn dirac_bracket(kos: &KoszulContraction, setup: &Setup, f: &GradedElement, g: &GradedElement) -> GradedElement {
    let t = kos.table().clone();
    let f = f.embed(&t).expect("base element");
    let g = g.embed(&t).expect("base element");
    kos.res(&setup.poisson.base_bracket(&kos.prol(&f), &kos.prol(&g)))
}

/// Rotation generators `sum_k W_ak (x_k d/dy_k - y_k d/dx_k)`, `y_k = x_{n+k}`.
fn rotation(setup: &Setup, a: usize, f: &GradedElement) -> GradedElement {
    let w = &setup.torus_weights.as_ref().expect("torus weights")[a];
    let n = w.len();
    let t = f.table().clone();
    let mut out = GradedElement::zero(&t);
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0 {
            continue;
        }
        let x = GradedElement::base_var(&t, k);
        let y = GradedElement::base_var(&t, n + k);
        let r = &(&x * &f.partial(Var::Base(n + k))) - &(&y * &f.partial(Var::Base(k)));
        out.add_scaled(&q(wk), &r);
    }
    out
}

/// Basis of torus-invariant homogeneous polynomials of degree `d`.
pub fn torus_invariants(setup: &Setup, d: u32) -> Result<Vec<GradedElement>> {
    if !setup.lie.is_abelian() {
        return Err(Error::Unsupported("torus invariants need an abelian Lie algebra".into()));
    }
    let Some(_) = &setup.torus_weights else {
        return Err(Error::Unsupported("setup has no torus weights".into()));
    };
    let t = setup.base_table().clone();
    let monos = base_monomials(&t, &vec![1; t.base_dim()], d);
    let images: Vec<BTreeMap<(usize, Monomial), crate::rational::Q>> = monos
        .par_iter()
        .map(|m| {
            let x = GradedElement::term(&t, m.clone(), q(1));
            let mut v = BTreeMap::new();
            for a in 0..setup.l() {
                for (mm, c) in rotation(setup, a, &x).into_terms() {
                    v.insert((a, mm), c);
                }
            }
            v
        })
        .collect();
    let ech = Echelon::from_vectors(images.iter());
    Ok(ech
        .kernel()
        .iter()
        .map(|combo| {
            let mut e = GradedElement::zero(&t);
            for (j, c) in combo {
                e.add_term(monos[*j].clone(), c.clone());
            }
            e
        })
        .collect())
}

/// Independent normal forms of the given elements modulo the ideal.
pub fn normal_forms(kos: &KoszulContraction, xs: &[GradedElement]) -> Vec<GradedElement> {
    let t = kos.table().clone();
    let base = xs.first().map(|x| x.table().clone());
    let mut ech: Echelon<Monomial> = Echelon::new();
    let mut out = Vec::new();
    for x in xs {
        let r = kos.res(&x.embed(&t).expect("base element"));
        if r.is_zero() {
            continue;
        }
        if let Insert::Pivot(_) = ech.insert(r.terms().clone()) {
            out.push(r.embed(base.as_ref().expect("nonempty")).expect("degree zero"));
        }
    }
    out
}

/// Structure constants of the reduced product on a set of invariants.
#[derive(Clone, Debug)]
pub struct ReducedProductTable {
    pub generators: Vec<GradedElement>,
    pub products: BTreeMap<(usize, usize), GradedElement>,
    /// Triples whose associator is nonzero, with the associator.
    pub residuals: Vec<((usize, usize, usize), GradedElement)>,
    pub triples_checked: usize,
}

impl ReducedProductTable {
    pub fn associative(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Products of every pair and associators on the listed triples
    /// (all triples when `triples` is `None`).
    pub fn build(
        qc: &QuantumContraction,
        generators: Vec<GradedElement>,
        triples: Option<Vec<(usize, usize, usize)>>,
    ) -> Result<ReducedProductTable> {
        for g in &generators {
            check_invariant(&qc.setup, g)?;
        }
        let n = generators.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let products: BTreeMap<(usize, usize), GradedElement> = pairs
            .par_iter()
            .map(|&(i, j)| ((i, j), reduced_star_unchecked(qc, &generators[i], &generators[j])))
            .collect();
        let triples = triples.unwrap_or_else(|| {
            (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect()
        });
        let mut residuals: Vec<((usize, usize, usize), GradedElement)> = triples
            .par_iter()
            .filter_map(|&(i, j, k)| {
                let left = reduced_star_unchecked(qc, &products[&(i, j)], &generators[k]);
                let right = reduced_star_unchecked(qc, &generators[i], &products[&(j, k)]);
                let r = &left - &right;
                (!r.is_zero()).then_some(((i, j, k), r))
            })
            .collect();
        residuals.sort_by_key(|r| r.0);
        Ok(ReducedProductTable { generators, products, residuals, triples_checked: triples.len() })
    }
}

/// Associator of three invariants under the reduced product.
pub fn associator(qc: &QuantumContraction, f: &GradedElement, g: &GradedElement, h: &GradedElement) -> Result<GradedElement> {
    let fg = reduced_star(qc, f, g)?;
    let gh = reduced_star(qc, g, h)?;
    Ok(&reduced_star_unchecked(qc, &fg, h) - &reduced_star_unchecked(qc, f, &gh))
}
