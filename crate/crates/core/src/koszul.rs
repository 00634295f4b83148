//! Koszul complexes on moment maps: the differential, slice homology, and
//! contractions onto a model of the zero fibre.
//!
//! A slice is fixed by a total weight: base coordinates carry their grading
//! weights, an antighost carries the weight of its differential.  The
//! differential preserves the weight, so every slice is finite and all
//! questions reduce to exact linear algebra on monomial bases.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::{mul_monomials, GeneratorTable, GradedElement, Kind, Monomial, TruncationPolicy, Var};
use crate::error::{Error, Result};
use crate::hpt::{self, Complex, Contraction, Operator, SideConditions};
use crate::linalg::{Echelon, Insert, SparseVec};
use crate::rational::{q, Q};
use crate::setup::Setup;

/// `sum_a J_a d/dxi_a` applied to `a`.
pub fn koszul_differential(a: &GradedElement, setup: &Setup) -> Result<GradedElement> {
    let t = a.table();
    if t.base_dim() != setup.base_dim() {
        return Err(Error::TableMismatch);
    }
    if t.max_level() > 1 && t.count(Kind::Antighost, 2) > 0 {
        let used_high = a.terms().keys().any(|m| {
            t.gens().iter().enumerate().any(|(g, gen)| gen.kind == Kind::Antighost && gen.level > 1 && m.gen_exp(t, g) > 0)
        });
        if used_high {
            return Err(Error::Unsupported("higher-level antighosts belong to a Tate resolution".into()));
        }
    }
    if t.count(Kind::Antighost, 1) != setup.l() {
        return Err(Error::Argument(format!(
            "table declares {} level-one antighosts, setup has {} constraints",
            t.count(Kind::Antighost, 1),
            setup.l()
        )));
    }
    let js = setup.moment_in(t);
    let mut out = GradedElement::zero(t);
    for (k, j) in js.iter().enumerate() {
        let g = t.antighost(1, k).expect("declared");
        out = &out + &(j * &a.partial(Var::Gen(g)));
    }
    Ok(out)
}

/// Grading weights of base coordinates and generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub base: Vec<u32>,
    /// One entry per generator; ghosts are ignored by slicing.
    pub gens: Vec<u32>,
}

impl Weights {
    pub fn of(&self, t: &GeneratorTable, m: &Monomial) -> u32 {
        let bd = t.base_dim();
        let b: u32 = m.exps[..bd].iter().zip(&self.base).map(|(&e, &w)| e as u32 * w).sum();
        let g: u32 = t
            .gens()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind == Kind::Antighost)
            .map(|(i, _)| m.exps[bd + i] as u32 * self.gens[i])
            .sum();
        b + g
    }
}

/// Ghost-free, `nu`-free monomials of total weight `w` and homological
/// degree `k`, in increasing monomial order.
pub fn slice_monomials(t: &GeneratorTable, weights: &Weights, w: u32, k: u32) -> Vec<Monomial> {
    let bd = t.base_dim();
    // (slot, weight, homological degree, max exponent)
    let mut vars: Vec<(usize, u32, u32, u16)> = (0..bd).map(|i| (i, weights.base[i], 0, u16::MAX)).collect();
    for (g, gen) in t.gens().iter().enumerate() {
        if gen.kind == Kind::Antighost {
            vars.push((bd + g, weights.gens[g], gen.level, if gen.is_odd() { 1 } else { u16::MAX }));
        }
    }
    let mut out = Vec::new();
    let mut cur = Monomial::one(t);
    fn rec(
        vars: &[(usize, u32, u32, u16)],
        i: usize,
        w: u32,
        k: u32,
        cur: &mut Monomial,
        out: &mut Vec<Monomial>,
    ) {
        if i == vars.len() {
            if w == 0 && k == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let (slot, wt, hd, max) = vars[i];
        let mut e: u16 = 0;
        loop {
            let used_w = wt * e as u32;
            let used_k = hd * e as u32;
            if used_w > w || used_k > k {
                break;
            }
            cur.exps[slot] = e;
            rec(vars, i + 1, w - used_w, k - used_k, cur, out);
            if e == max || (wt == 0 && hd == 0) {
                break;
            }
            e += 1;
        }
        cur.exps[slot] = 0;
    }
    if vars.iter().any(|v| v.1 == 0) {
        return out;
    }
    rec(&vars, 0, w, k, &mut cur, &mut out);
    out.sort();
    out
}

struct Level {
    basis: Vec<Monomial>,
    /// Images of `basis` under the differential, inserted in order.
    images: Echelon<Monomial>,
}

/// A Koszul or Koszul-Tate complex with its slice data.
pub struct KoszulComplex {
    table: Arc<GeneratorTable>,
    /// Antighost generator index and its differential.
    images: Vec<(usize, GradedElement)>,
    weights: Weights,
    levels: Mutex<HashMap<(u32, u32), Arc<Level>>>,
}

impl std::fmt::Debug for KoszulComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KoszulComplex({} generators)", self.images.len())
    }
}

impl KoszulComplex {
    /// Complex with antighost differentials `images` (ghost-free elements of
    /// `table`).  Antighost weights are read off from the images.
    pub fn new(table: &Arc<GeneratorTable>, images: Vec<(usize, GradedElement)>, base_weights: Vec<u32>) -> Result<Self> {
        let mut gens = vec![0u32; table.n_gens()];
        let partial = Weights { base: base_weights.clone(), gens: gens.clone() };
        // Images only involve lower levels, so weights resolve level by level.
        let mut sorted = images.clone();
        sorted.sort_by_key(|(g, _)| table.gen(*g).level);
        for (g, img) in &sorted {
            if table.gen(*g).kind != Kind::Antighost {
                return Err(Error::Argument(format!("{} is not an antighost", table.gen(*g).name)));
            }
            let current = Weights { gens: gens.clone(), ..partial.clone() };
            let mut ws = img.terms().keys().map(|m| current.of(table, m));
            let w = ws.next().ok_or_else(|| Error::Argument(format!("differential of {} vanishes", table.gen(*g).name)))?;
            if ws.any(|x| x != w) {
                return Err(Error::Refused(format!(
                    "differential of {} is not homogeneous; filtered slices are not implemented",
                    table.gen(*g).name
                )));
            }
            if w == 0 {
                return Err(Error::Refused(format!("differential of {} has weight zero", table.gen(*g).name)));
            }
            gens[*g] = w;
        }
        Ok(KoszulComplex {
            table: table.clone(),
            images,
            weights: Weights { base: base_weights, gens },
            levels: Mutex::new(HashMap::new()),
        })
    }

    /// The Koszul complex of a homogeneous moment map on `table`.
    pub fn from_setup(setup: &Setup, table: &Arc<GeneratorTable>) -> Result<Self> {
        if !setup.is_homogeneous() {
            return Err(Error::Refused(
                "moment map is not homogeneous for the base weights; filtered slices are not implemented".into(),
            ));
        }
        if table.count(Kind::Antighost, 1) != setup.l() {
            return Err(Error::Argument("table does not match the number of constraints".into()));
        }
        let js = setup.moment_in(table);
        let images = js.into_iter().enumerate().map(|(a, j)| (table.antighost(1, a).expect("declared"), j)).collect();
        Self::new(table, images, setup.base_weights.clone())
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn images(&self) -> &[(usize, GradedElement)] {
        &self.images
    }

    /// Largest homological degree of a ghost-free monomial in one slice.
    pub fn max_k(&self, w: u32) -> u32 {
        let mut best = 0;
        for (g, _) in &self.images {
            let gen = self.table.gen(*g);
            let wt = self.weights.gens[*g];
            let reps = if gen.is_odd() { 1 } else { w / wt };
            best += gen.level * reps.min(w / wt);
        }
        best
    }

    pub fn apply(&self, x: &GradedElement) -> GradedElement {
        let mut out = GradedElement::zero(x.table());
        for (g, img) in &self.images {
            let d = x.partial(Var::Gen(*g));
            if !d.is_zero() {
                out = &out + &(img * &d);
            }
        }
        out
    }

    pub fn operator(self: &Arc<Self>) -> Operator {
        let me = self.clone();
        Operator::new("d", -1, move |x| me.apply(x))
    }

    pub fn weight(&self, m: &Monomial) -> u32 {
        self.weights.of(&self.table, m)
    }

    fn level(&self, w: u32, k: u32) -> Arc<Level> {
        if let Some(l) = self.levels.lock().expect("lock").get(&(w, k)) {
            return l.clone();
        }
        let basis = slice_monomials(&self.table, &self.weights, w, k);
        let mut images = Echelon::new();
        for m in &basis {
            let img = self.apply(&GradedElement::term(&self.table, m.clone(), q(1)));
            images.insert(img.into_terms());
        }
        let l = Arc::new(Level { basis, images });
        self.levels.lock().expect("lock").entry((w, k)).or_insert(l).clone()
    }

    pub fn dim(&self, w: u32, k: u32) -> usize {
        self.level(w, k).basis.len()
    }

    /// Rank of the differential leaving `K_{w,k}`.
    pub fn rank(&self, w: u32, k: u32) -> usize {
        if k == 0 {
            0
        } else {
            self.level(w, k).images.rank()
        }
    }

    pub fn homology_dim(&self, w: u32, k: u32) -> usize {
        self.dim(w, k) - self.rank(w, k) - self.rank(w, k + 1)
    }

    /// Cycles of `K_{w,k}` representing a basis of homology, reduced
    /// modulo boundaries.
    pub fn homology_basis(&self, w: u32, k: u32) -> Vec<GradedElement> {
        let here = self.level(w, k);
        let cycles: Vec<SparseVec<Monomial>> = if k == 0 {
            here.basis.iter().map(|m| SparseVec::from([(m.clone(), q(1))])).collect()
        } else {
            here.images
                .kernel()
                .iter()
                .map(|combo| {
                    let mut v = SparseVec::new();
                    for (j, c) in combo {
                        crate::linalg::axpy(&mut v, c, &SparseVec::from([(here.basis[*j].clone(), q(1))]));
                    }
                    v
                })
                .collect()
        };
        let mut ech = self.level(w, k + 1).images.clone();
        let mut out = Vec::new();
        for c in cycles {
            let (rem, _) = ech.reduce(&c);
            if rem.is_empty() {
                continue;
            }
            if let Insert::Pivot(_) = ech.insert(rem.clone()) {
                out.push(GradedElement::from_terms(&self.table, rem));
            }
        }
        out
    }

    /// `y` with `d y = x` for ghost-free, `nu`-free `x` in a single slice of
    /// degree `k`; the solution is linear in `x`.
    pub fn solve_boundary(&self, x: &GradedElement, w: u32, k: u32) -> Option<GradedElement> {
        if x.is_zero() {
            return Some(GradedElement::zero(&self.table));
        }
        let up = self.level(w, k + 1);
        let combo = up.images.solve(x.terms())?;
        let mut y = GradedElement::zero(&self.table);
        for (j, c) in combo {
            y.add_term(up.basis[j].clone(), c);
        }
        Some(y)
    }

    /// Echelon of the boundaries landing in `K_{w,k}`.
    pub fn boundaries(&self, w: u32, k: u32) -> Echelon<Monomial> {
        self.level(w, k + 1).images.clone()
    }

    pub fn basis(&self, w: u32, k: u32) -> Vec<Monomial> {
        self.level(w, k).basis.clone()
    }
}

/// One entry of a homology table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyRow {
    pub slice: u32,
    pub k: u32,
    pub chains: usize,
    pub dim: usize,
}

fn slice_cap(policy: &TruncationPolicy) -> u32 {
    policy.poly_degree.unwrap_or(6)
}

/// `dim H_k` on every slice of weight at most the policy degree.
pub fn homology_ranks(setup: &Setup, policy: &TruncationPolicy) -> Result<Vec<HomologyRow>> {
    let t = GeneratorTable::koszul(setup.base_dim(), setup.l());
    let kc = KoszulComplex::from_setup(setup, &t)?;
    Ok(homology_table(&kc, slice_cap(policy)))
}

pub fn homology_table(kc: &KoszulComplex, cap: u32) -> Vec<HomologyRow> {
    let cells: Vec<(u32, u32)> = (0..=cap).flat_map(|w| (0..=kc.max_k(w)).map(move |k| (w, k))).collect();
    cells
        .par_iter()
        .map(|&(w, k)| HomologyRow { slice: w, k, chains: kc.dim(w, k), dim: kc.homology_dim(w, k) })
        .collect()
}

/// Per slice, the alternating sums of chain and homology dimensions agree.
pub fn euler_consistent(rows: &[HomologyRow]) -> bool {
    let mut sums: HashMap<u32, (i64, i64)> = HashMap::new();
    for r in rows {
        let s = if r.k % 2 == 0 { 1 } else { -1 };
        let e = sums.entry(r.slice).or_default();
        e.0 += s * r.chains as i64;
        e.1 += s * r.dim as i64;
    }
    sums.values().all(|(a, b)| a == b)
}

/// First slice in range with nonzero higher homology.
pub fn first_non_acyclic(kc: &KoszulComplex, cap: u32, from_k: u32) -> Option<(u32, u32, usize)> {
    for w in 0..=cap {
        for k in from_k..=kc.max_k(w) {
            let d = kc.homology_dim(w, k);
            if d > 0 {
                return Some((w, k, d));
            }
        }
    }
    None
}

/// How the zero-fibre model sits inside the degree-zero chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Complement {
    /// Monomials that are not echelon pivots of the ideal slice.
    #[default]
    Echelon,
    /// Orthogonal complement for `<x^a, x^b> = a! delta_ab`, which is
    /// invariant under orthogonal linear actions.
    Fischer,
}

enum Flavor {
    /// Coordinate projection onto the first `l` coordinates.
    Linear(usize),
    Slice(Complement),
}

struct ContractionData {
    kc: Arc<KoszulComplex>,
    flavor: Flavor,
    res_cache: Mutex<HashMap<Monomial, GradedElement>>,
    h_cache: Mutex<HashMap<Monomial, GradedElement>>,
    fischer: Mutex<HashMap<u32, Arc<FischerSlice>>>,
}

struct FischerSlice {
    unknowns: Vec<Monomial>,
    system: Echelon<(usize, Monomial)>,
}

fn strip_nu(m: &Monomial) -> (Monomial, u16) {
    let mut m0 = m.clone();
    let n = m0.nu;
    m0.nu = 0;
    (m0, n)
}

/// Apply `f` ghost-linearly and `nu`-linearly: a monomial `s * g * r` with
/// ghost part `g` and ghost-free rest `r` goes to
/// `s * (-1)^{|g| odd_op} g * f(r)`.
pub fn ghost_linear<F>(x: &GradedElement, odd_op: bool, f: F) -> GradedElement
where
    F: Fn(&Monomial) -> GradedElement,
{
    let t = x.table().clone();
    let bd = t.base_dim();
    let mut out = GradedElement::zero(&t);
    for (m, c) in x.terms() {
        let (m0, nu) = strip_nu(m);
        let mut ghost = Monomial::one(&t);
        let mut rest = m0.clone();
        let mut gdeg = 0i64;
        for (g, gen) in t.gens().iter().enumerate() {
            if gen.kind == Kind::Ghost && m0.exps[bd + g] > 0 {
                ghost.exps[bd + g] = m0.exps[bd + g];
                rest.exps[bd + g] = 0;
                gdeg += gen.degree * m0.exps[bd + g] as i64;
            }
        }
        let (neg, prod) = mul_monomials(&t, &ghost, &rest).expect("disjoint factors");
        debug_assert_eq!(prod, m0);
        let mut sign = if neg { -1 } else { 1 };
        if odd_op && gdeg % 2 != 0 {
            sign = -sign;
        }
        let image = f(&rest);
        if image.is_zero() {
            continue;
        }
        let g_el = GradedElement::term(&t, ghost, q(1));
        let term = (&g_el * &image).shift_nu(nu).scale(&(c * q(sign)));
        out = &out + &term;
    }
    out
}

/// Like [`ghost_linear`] for maps that are only defined on whole
/// coefficients: terms are grouped by ghost monomial and power of `nu`, and
/// `f` sees the full ghost-free coefficient of each group.  `None` from `f`
/// is returned as `None`.
pub fn ghost_grouped<F>(x: &GradedElement, odd_op: bool, f: F) -> Option<GradedElement>
where
    F: Fn(&GradedElement) -> Option<GradedElement>,
{
    let t = x.table().clone();
    let bd = t.base_dim();
    let mut groups: BTreeMap<(Monomial, u16), (i64, GradedElement)> = BTreeMap::new();
    for (m, c) in x.terms() {
        let (m0, nu) = strip_nu(m);
        let mut ghost = Monomial::one(&t);
        let mut rest = m0.clone();
        let mut gdeg = 0i64;
        for (g, gen) in t.gens().iter().enumerate() {
            if gen.kind == Kind::Ghost && m0.exps[bd + g] > 0 {
                ghost.exps[bd + g] = m0.exps[bd + g];
                rest.exps[bd + g] = 0;
                gdeg += gen.degree * m0.exps[bd + g] as i64;
            }
        }
        let (neg, _) = mul_monomials(&t, &ghost, &rest).expect("disjoint factors");
        let sign = if neg { -1 } else { 1 };
        let e = groups.entry((ghost, nu)).or_insert_with(|| (gdeg, GradedElement::zero(&t)));
        e.1.add_term(rest, c * q(sign));
    }
    let mut out = GradedElement::zero(&t);
    for ((ghost, nu), (gdeg, coeff)) in groups {
        let image = f(&coeff)?;
        let s = if odd_op && gdeg % 2 != 0 { -1 } else { 1 };
        let g_el = GradedElement::term(&t, ghost, q(s));
        out = &out + &(&g_el * &image).shift_nu(nu);
    }
    Some(out)
}

impl ContractionData {
    fn t(&self) -> &Arc<GeneratorTable> {
        self.kc.table()
    }

    fn fischer_slice(&self, w: u32) -> Arc<FischerSlice> {
        if let Some(s) = self.fischer.lock().expect("lock").get(&w) {
            return s.clone();
        }
        let t = self.t().clone();
        let unknowns = self.kc.basis(w, 1);
        let mut system = Echelon::new();
        for u in &unknowns {
            let img = self.kc.apply(&GradedElement::term(&t, u.clone(), q(1)));
            system.insert(adjoint_vector(&self.kc, &img));
        }
        let s = Arc::new(FischerSlice { unknowns, system });
        self.fischer.lock().expect("lock").entry(w).or_insert(s).clone()
    }

    /// Restriction on a ghost-free, `nu`-free monomial.
    fn res_monomial(&self, m: &Monomial) -> GradedElement {
        let t = self.t().clone();
        if m.antighost_degree(&t) > 0 {
            return GradedElement::zero(&t);
        }
        if let Some(r) = self.res_cache.lock().expect("lock").get(m) {
            return r.clone();
        }
        let x = GradedElement::term(&t, m.clone(), q(1));
        let r = match &self.flavor {
            Flavor::Linear(l) => {
                if m.exps[..*l].iter().any(|&e| e > 0) {
                    GradedElement::zero(&t)
                } else {
                    x
                }
            }
            Flavor::Slice(Complement::Echelon) => {
                let w = self.kc.weight(m);
                let (rem, _) = self.kc.boundaries(w, 0).reduce(x.terms());
                GradedElement::from_terms(&t, rem)
            }
            Flavor::Slice(Complement::Fischer) => {
                let w = self.kc.weight(m);
                let fs = self.fischer_slice(w);
                let rhs = adjoint_vector(&self.kc, &x);
                let combo = fs.system.solve(&rhs).expect("Fischer system is always solvable");
                let mut g = GradedElement::zero(&t);
                for (j, c) in combo {
                    g.add_term(fs.unknowns[j].clone(), c);
                }
                &x - &self.kc.apply(&g)
            }
        };
        self.res_cache.lock().expect("lock").insert(m.clone(), r.clone());
        r
    }

    fn res(&self, x: &GradedElement) -> GradedElement {
        ghost_linear(x, false, |m| self.res_monomial(m))
    }

    fn h_monomial(&self, m: &Monomial) -> GradedElement {
        if let Some(r) = self.h_cache.lock().expect("lock").get(m) {
            return r.clone();
        }
        let t = self.t().clone();
        let x = GradedElement::term(&t, m.clone(), q(1));
        let k = m.antighost_degree(&t);
        let r = match &self.flavor {
            Flavor::Linear(l) => {
                let s: u32 = m.exps[..*l].iter().map(|&e| e as u32).sum();
                let mut out = GradedElement::zero(&t);
                if s > 0 {
                    for a in 0..*l {
                        let e = m.exps[a];
                        if e == 0 {
                            continue;
                        }
                        let mut rest = m.clone();
                        rest.exps[a] -= 1;
                        let xi = GradedElement::antighost(&t, a);
                        let term = &xi * &GradedElement::term(&t, rest, q(e as i64) / q((s + k) as i64));
                        out = &out + &term;
                    }
                }
                out
            }
            Flavor::Slice(_) => {
                let target = if k == 0 { &x - &self.res_monomial(m) } else { &x - &self.h(&self.kc.apply(&x)) };
                let w = self.kc.weight(m);
                match self.kc.solve_boundary(&target, w, k) {
                    Some(y) => y,
                    None => panic!("{}", Error::NotAcyclic(format!("weight {w}, degree {k}"))),
                }
            }
        };
        self.h_cache.lock().expect("lock").insert(m.clone(), r.clone());
        r
    }

    fn h(&self, x: &GradedElement) -> GradedElement {
        ghost_linear(x, true, |m| self.h_monomial(m))
    }
}

/// `(J_b(d) x)_b` where `J_b(d)` replaces each coordinate by its derivative.
fn adjoint_vector(kc: &KoszulComplex, x: &GradedElement) -> SparseVec<(usize, Monomial)> {
    let mut out = SparseVec::new();
    for (b, (_, j)) in kc.images().iter().enumerate() {
        let v = apply_as_operator(j, x);
        for (m, c) in v.into_terms() {
            out.insert((b, m), c);
        }
    }
    out
}

/// Polynomial `p` read as a constant-coefficient differential operator.
pub fn apply_as_operator(p: &GradedElement, x: &GradedElement) -> GradedElement {
    let bd = p.table().base_dim();
    let mut out = GradedElement::zero(x.table());
    for (m, c) in p.terms() {
        let mut y = x.clone();
        for i in 0..bd {
            for _ in 0..m.exps[i] {
                y = y.partial(Var::Base(i));
            }
        }
        out.add_scaled(c, &y);
    }
    out
}

/// Koszul contraction onto a zero-fibre model.  Operators act on the table
/// of the complex, ghost-linearly and `nu`-linearly.
#[derive(Clone)]
pub struct KoszulContraction {
    data: Arc<ContractionData>,
    cap: u32,
}

impl std::fmt::Debug for KoszulContraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KoszulContraction(cap {})", self.cap)
    }
}

impl KoszulContraction {
    pub fn complex(&self) -> &Arc<KoszulComplex> {
        &self.data.kc
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        self.data.t()
    }

    pub fn res(&self, x: &GradedElement) -> GradedElement {
        self.data.res(x)
    }

    pub fn prol(&self, x: &GradedElement) -> GradedElement {
        x.clone()
    }

    pub fn h(&self, x: &GradedElement) -> GradedElement {
        self.data.h(x)
    }

    pub fn d(&self, x: &GradedElement) -> GradedElement {
        self.data.kc.apply(x)
    }

    /// Ghost-free probe monomials of weight at most the cap.
    pub fn chain_probe(&self) -> Vec<Monomial> {
        let kc = &self.data.kc;
        (0..=self.cap).flat_map(|w| (0..=kc.max_k(w)).flat_map(move |k| kc.basis(w, k))).collect()
    }

    /// Basis of the zero-fibre model up to the cap.
    pub fn model_basis(&self) -> Vec<GradedElement> {
        let kc = &self.data.kc;
        let mut out = Vec::new();
        for w in 0..=self.cap {
            let mut ech: Echelon<Monomial> = Echelon::new();
            for m in kc.basis(w, 0) {
                let r = self.data.res_monomial(&m);
                if r.is_zero() {
                    continue;
                }
                if let Insert::Pivot(_) = ech.insert(r.terms().clone()) {
                    out.push(r);
                }
            }
        }
        out
    }

    fn ghost_monomials(&self) -> Vec<GradedElement> {
        let t = self.table().clone();
        let ghosts: Vec<usize> = (0..t.n_gens()).filter(|&g| t.gen(g).kind == Kind::Ghost).collect();
        let mut out = vec![GradedElement::one(&t)];
        for g in ghosts {
            let gen = GradedElement::gen(&t, g);
            let more: Vec<GradedElement> = out.iter().map(|x| x * &gen).collect();
            out.extend(more);
        }
        out
    }

    /// Package as an `hpt::Contraction` whose probes cover every slice up to
    /// the cap, times every ghost monomial.
    pub fn contraction(&self) -> Contraction {
        let t = self.table().clone();
        let ghosts = self.ghost_monomials();
        let chains = self.chain_probe();
        let model = self.model_basis();
        let g1 = ghosts.clone();
        let big_probe = move || {
            let mut v = Vec::new();
            for g in &g1 {
                for m in &chains {
                    v.push(g * &GradedElement::term(&t, m.clone(), q(1)));
                }
            }
            v
        };
        let small_probe = move || {
            let mut v = Vec::new();
            for g in &ghosts {
                for m in &model {
                    v.push(g * m);
                }
            }
            v
        };
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        let kc = self.data.kc.clone();
        Contraction {
            small: Complex::new("model", Operator::zero(1), small_probe),
            big: Complex::new("koszul", kc.operator(), big_probe),
            inject: Operator::new("prol", 0, move |x| a.prol(x)),
            project: Operator::new("res", 0, move |x| b.res(x)),
            homotopy: Operator::new("h", 1, move |x| c.h(x)),
            flags: SideConditions::all(),
        }
    }
}

/// Explicit contraction for `J = (x_1, .., x_l)`.
pub fn linear_contraction(setup: &Setup, table: &Arc<GeneratorTable>, cap: u32) -> Result<KoszulContraction> {
    let l = setup.l();
    let base = setup.base_table();
    for (a, j) in setup.moment.iter().enumerate() {
        if *j != GradedElement::base_var(base, a) {
            return Err(Error::Refused(format!("moment component {} is not the coordinate x{}", a + 1, a + 1)));
        }
    }
    let kc = Arc::new(KoszulComplex::from_setup(setup, table)?);
    Ok(KoszulContraction {
        data: Arc::new(ContractionData {
            kc,
            flavor: Flavor::Linear(l),
            res_cache: Mutex::new(HashMap::new()),
            h_cache: Mutex::new(HashMap::new()),
            fischer: Mutex::new(HashMap::new()),
        }),
        cap,
    })
}

/// Contraction from slice-wise exact solves, for homogeneous moment maps
/// whose Koszul complex is acyclic up to the cap.
pub fn slice_contraction(
    setup: &Setup,
    table: &Arc<GeneratorTable>,
    policy: &TruncationPolicy,
    complement: Complement,
) -> Result<KoszulContraction> {
    let kc = Arc::new(KoszulComplex::from_setup(setup, table)?);
    let cap = slice_cap(policy);
    if let Some((w, k, d)) = first_non_acyclic(&kc, cap, 1) {
        return Err(Error::NotAcyclic(format!("weight {w}, degree {k}: dim H = {d}; use a Tate resolution")));
    }
    Ok(KoszulContraction {
        data: Arc::new(ContractionData {
            kc,
            flavor: Flavor::Slice(complement),
            res_cache: Mutex::new(HashMap::new()),
            h_cache: Mutex::new(HashMap::new()),
            fischer: Mutex::new(HashMap::new()),
        }),
        cap,
    })
}

/// The slice contraction as an `hpt::Contraction`, normalized when its
/// homotopy misses a side condition on the probes.
pub fn verified_contraction(kc: &KoszulContraction) -> Result<Contraction> {
    let c = kc.contraction();
    let r = c.verify();
    if !r.identities_hold() {
        return Err(Error::ContractViolation(r.failure.unwrap_or_default()));
    }
    if r.side.is_all() {
        Ok(c)
    } else {
        hpt::normalize_side_conditions(&c)
    }
}

/// Weighted monomials of total weight exactly `w` in the base only.
pub fn base_monomials(t: &GeneratorTable, weights: &[u32], w: u32) -> Vec<Monomial> {
    let ws = Weights { base: weights.to_vec(), gens: vec![1; t.n_gens()] };
    let gf = GeneratorTable::base(t.base_dim());
    slice_monomials(&gf, &ws, w, 0)
        .into_iter()
        .map(|m| {
            let mut m2 = Monomial::one(t);
            m2.exps[..t.base_dim()].copy_from_slice(&m.exps[..t.base_dim()]);
            m2
        })
        .collect()
}

/// Fischer inner product of two base polynomials.
pub fn fischer(a: &GradedElement, b: &GradedElement) -> Q {
    let mut s = Q::zero();
    for (m, c) in a.terms() {
        let d = b.coeff(m);
        if d.is_zero() {
            continue;
        }
        let mut f = Q::from_integer(1.into());
        for &e in m.exps.iter() {
            for i in 1..=e as i64 {
                f *= q(i);
            }
        }
        s += c * d * f;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Lie, Poisson};

    fn angular() -> Setup {
        let t = GeneratorTable::base(6);
        let x = |i| GradedElement::base_var(&t, i);
        // J = q x p with q = (x1,x2,x3), p = (x4,x5,x6).
        let j1 = &(&x(1) * &x(5)) - &(&x(2) * &x(4));
        let j2 = &(&x(2) * &x(3)) - &(&x(0) * &x(5));
        let j3 = &(&x(0) * &x(4)) - &(&x(1) * &x(3));
        Setup::new("am", Poisson::canonical(3), Lie::so3(), vec![j1, j2, j3]).unwrap()
    }

    #[test]
    fn differential_squares_to_zero() {
        let s = angular();
        let t = GeneratorTable::koszul(6, 3);
        let mut rng = crate::sampling::rng(4);
        for _ in 0..20 {
            let a = crate::sampling::mixed(&mut rng, &t, &[-1, -2, -3], 2, 4);
            let d = koszul_differential(&a, &s).unwrap();
            assert!(koszul_differential(&d, &s).unwrap().is_zero());
        }
        let xi = GradedElement::antighost(&t, 1);
        assert_eq!(koszul_differential(&xi, &s).unwrap(), s.moment_in(&t)[1]);
    }

    #[test]
    fn angular_momentum_cycles() {
        let s = angular();
        let t = GeneratorTable::koszul(6, 3);
        let mut qc = GradedElement::zero(&t);
        for a in 0..3 {
            qc = &qc + &(&GradedElement::base_var(&t, a) * &GradedElement::antighost(&t, a));
        }
        assert!(koszul_differential(&qc, &s).unwrap().is_zero());
        let kc = KoszulComplex::from_setup(&s, &t).unwrap();
        assert!(kc.homology_dim(3, 1) >= 2);
        for w in 0..3 {
            for k in 1..=kc.max_k(w) {
                assert_eq!(kc.homology_dim(w, k), 0);
            }
        }
        let reps = kc.homology_basis(3, 1);
        assert_eq!(reps.len(), kc.homology_dim(3, 1));
    }

    #[test]
    fn euler_characteristic() {
        let rows = homology_ranks(&angular(), &TruncationPolicy { poly_degree: Some(5), ..Default::default() }).unwrap();
        assert!(euler_consistent(&rows));
    }

    #[test]
    fn fischer_complement_is_orthogonal() {
        // Harmonic-oscillator-like J = x1^2 + x2^2.
        let b = GeneratorTable::base(2);
        let x = |i| GradedElement::base_var(&b, i);
        let j = &(&x(0) * &x(0)) + &(&x(1) * &x(1));
        let s = Setup::new("ho", Poisson::canonical(1), Lie::abelian(1), vec![j.clone()]).unwrap();
        let t = GeneratorTable::koszul(2, 1);
        let kc = slice_contraction(&s, &t, &TruncationPolicy { poly_degree: Some(4), ..Default::default() }, Complement::Fischer)
            .unwrap();
        let quartic = GradedElement::term(&t, {
            let mut m = Monomial::one(&t);
            m.exps[0] = 4;
            m
        }, q(1));
        let r = kc.res(&quartic);
        let ideal_elt = &s.moment_in(&t)[0] * &(&GradedElement::base_var(&t, 0) * &GradedElement::base_var(&t, 1));
        assert!(fischer(&r, &ideal_elt).is_zero());
        let c = kc.contraction();
        let rep = c.verify();
        assert!(rep.identities_hold(), "{:?}", rep.failure);
    }
}
