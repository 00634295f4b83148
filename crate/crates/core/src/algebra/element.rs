use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::table::{GeneratorTable, Kind};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, Q};

pub type Exps = SmallVec<[u16; 16]>;

/// Exponents of base coordinates followed by graded generators, and the
/// power of the formal parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub exps: Exps,
    pub nu: u16,
}

impl Monomial {
    pub fn one(table: &GeneratorTable) -> Self {
        Monomial { exps: SmallVec::from_elem(0, table.width()), nu: 0 }
    }

    pub fn base_degree(&self, table: &GeneratorTable) -> u32 {
        self.exps[..table.base_dim()].iter().map(|&e| e as u32).sum()
    }

    /// Weighted base degree.
    pub fn weighted_base_degree(&self, table: &GeneratorTable, weights: &[u32]) -> u32 {
        self.exps[..table.base_dim()].iter().zip(weights).map(|(&e, &w)| e as u32 * w).sum()
    }

    pub fn gen_exp(&self, table: &GeneratorTable, g: usize) -> u16 {
        self.exps[table.base_dim() + g]
    }

    /// Total integer degree.
    pub fn degree(&self, table: &GeneratorTable) -> i64 {
        let b = table.base_dim();
        table.gens().iter().enumerate().map(|(g, gen)| gen.degree * self.exps[b + g] as i64).sum()
    }

    fn kind_degree(&self, table: &GeneratorTable, kind: Kind) -> u32 {
        let b = table.base_dim();
        table
            .gens()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind == kind)
            .map(|(i, g)| g.level * self.exps[b + i] as u32)
            .sum()
    }

    pub fn ghost_degree(&self, table: &GeneratorTable) -> u32 {
        self.kind_degree(table, Kind::Ghost)
    }

    pub fn antighost_degree(&self, table: &GeneratorTable) -> u32 {
        self.kind_degree(table, Kind::Antighost)
    }

    /// Number of vector generators (polyvector arity).
    pub fn arity(&self, table: &GeneratorTable) -> u32 {
        self.kind_degree(table, Kind::Vector)
    }

    pub fn is_ghost_free(&self, table: &GeneratorTable) -> bool {
        self.exps[table.base_dim()..].iter().all(|&e| e == 0)
    }

    /// Parity of the number of odd factors, which is the degree parity.
    pub fn is_odd(&self, table: &GeneratorTable) -> bool {
        self.degree(table).rem_euclid(2) == 1
    }
}

/// Product of two monomials with its Koszul sign, `None` if an odd
/// generator would be squared.
pub fn mul_monomials(table: &GeneratorTable, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
    let bd = table.base_dim();
    let n = table.n_gens();
    let mut exps = a.exps.clone();
    for i in 0..bd {
        exps[i] += b.exps[i];
    }
    let mut negative = false;
    // Odd factors of `a` with index greater than j, counted from the right.
    let mut odd_after = 0u32;
    let mut suffix = vec![0u32; n + 1];
    for g in (0..n).rev() {
        if table.is_odd(g) && a.exps[bd + g] > 0 {
            odd_after += 1;
        }
        suffix[g] = odd_after;
    }
    for g in 0..n {
        let eb = b.exps[bd + g];
        if eb == 0 {
            continue;
        }
        if table.is_odd(g) {
            if a.exps[bd + g] > 0 {
                return None;
            }
            if suffix[g + 1] % 2 == 1 {
                negative = !negative;
            }
        }
        exps[bd + g] += eb;
    }
    Some((negative, Monomial { exps, nu: a.nu + b.nu }))
}

/// A variable to differentiate by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Base(usize),
    Gen(usize),
}

/// Which side the derivative acts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Sparse exact element of the graded algebra.
#[derive(Clone)]
pub struct GradedElement {
    table: Arc<GeneratorTable>,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && same_table(&self.table, &other.table)
    }
}

impl Eq for GradedElement {}

fn same_table(a: &Arc<GeneratorTable>, b: &Arc<GeneratorTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Caps applied to products and expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationPolicy {
    /// Highest kept power of the formal parameter.
    pub nu_order: u32,
    /// Highest polynomial degree of a slice, `None` for unbounded.
    pub poly_degree: Option<u32>,
    /// Highest antighost level.
    pub level: u32,
    /// Ghost filtration cap.
    pub filtration: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { nu_order: 3, poly_degree: Some(6), level: 2, filtration: 3 }
    }
}

impl TruncationPolicy {
    pub fn nu(n: u32) -> Self {
        TruncationPolicy { nu_order: n, poly_degree: None, ..Default::default() }
    }

    pub fn keeps(&self, table: &GeneratorTable, m: &Monomial) -> bool {
        m.nu as u32 <= self.nu_order && self.poly_degree.is_none_or(|d| m.base_degree(table) <= d)
    }
}

impl GradedElement {
    pub fn zero(table: &Arc<GeneratorTable>) -> Self {
        GradedElement { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(table: &Arc<GeneratorTable>, c: Q) -> Self {
        Self::term(table, Monomial::one(table), c)
    }

    pub fn one(table: &Arc<GeneratorTable>) -> Self {
        Self::constant(table, Q::one())
    }

    pub fn term(table: &Arc<GeneratorTable>, m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        GradedElement { table: table.clone(), terms }
    }

    /// Build from raw terms, dropping zeros and merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(table: &Arc<GeneratorTable>, it: I) -> Self {
        let mut e = Self::zero(table);
        for (m, c) in it {
            e.add_term(m, c);
        }
        e
    }

    /// Base coordinate `x_{i+1}`.
    pub fn base_var(table: &Arc<GeneratorTable>, i: usize) -> Self {
        let mut m = Monomial::one(table);
        m.exps[i] = 1;
        Self::term(table, m, Q::one())
    }

    /// Graded generator by canonical index.
    pub fn gen(table: &Arc<GeneratorTable>, g: usize) -> Self {
        let mut m = Monomial::one(table);
        m.exps[table.base_dim() + g] = 1;
        Self::term(table, m, Q::one())
    }

    /// Level-one ghost `a` (zero based).
    pub fn ghost(table: &Arc<GeneratorTable>, a: usize) -> Self {
        Self::gen(table, table.ghost(1, a).expect("ghost declared"))
    }

    /// Level-one antighost `a` (zero based).
    pub fn antighost(table: &Arc<GeneratorTable>, a: usize) -> Self {
        Self::gen(table, table.antighost(1, a).expect("antighost declared"))
    }

    /// The formal parameter.
    pub fn nu(table: &Arc<GeneratorTable>) -> Self {
        let mut m = Monomial::one(table);
        m.nu = 1;
        Self::term(table, m, Q::one())
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Q> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_table(&self.table, &other.table) {
            Ok(())
        } else {
            Err(Error::TableMismatch)
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &Q, other: &Self) {
        self.check(other).expect("generator tables differ");
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), c * v);
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        out.add_scaled(&Q::one(), other);
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.table);
        }
        GradedElement {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiply by `nu^k`.
    pub fn shift_nu(&self, k: u16) -> Self {
        self.map_monomials(|m| {
            let mut m = m.clone();
            m.nu += k;
            Some((m, Q::one()))
        })
    }

    /// Divide by `nu^k`; errors if some term has lower order.
    pub fn unshift_nu(&self, k: u16) -> Result<Self> {
        if self.terms.keys().any(|m| m.nu < k) {
            return Err(Error::Internal(format!("element has terms below order nu^{k}")));
        }
        Ok(self.map_monomials(|m| {
            let mut m = m.clone();
            m.nu -= k;
            Some((m, Q::one()))
        }))
    }

    /// Apply `f` to each monomial; it returns a replacement and a factor.
    pub fn map_monomials<F: FnMut(&Monomial) -> Option<(Monomial, Q)>>(&self, mut f: F) -> Self {
        let mut out = Self::zero(&self.table);
        for (m, c) in &self.terms {
            if let Some((m2, k)) = f(m) {
                out.add_term(m2, c * k);
            }
        }
        out
    }

    pub fn filter<F: Fn(&Monomial) -> bool>(&self, f: F) -> Self {
        GradedElement {
            table: self.table.clone(),
            terms: self.terms.iter().filter(|(m, _)| f(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn truncate_nu(&self, n: u32) -> Self {
        self.filter(|m| m.nu as u32 <= n)
    }

    pub fn truncate(&self, policy: &TruncationPolicy) -> Self {
        self.filter(|m| policy.keeps(&self.table, m))
    }

    /// Coefficient of `nu^k`, as a `nu`-free element.
    pub fn nu_part(&self, k: u16) -> Self {
        GradedElement {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.nu == k)
                .map(|(m, c)| (Monomial { exps: m.exps.clone(), nu: 0 }, c.clone()))
                .collect(),
        }
    }

    pub fn max_nu(&self) -> Option<u16> {
        self.terms.keys().map(|m| m.nu).max()
    }

    pub fn min_nu(&self) -> Option<u16> {
        self.terms.keys().map(|m| m.nu).min()
    }

    /// Product truncated at `nu^cap` when a cap is given.
    pub fn mul_capped(&self, other: &Self, cap: Option<u32>) -> Self {
        self.check(other).expect("generator tables differ");
        let t = &*self.table;
        let mut out = Self::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(n) = cap {
                    if (ma.nu + mb.nu) as u32 > n {
                        continue;
                    }
                }
                if let Some((neg, m)) = mul_monomials(t, ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_capped(other, None))
    }

    /// Graded-commutative product truncated per policy.
    pub fn mul(&self, other: &Self, policy: &TruncationPolicy) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_capped(other, Some(policy.nu_order)).truncate(policy))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(&self.table);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Graded derivative by a variable from the given side.
    pub fn derivative(&self, var: Var, side: Side) -> Self {
        let t = &*self.table;
        let bd = t.base_dim();
        match var {
            Var::Base(i) => self.map_monomials(|m| {
                let e = m.exps[i];
                if e == 0 {
                    return None;
                }
                let mut m2 = m.clone();
                m2.exps[i] -= 1;
                Some((m2, q(e as i64)))
            }),
            Var::Gen(g) => {
                let odd = t.is_odd(g);
                self.map_monomials(|m| {
                    let e = m.exps[bd + g];
                    if e == 0 {
                        return None;
                    }
                    let mut m2 = m.clone();
                    m2.exps[bd + g] -= 1;
                    if !odd {
                        return Some((m2, q(e as i64)));
                    }
                    let range = match side {
                        Side::Left => 0..g,
                        Side::Right => g + 1..t.n_gens(),
                    };
                    let crossings = range.filter(|&h| t.is_odd(h) && m.exps[bd + h] > 0).count();
                    Some((m2, if crossings % 2 == 1 { q(-1) } else { q(1) }))
                })
            }
        }
    }

    /// Left derivative (the default convention).
    pub fn partial(&self, var: Var) -> Self {
        self.derivative(var, Side::Left)
    }

    pub fn try_partial(&self, var: Var) -> Result<Self> {
        let ok = match var {
            Var::Base(i) => i < self.table.base_dim(),
            Var::Gen(g) => g < self.table.n_gens(),
        };
        if ok {
            Ok(self.partial(var))
        } else {
            Err(Error::Argument(format!("{var:?} not declared in table")))
        }
    }

    /// Degree when every term has the same degree.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.degree(&self.table));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Split into the even and odd parts.
    pub fn parity_parts(&self) -> (Self, Self) {
        let t = self.table.clone();
        (self.filter(|m| !m.is_odd(&t)), self.filter(|m| m.is_odd(&t)))
    }

    /// Minimal ghost degree over the terms; `None` for zero.
    pub fn filtration_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.ghost_degree(&self.table)).min()
    }

    pub fn is_ghost_free(&self) -> bool {
        self.terms.keys().all(|m| m.is_ghost_free(&self.table))
    }

    pub fn max_base_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.base_degree(&self.table)).max()
    }

    /// Re-express in another table whose base dimension is at least as large
    /// and which declares every generator used, matched by name.
    pub fn embed(&self, target: &Arc<GeneratorTable>) -> Result<Self> {
        if same_table(&self.table, target) {
            return Ok(self.clone());
        }
        let s = &*self.table;
        if target.base_dim() < s.base_dim() {
            return Err(Error::Argument("target table has fewer base coordinates".into()));
        }
        let mut map = Vec::with_capacity(s.n_gens());
        for g in s.gens() {
            map.push(target.find(g.kind, g.level, g.index));
        }
        let tb = target.base_dim();
        let mut out = Self::zero(target);
        // Generator order is compatible (both sorted by level, kind, index),
        // so no reordering sign arises.
        for (m, c) in &self.terms {
            let mut m2 = Monomial::one(target);
            m2.nu = m.nu;
            m2.exps[..s.base_dim()].copy_from_slice(&m.exps[..s.base_dim()]);
            for (g, tgt) in map.iter().enumerate() {
                let e = m.exps[s.base_dim() + g];
                if e == 0 {
                    continue;
                }
                let Some(tg) = tgt else {
                    return Err(Error::Argument(format!("generator {} missing in target", s.gen(g).name)));
                };
                m2.exps[tb + tg] = e;
            }
            out.add_term(m2, c.clone());
        }
        Ok(out)
    }

    /// Evaluate the base coordinates at a rational point; `nu` and
    /// generators stay symbolic.
    pub fn eval_base(&self, point: &[Q]) -> Self {
        let bd = self.table.base_dim();
        self.map_monomials(|m| {
            let mut v = Q::one();
            for i in 0..bd {
                for _ in 0..m.exps[i] {
                    v *= &point[i];
                }
            }
            let mut m2 = m.clone();
            for e in m2.exps[..bd].iter_mut() {
                *e = 0;
            }
            Some((m2, v))
        })
    }

    /// Scalar value of a generator-free, `nu`-free element after evaluation.
    pub fn eval_scalar(&self, point: &[Q]) -> Q {
        self.eval_base(point).coeff(&Monomial::one(&self.table))
    }
}

impl fmt::Debug for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let t = &*self.table;
        let bd = t.base_dim();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = crate::rational::is_negative(c);
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            if abs != Q::one() {
                factors.push(fmt_q(&abs));
            }
            for i in 0..bd {
                match m.exps[i] {
                    0 => {}
                    1 => factors.push(t.base_name(i)),
                    e => factors.push(format!("{}^{}", t.base_name(i), e)),
                }
            }
            for g in 0..t.n_gens() {
                match m.exps[bd + g] {
                    0 => {}
                    1 => factors.push(t.gen(g).name.clone()),
                    e => factors.push(format!("{}^{}", t.gen(g).name, e)),
                }
            }
            match m.nu {
                0 => {}
                1 => factors.push("nu".into()),
                e => factors.push(format!("nu^{e}")),
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Add for &GradedElement {
    type Output = GradedElement;
    fn add(self, rhs: &GradedElement) -> GradedElement {
        self.try_add(rhs).expect("generator tables differ")
    }
}

impl Sub for &GradedElement {
    type Output = GradedElement;
    fn sub(self, rhs: &GradedElement) -> GradedElement {
        let mut out = self.clone();
        out.add_scaled(&q(-1), rhs);
        out
    }
}

impl Neg for &GradedElement {
    type Output = GradedElement;
    fn neg(self) -> GradedElement {
        self.scale(&q(-1))
    }
}

impl Mul for &GradedElement {
    type Output = GradedElement;
    fn mul(self, rhs: &GradedElement) -> GradedElement {
        self.mul_capped(rhs, None)
    }
}

impl Add for GradedElement {
    type Output = GradedElement;
    fn add(self, rhs: GradedElement) -> GradedElement {
        &self + &rhs
    }
}

impl Sub for GradedElement {
    type Output = GradedElement;
    fn sub(self, rhs: GradedElement) -> GradedElement {
        &self - &rhs
    }
}

impl Mul for GradedElement {
    type Output = GradedElement;
    fn mul(self, rhs: GradedElement) -> GradedElement {
        &self * &rhs
    }
}

impl Neg for GradedElement {
    type Output = GradedElement;
    fn neg(self) -> GradedElement {
        -&self
    }
}
