//! Koszul-Tate resolutions built level by level: every homology class found
//! on a slice is killed by a new generator whose differential is the class
//! representative.

use std::sync::Arc;

use crate::algebra::{GeneratorTable, GradedElement, Kind, TruncationPolicy};
use crate::error::{Error, Result};
use crate::koszul::{first_non_acyclic, slice_monomials, KoszulComplex, Weights};
use crate::setup::Setup;

#[derive(Clone, Debug)]
pub struct TateResolution {
    base_dim: usize,
    base_weights: Vec<u32>,
    /// Differentials per level, each in the table of this resolution.
    levels: Vec<Vec<GradedElement>>,
    table: Arc<GeneratorTable>,
    complex: Arc<KoszulComplex>,
    /// Slice cap the resolution is valid up to.
    pub cap: u32,
}

fn build(
    base_dim: usize,
    base_weights: &[u32],
    levels: &[Vec<GradedElement>],
    ghosts: bool,
) -> Result<(Arc<GeneratorTable>, Vec<Vec<GradedElement>>, KoszulComplex)> {
    let counts: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let table = GeneratorTable::levels(base_dim, &counts, ghosts);
    let mut embedded = Vec::new();
    let mut images = Vec::new();
    for (j, lv) in levels.iter().enumerate() {
        let mut row = Vec::new();
        for (a, d) in lv.iter().enumerate() {
            let e = d.embed(&table)?;
            images.push((table.antighost(j as u32 + 1, a).expect("declared"), e.clone()));
            row.push(e);
        }
        embedded.push(row);
    }
    let kc = KoszulComplex::new(&table, images, base_weights.to_vec())?;
    Ok((table, embedded, kc))
}

impl TateResolution {
    /// Level one: the Koszul complex of the moment map.
    pub fn from_setup(setup: &Setup, policy: &TruncationPolicy) -> Result<Self> {
        if !setup.is_homogeneous() {
            return Err(Error::Refused("Tate resolutions are built on graded slices; moment map is inhomogeneous".into()));
        }
        let level1 = setup.moment.clone();
        let (table, levels, kc) = build(setup.base_dim(), &setup.base_weights, &[level1], false)?;
        Ok(TateResolution {
            base_dim: setup.base_dim(),
            base_weights: setup.base_weights.clone(),
            levels,
            table,
            complex: Arc::new(kc),
            cap: policy.poly_degree.unwrap_or(6),
        })
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    pub fn complex(&self) -> &Arc<KoszulComplex> {
        &self.complex
    }

    pub fn top_level(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Generator count per level.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    pub fn differentials(&self, level: u32) -> &[GradedElement] {
        &self.levels[level as usize - 1]
    }

    pub fn weights(&self) -> &Weights {
        self.complex.weights()
    }

    /// Adjoin level-`j` generators killing `H_{j-1}` on every slice up to
    /// the cap.  Slices are processed in increasing weight because a new
    /// generator also produces boundaries in heavier slices.
    pub fn extend_level(&self, j: u32, policy: &TruncationPolicy) -> Result<TateResolution> {
        if j != self.top_level() + 1 || j < 2 {
            return Err(Error::Argument(format!("can only extend level {} to {}", self.top_level(), self.top_level() + 1)));
        }
        let cap = policy.poly_degree.unwrap_or(self.cap).min(self.cap);
        let mut levels: Vec<Vec<GradedElement>> = self.levels.clone();
        levels.push(Vec::new());
        let mut current = self.clone();
        for w in 0..=cap {
            let reps = current.complex.homology_basis(w, j - 1);
            if reps.is_empty() {
                continue;
            }
            levels[j as usize - 1].extend(reps);
            let (table, embedded, kc) = build(self.base_dim, &self.base_weights, &levels, false)?;
            levels = embedded;
            current = TateResolution { table, levels: levels.clone(), complex: Arc::new(kc), ..self.clone() };
        }
        if levels[j as usize - 1].is_empty() {
            let (table, embedded, kc) = build(self.base_dim, &self.base_weights, &levels, false)?;
            current = TateResolution { table, levels: embedded, complex: Arc::new(kc), ..self.clone() };
        }
        current.cap = cap;
        current.check_square_zero()?;
        if let Some((w, k, d)) = first_non_acyclic(&current.complex, cap, 1) {
            if k < j {
                return Err(Error::Internal(format!("H_{k} = {d} survives on slice {w} after level {j}")));
            }
        }
        Ok(current)
    }

    /// Extend through level `top`.
    pub fn through(setup: &Setup, top: u32, policy: &TruncationPolicy) -> Result<TateResolution> {
        let mut r = Self::from_setup(setup, policy)?;
        for j in 2..=top {
            r = r.extend_level(j, policy)?;
        }
        Ok(r)
    }

    /// `d^2 = 0` on every basis monomial up to the cap.
    pub fn check_square_zero(&self) -> Result<()> {
        let kc = &self.complex;
        for w in 0..=self.cap {
            for k in 0..=kc.max_k(w) {
                for m in kc.basis(w, k) {
                    let x = GradedElement::term(&self.table, m, crate::rational::q(1));
                    let dd = kc.apply(&kc.apply(&x));
                    if !dd.is_zero() {
                        return Err(Error::Internal(format!("d^2 {x} = {dd}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The same resolution in a table that also declares matching ghosts.
    pub fn with_ghosts(&self) -> Result<(Arc<GeneratorTable>, KoszulComplex)> {
        let (t, _, kc) = build(self.base_dim, &self.base_weights, &self.levels, true)?;
        Ok((t, kc))
    }
}

/// Both sides of the rank identity for the free generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareReport {
    /// Number of generator monomials in each homological degree.
    pub chain_ranks: Vec<i64>,
    /// Coefficients of the product over levels.
    pub product: Vec<i64>,
    pub holds: bool,
}

/// Compare `sum rank(KT_i) t^i` with
/// `prod_j (1 - (-t)^j)^{(-1)^{j+1} r_j}` up to `t^D`.
pub fn poincare_check(res: &TateResolution, degree: u32) -> PoincareReport {
    let d = degree as usize;
    // Left side: enumerate generator monomials with unit weights by level.
    let t = GeneratorTable::levels(0, &res.counts(), false);
    let ws = Weights { base: vec![], gens: t.gens().iter().map(|g| g.level).collect() };
    let chain_ranks: Vec<i64> = (0..=degree).map(|k| slice_monomials(&t, &ws, k, k).len() as i64).collect();
    // Right side: power series product.
    let mut product = vec![0i64; d + 1];
    product[0] = 1;
    for (j0, r) in res.counts().iter().enumerate() {
        let j = j0 + 1;
        for _ in 0..*r {
            if j % 2 == 1 {
                // multiply by (1 + t^j)
                for i in (j..=d).rev() {
                    product[i] += product[i - j];
                }
            } else {
                // divide by (1 - t^j)
                for i in j..=d {
                    product[i] += product[i - j];
                }
            }
        }
    }
    let holds = chain_ranks == product;
    PoincareReport { chain_ranks, product, holds }
}

/// Number of generators of each kind in a table, for reports.
pub fn describe(t: &GeneratorTable) -> Vec<(u32, usize)> {
    (1..=t.max_level()).map(|j| (j, t.count(Kind::Antighost, j))).collect()
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

    #[test]
    fn level_two_kills_q_and_p() {
        let p = TruncationPolicy { poly_degree: Some(4), ..Default::default() };
        let r = TateResolution::through(&angular(), 2, &p).unwrap();
        assert!(r.counts()[1] >= 2);
        assert_eq!(r.complex().homology_dim(3, 1), 0);
    }

    #[test]
    fn pure_koszul_series() {
        let p = TruncationPolicy { poly_degree: Some(6), ..Default::default() };
        let r = TateResolution::from_setup(&angular(), &p).unwrap();
        let rep = poincare_check(&r, 6);
        assert!(rep.holds);
        assert_eq!(rep.product, vec![1, 3, 3, 1, 0, 0, 0]);
    }

    #[test]
    fn single_even_generator_series() {
        let t = GeneratorTable::levels(0, &[0, 1], false);
        let ws = Weights { base: vec![], gens: vec![2] };
        let counts: Vec<usize> = (0..=6).map(|k| slice_monomials(&t, &ws, k, k).len()).collect();
        assert_eq!(counts, vec![1, 0, 1, 0, 1, 0, 1]);
    }
}
