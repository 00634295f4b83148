//! A reduction problem: Poisson tensor, Lie structure constants, moment map.

use std::sync::Arc;

use crate::algebra::{GeneratorTable, GradedElement, Lie, Poisson};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Setup {
    pub name: String,
    pub poisson: Poisson,
    pub lie: Lie,
    /// Moment map components as base polynomials.
    pub moment: Vec<GradedElement>,
    /// Torus weights, one row per Lie basis vector, one column per complex
    /// coordinate pair `(x_k, x_{n+k})`.
    pub torus_weights: Option<Vec<Vec<i64>>>,
    /// Grading weights of the base coordinates used to cut slices.
    pub base_weights: Vec<u32>,
    table: Arc<GeneratorTable>,
}

impl Setup {
    pub fn new(name: &str, poisson: Poisson, lie: Lie, moment: Vec<GradedElement>) -> Result<Self> {
        let n = poisson.dim();
        let table = GeneratorTable::base(n);
        if moment.len() != lie.dim() {
            return Err(Error::Argument(format!(
                "{} moment components for a {}-dimensional Lie algebra",
                moment.len(),
                lie.dim()
            )));
        }
        let mut lifted = Vec::new();
        for (a, j) in moment.iter().enumerate() {
            if j.table().base_dim() != n || !j.is_ghost_free() || j.max_nu().unwrap_or(0) > 0 {
                return Err(Error::Argument(format!("moment component {} is not a base polynomial", a + 1)));
            }
            lifted.push(j.embed(&table)?);
        }
        lie.validate()?;
        Ok(Setup {
            name: name.to_string(),
            poisson,
            lie,
            moment: lifted,
            torus_weights: None,
            base_weights: vec![1; n],
            table,
        })
    }

    pub fn with_torus_weights(mut self, w: Vec<Vec<i64>>) -> Result<Self> {
        if w.len() != self.l() || w.iter().any(|r| 2 * r.len() != self.base_dim()) {
            return Err(Error::Argument("torus weight matrix must be l x (base_dim / 2)".into()));
        }
        self.torus_weights = Some(w);
        Ok(self)
    }

    pub fn with_base_weights(mut self, w: Vec<u32>) -> Result<Self> {
        if w.len() != self.base_dim() || w.iter().any(|&x| x == 0) {
            return Err(Error::Argument("base weights must be positive, one per coordinate".into()));
        }
        self.base_weights = w;
        Ok(self)
    }

    pub fn base_dim(&self) -> usize {
        self.poisson.dim()
    }

    /// Number of constraints.
    pub fn l(&self) -> usize {
        self.lie.dim()
    }

    pub fn base_table(&self) -> &Arc<GeneratorTable> {
        &self.table
    }

    /// Moment components in another table.
    pub fn moment_in(&self, t: &Arc<GeneratorTable>) -> Vec<GradedElement> {
        self.moment.iter().map(|j| j.embed(t).expect("base polynomial embeds")).collect()
    }

    /// Weighted degree of each component when homogeneous.
    pub fn moment_degrees(&self) -> Option<Vec<u32>> {
        self.moment
            .iter()
            .map(|j| {
                let mut ds = j.terms().keys().map(|m| m.weighted_base_degree(&self.table, &self.base_weights));
                let d = ds.next()?;
                ds.all(|e| e == d).then_some(d)
            })
            .collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.moment_degrees().is_some()
    }

    /// `sum_c f^c_{ab} J_c`.
    pub fn structure_combination(&self, a: usize, b: usize, t: &Arc<GeneratorTable>) -> GradedElement {
        let js = self.moment_in(t);
        let mut out = GradedElement::zero(t);
        for (c, j) in js.iter().enumerate() {
            out.add_scaled(&self.lie.c(a, b, c), j);
        }
        out
    }
}
