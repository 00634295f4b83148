//! Seeded random inputs for property checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{GeneratorTable, GradedElement, Monomial};
use crate::rational::{qf, Q};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero rational.
pub fn small_rational(rng: &mut SeededRng) -> Q {
    let mut n = rng.gen_range(-4i64..=4);
    if n == 0 {
        n = 1;
    }
    qf(n, rng.gen_range(1i64..=3))
}

pub fn permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Random monomial of total degree `degree` and base degree at most
/// `max_base`; `None` if none was found after a bounded number of draws.
pub fn monomial(rng: &mut SeededRng, table: &GeneratorTable, degree: i64, max_base: u32) -> Option<Monomial> {
    let bd = table.base_dim();
    for _ in 0..200 {
        let mut m = Monomial::one(table);
        if bd > 0 {
            let d = rng.gen_range(0..=max_base);
            for _ in 0..d {
                m.exps[rng.gen_range(0..bd)] += 1;
            }
        }
        for g in 0..table.n_gens() {
            let top = if table.is_odd(g) { 1 } else { 2 };
            m.exps[bd + g] = rng.gen_range(0..=top);
        }
        if m.degree(table) == degree {
            return Some(m);
        }
    }
    None
}

/// Random homogeneous element with up to `nterms` terms.
pub fn homogeneous(
    rng: &mut SeededRng,
    table: &Arc<GeneratorTable>,
    degree: i64,
    max_base: u32,
    nterms: usize,
) -> GradedElement {
    let mut e = GradedElement::zero(table);
    for _ in 0..nterms {
        if let Some(m) = monomial(rng, table, degree, max_base) {
            e.add_term(m, small_rational(rng));
        }
    }
    e
}

/// Random element with terms of assorted degrees in `degrees`.
pub fn mixed(
    rng: &mut SeededRng,
    table: &Arc<GeneratorTable>,
    degrees: &[i64],
    max_base: u32,
    nterms: usize,
) -> GradedElement {
    let mut e = GradedElement::zero(table);
    for _ in 0..nterms {
        let d = degrees[rng.gen_range(0..degrees.len())];
        if let Some(m) = monomial(rng, table, d, max_base) {
            e.add_term(m, small_rational(rng));
        }
    }
    e
}

/// Random base polynomial of degree at most `max_deg`.
pub fn polynomial(rng: &mut SeededRng, table: &Arc<GeneratorTable>, max_deg: u32, nterms: usize) -> GradedElement {
    let mut e = GradedElement::zero(table);
    let bd = table.base_dim();
    for _ in 0..nterms {
        let mut m = Monomial::one(table);
        let d = rng.gen_range(0..=max_deg);
        for _ in 0..d {
            m.exps[rng.gen_range(0..bd)] += 1;
        }
        e.add_term(m, small_rational(rng));
    }
    e
}
