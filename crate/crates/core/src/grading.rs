//! Multidegrees, parities and Koszul signs for permutations of graded factors.
//!
//! A permutation is stored as the list of source slots read off in output
//! order: applying `perm` to `(x_0, .., x_{n-1})` yields
//! `(x_{perm[0]}, .., x_{perm[n-1]})`.

use crate::error::{Error, Result};

/// Even or odd, the degree modulo two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

/// Parity of an integer degree.
pub fn parity(degree: i64) -> Parity {
    if degree.rem_euclid(2) == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Sign `(-1)^(a*b)`.
pub fn sign_of_swap(a: i64, b: i64) -> i8 {
    if parity(a).is_odd() && parity(b).is_odd() {
        -1
    } else {
        1
    }
}

/// Ordered list of integer degrees of factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Multidegree(pub Vec<i64>);

impl Multidegree {
    pub fn new(degrees: Vec<i64>) -> Self {
        Multidegree(degrees)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// The shift `x[1]`: every entry raised by one.
    pub fn shift(&self) -> Multidegree {
        Multidegree(self.0.iter().map(|d| d + 1).collect())
    }

    /// Reorder the entries as `perm` does with factors.
    pub fn permuted(&self, perm: &[usize]) -> Result<Multidegree> {
        check_perm(perm, self.len())?;
        Ok(Multidegree(perm.iter().map(|&k| self.0[k]).collect()))
    }
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Argument(format!(
            "permutation acts on {} slots but {} degrees were given",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Argument(format!("{perm:?} is not a bijection")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Koszul sign of reordering factors of the given degrees by `perm`.
///
/// Bubble sort of the output sequence back to source order; every adjacent
/// swap of two factors contributes `(-1)^(x_i x_j)`.
pub fn koszul_sign(perm: &[usize], degrees: &Multidegree) -> Result<i8> {
    check_perm(perm, degrees.len())?;
    let mut work: Vec<usize> = perm.to_vec();
    let mut sign = 1i8;
    let n = work.len();
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if work[k] > work[k + 1] {
                sign *= sign_of_swap(degrees.0[work[k]], degrees.0[work[k + 1]]);
                work.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    Ok(sign)
}

/// `compose(s, t)` is the permutation acting as `t` first, then `s`.
pub fn compose(s: &[usize], t: &[usize]) -> Vec<usize> {
    s.iter().map(|&k| t[k]).collect()
}

/// Ordinary permutation signature, from the cycle decomposition.
pub fn signature(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// A permutation together with the sign it picks up on a fixed multidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    pub permutation: Vec<usize>,
    pub sign: i8,
}

impl SignedPermutation {
    pub fn new(permutation: Vec<usize>, degrees: &Multidegree) -> Result<Self> {
        let sign = koszul_sign(&permutation, degrees)?;
        Ok(SignedPermutation { permutation, sign })
    }

    /// `self` after `first`, where `first` was built on the original degrees
    /// and `self` on the degrees already permuted by `first`.
    pub fn after(&self, first: &SignedPermutation) -> SignedPermutation {
        SignedPermutation {
            permutation: compose(&self.permutation, &first.permutation),
            sign: self.sign * first.sign,
        }
    }
}
