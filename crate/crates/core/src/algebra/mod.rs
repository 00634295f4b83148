//! Graded-commutative algebra over the rationals truncated in the formal
//! parameter: generator tables, sparse elements, brackets and star products.

pub mod bch;
pub mod bracket;
pub mod element;
pub mod star;
pub mod table;

pub use bch::{bch_star, Lie};
pub use bracket::{ghost_pairing, rothstein_flat, super_poisson, Poisson};
pub use element::{mul_monomials, GradedElement, Monomial, Side, TruncationPolicy, Var};
pub use star::{star, star_commutator};
pub use table::{Generator, GeneratorTable, Kind};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn odd_square_vanishes() {
        let t = GeneratorTable::brst(1, 2);
        let g = GradedElement::ghost(&t, 0);
        assert!((&g * &g).is_zero());
    }

    #[test]
    fn antighost_ghost_anticommute() {
        let t = GeneratorTable::brst(1, 2);
        let a = GradedElement::antighost(&t, 0);
        let g = GradedElement::ghost(&t, 1);
        assert_eq!(&a * &g, -(&g * &a));
    }

    #[test]
    fn products_of_mixed_terms() {
        let t = GeneratorTable::brst(2, 2);
        let x1 = GradedElement::base_var(&t, 0);
        let x2 = GradedElement::base_var(&t, 1);
        let g1 = GradedElement::ghost(&t, 0);
        let g2 = GradedElement::ghost(&t, 1);
        let lhs = &(&x1 * &g1) * &(&x2 * &g2);
        let rhs = &(&x1 * &x2) * &(&g1 * &g2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn left_derivatives() {
        let t = GeneratorTable::brst(1, 2);
        let g1 = GradedElement::ghost(&t, 0);
        let g2 = GradedElement::ghost(&t, 1);
        let v1 = Var::Gen(t.ghost(1, 0).unwrap());
        assert_eq!((&g1 * &g2).partial(v1), g2);
        assert_eq!((&g2 * &g1).partial(v1), -&g2);
        let x = GradedElement::base_var(&t, 0);
        assert_eq!((&(&x * &x) * &g1).partial(Var::Base(0)), (&x * &g1).scale(&q(2)));
        assert!(g1.try_partial(Var::Gen(99)).is_err());
    }

    #[test]
    fn filtration() {
        let t = GeneratorTable::brst(1, 3);
        let g = |a| GradedElement::ghost(&t, a);
        let ag = GradedElement::antighost(&t, 2);
        assert_eq!((&(&g(0) * &g(1)) * &ag).filtration_degree(), Some(2));
        assert_eq!(GradedElement::base_var(&t, 0).filtration_degree(), Some(0));
        let charge = &(&GradedElement::base_var(&t, 0) * &g(0)) + &(&(&g(0) * &g(1)) * &ag);
        assert_eq!(charge.filtration_degree(), Some(1));
    }

    #[test]
    fn embed_round_trip() {
        let k = GeneratorTable::koszul(2, 2);
        let b = GeneratorTable::brst(2, 2);
        let e = &GradedElement::base_var(&k, 1) * &GradedElement::antighost(&k, 1);
        let lifted = e.embed(&b).unwrap();
        assert_eq!(lifted, &GradedElement::base_var(&b, 1) * &GradedElement::antighost(&b, 1));
        assert_eq!(lifted.embed(&k).unwrap(), e);
    }
}
