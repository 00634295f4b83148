use homred_core::algebra::{GeneratorTable, GradedElement, TruncationPolicy};
use homred_core::hypotheses::{example, Params};
use homred_core::koszul::{
    base_monomials, euler_consistent, homology_ranks, linear_contraction, slice_contraction, verified_contraction,
    Complement,
};
use homred_core::rational::q;

fn policy(d: u32) -> TruncationPolicy {
    TruncationPolicy { poly_degree: Some(d), ..Default::default() }
}

#[test]
fn linear_poisson_is_acyclic() {
    let ex = example("linear-poisson", &Params::default()).unwrap();
    let rows = homology_ranks(&ex.setup, &policy(6)).unwrap();
    assert!(euler_consistent(&rows));
    assert!(rows.iter().filter(|r| r.k > 0).all(|r| r.dim == 0));
}

#[test]
fn resonance_is_acyclic_but_angular_momentum_is_not() {
    let rs = example("resonance", &Params::default()).unwrap();
    let rows = homology_ranks(&rs.setup, &policy(4)).unwrap();
    assert!(rows.iter().filter(|r| r.k > 0).all(|r| r.dim == 0));
    let am = example("angular-momentum", &Params { n: 3, ..Default::default() }).unwrap();
    let rows = homology_ranks(&am.setup, &policy(4)).unwrap();
    assert!(euler_consistent(&rows));
    assert!(rows.iter().any(|r| r.k == 1 && r.dim > 0));
}

#[test]
fn linear_contraction_side_conditions() {
    let ex = example("linear-poisson", &Params::default()).unwrap();
    let t = GeneratorTable::koszul(3, 2);
    let kc = linear_contraction(&ex.setup, &t, 4).unwrap();
    let x1 = GradedElement::base_var(&t, 0);
    assert_eq!(kc.h(&x1), GradedElement::antighost(&t, 0));
    for w in 0..=3 {
        for m in base_monomials(&t, &[1; 3], w) {
            let x = GradedElement::term(&t, m, q(1));
            assert!(kc.h(&kc.prol(&kc.res(&x))).is_zero());
            assert!(kc.h(&kc.h(&x)).is_zero());
        }
    }
    let c = kc.contraction();
    assert!(c.verify().identities_hold());
}

#[test]
fn linear_contraction_refuses_other_moments() {
    let rs = example("resonance", &Params::default()).unwrap();
    let t = GeneratorTable::koszul(8, 1);
    assert!(linear_contraction(&rs.setup, &t, 4).is_err());
}

#[test]
fn resonance_slice_contraction() {
    let rs = example("resonance", &Params::default()).unwrap();
    let t = GeneratorTable::koszul(8, 1);
    let kc = slice_contraction(&rs.setup, &t, &policy(4), Complement::Fischer).unwrap();
    let c = verified_contraction(&kc).unwrap();
    assert!(c.verify().identities_hold());
}

#[test]
fn angular_momentum_slice_contraction_is_refused() {
    let am = example("angular-momentum", &Params { n: 3, ..Default::default() }).unwrap();
    let t = GeneratorTable::koszul(6, 3);
    assert!(slice_contraction(&am.setup, &t, &policy(4), Complement::Echelon).is_err());
}
